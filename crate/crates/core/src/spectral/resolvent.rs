use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{eigen_decompose, spectral_norm};
use super::fit_line;
use super::matching::matching_distance;
use crate::assembly::{assemble, CMatrix, OperatorKind};
use crate::error::{Error, Result};
use crate::potentials::{as_plus, truncate};
use crate::seqspace::hs_norm;
use crate::wire;

/// Probe point shared by every resolvent comparison unless overridden.
pub const DEFAULT_PROBE: Complex64 = Complex64 { re: -1.0, im: -1.0 };

fn shifted(a: &CMatrix, lambda: Complex64) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "resolvent needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut b = a.clone();
    for j in 0..b.nrows() {
        b[(j, j)] -= lambda;
    }
    Ok(b)
}

/// `sigma_min(A - lambda)` after the pole check.
fn smallest_singular_value(a: &CMatrix, lambda: Complex64) -> Result<f64> {
    let b = shifted(a, lambda)?;
    let sigma = b.singular_values().iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = 1e-12 * spectral_norm(a);
    if sigma <= threshold {
        return Err(Error::Pole {
            re: lambda.re,
            im: lambda.im,
            threshold,
        });
    }
    Ok(sigma)
}

/// `||(A - lambda)^{-1}||_2 = 1 / sigma_min(A - lambda)`.
pub fn resolvent_norm(a: &CMatrix, lambda: Complex64) -> Result<f64> {
    Ok(1.0 / smallest_singular_value(a, lambda)?)
}

/// `(A - lambda)^{-1}`.
pub fn resolvent(a: &CMatrix, lambda: Complex64) -> Result<CMatrix> {
    smallest_singular_value(a, lambda)?;
    shifted(a, lambda)?.lu().try_inverse().ok_or(Error::Pole {
        re: lambda.re,
        im: lambda.im,
        threshold: 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `||V_n - V||_{H^{-m}}`.
    pub dist: f64,
    /// `||R(lambda, A_n) - R(lambda, A)||_2`.
    pub gap: Option<f64>,
    /// Matched distance between the `K` lowest eigenvalues of `A` and the
    /// spectrum of `A_n`.
    pub specdist: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub kind: OperatorKind,
    pub m: u32,
    pub half_width: usize,
    #[serde(with = "wire::pair")]
    pub lambda: Complex64,
    pub k: usize,
    pub reference_resolvent_norm: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    fn positive(&self, f: impl Fn(&ConvergenceRow) -> Option<(f64, f64)>) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(f)
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|(x, y)| (x.ln(), y.ln()))
            .collect()
    }

    /// Log-log slope of `gap` against `dist`.
    pub fn gap_vs_dist_slope(&self) -> Option<f64> {
        fit_line(&self.positive(|r| Some((r.dist, r.gap?)))).map(|f| f.slope)
    }

    /// Log-log slope of `dist` against `n`.
    pub fn dist_slope(&self) -> Option<f64> {
        fit_line(&self.positive(|r| Some((r.n as f64, r.dist)))).map(|f| f.slope)
    }

    /// Smallest `kappa` with `gap <= kappa * dist` on every row with `dist > 0`.
    pub fn kappa(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.dist > 0.0)
            .filter_map(|r| Some(r.gap? / r.dist))
            .reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_else(|| "nan".into());
        let mut out = String::from("n,dist,gap,specdist\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:e},{},{}\n", r.n, r.dist, cell(r.gap), cell(r.specdist)));
        }
        out
    }
}

/// Truncation study at a fixed Galerkin window `N`. The reference potential
/// is `V` restricted to periodic indices `|k| <= N`, so every column reaches
/// zero at `n = N`; row `n` compares `A_n = A(V_n)` against `A = A(V_N)`.
pub fn convergence_study(
    v: &crate::seqspace::CoeffSeq,
    m: u32,
    kind: OperatorKind,
    schedule: &[usize],
    half_width: usize,
    lambda: Complex64,
    k: usize,
) -> Result<ConvergenceTable> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "schedule must be non-empty and strictly increasing".into(),
        ));
    }
    if *schedule.last().expect("non-empty") > half_width {
        return Err(Error::Domain(format!("schedule exceeds the window N = {half_width}")));
    }
    if k == 0 {
        return Err(Error::Domain("K must be positive".into()));
    }
    let v = as_plus(v)?;
    if v.half_width() < half_width {
        return Err(Error::Domain(format!(
            "potential window {} is narrower than N = {half_width}",
            v.half_width()
        )));
    }
    let reference = v.resized(half_width)?;
    let a = assemble(kind, m, &reference, half_width)?;
    let r = resolvent(a.entries(), lambda)?;
    let reference_resolvent_norm = spectral_norm(&r);
    let lowest: Vec<Complex64> = eigen_decompose(a.entries())?.values.into_iter().take(k).collect();
    let s = -(m as f64);

    let mut rows = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let vn = truncate(&reference, n)?;
        let dist = hs_norm(&vn.sub(&reference)?, s);
        let an = assemble(kind, m, &vn, half_width)?;
        let row = match resolvent(an.entries(), lambda) {
            Ok(rn) => {
                let gap = spectral_norm(&(rn - &r));
                let specdist = matching_distance(&lowest, &eigen_decompose(an.entries())?.values);
                ConvergenceRow {
                    n,
                    dist,
                    gap: Some(gap),
                    specdist: Some(specdist),
                    error: None,
                }
            }
            Err(e @ Error::Pole { .. }) => ConvergenceRow {
                n,
                dist,
                gap: None,
                specdist: None,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(ConvergenceTable {
        kind,
        m,
        half_width,
        lambda,
        k,
        reference_resolvent_norm,
        rows,
    })
}
