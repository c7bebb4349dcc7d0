use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use crate::assembly::CMatrix;
use crate::error::{Error, Result};
use crate::wire;

/// Support point of the numerical range in direction `angle`: `x^H A x` for
/// the top eigenvector `x` of the Hermitian part of `e^{-i angle} A`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupportSample {
    pub angle: f64,
    /// `max Re(e^{-i angle} z)` over the numerical range.
    pub support: f64,
    #[serde(with = "wire::pair")]
    pub point: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NumericalRange {
    pub samples: Vec<SupportSample>,
}

impl NumericalRange {
    pub fn points(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.point).collect()
    }

    /// Half-plane test against every sampled support line. The sampled lines
    /// enclose the numerical range, so points of the range always pass.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.samples
            .iter()
            .all(|s| (Complex64::from_polar(1.0, -s.angle) * z).re <= s.support + tol)
    }

    /// Convex hull of the support points, counter-clockwise.
    pub fn hull(&self) -> Vec<Complex64> {
        convex_hull(&self.points())
    }
}

fn hermitian_part(a: &CMatrix, angle: f64) -> CMatrix {
    let rot = Complex64::from_polar(1.0, -angle);
    let n = a.nrows();
    CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            Complex64::new((rot * a[(j, j)]).re, 0.0)
        } else {
            (rot * a[(j, k)] + (rot * a[(k, j)]).conj()) * 0.5
        }
    })
}

/// Boundary samples of `{ (Au, u) : |u| = 1 }` on a uniform angle grid
/// `angle_j = 2 pi j / n_theta`.
pub fn numerical_range(a: &CMatrix, n_theta: usize) -> Result<NumericalRange> {
    if n_theta < 3 {
        return Err(Error::Domain(format!(
            "numerical range needs n_theta >= 3, got {n_theta}"
        )));
    }
    if a.nrows() != a.ncols() || a.is_empty() {
        return Err(Error::Dimension(
            "numerical range needs a non-empty square matrix".into(),
        ));
    }
    let n = a.nrows();
    let mut samples = Vec::with_capacity(n_theta);
    for j in 0..n_theta {
        let angle = 2.0 * PI * j as f64 / n_theta as f64;
        let h = hermitian_part(a, angle);
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 200 * n).ok_or(Error::Solver { iterations: 200 * n })?;
        let top = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, _)| i)
            .expect("non-empty");
        let x = eig.eigenvectors.column(top);
        let point = (x.adjoint() * a * x)[(0, 0)];
        samples.push(SupportSample {
            angle,
            support: eig.eigenvalues[top],
            point,
        });
    }
    Ok(NumericalRange { samples })
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Sector `{ z : |arg(z - gamma)| <= theta }`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectorFit {
    pub theta: f64,
    pub gamma: f64,
    pub satisfied: bool,
}

impl SectorFit {
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        z.re - z.im.abs() / self.theta.tan() >= self.gamma - tol
    }
}

/// Largest vertex `gamma` whose sector of half-angle `theta` holds every sample.
pub fn sector_fit(samples: &[Complex64], theta: f64) -> Result<SectorFit> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "sector angle must lie in (0, pi/2), got {theta}"
        )));
    }
    if samples.is_empty() {
        return Err(Error::Domain("sector fit needs at least one sample".into()));
    }
    let cot = 1.0 / theta.tan();
    let gamma = samples
        .iter()
        .map(|z| z.re - z.im.abs() * cot)
        .fold(f64::INFINITY, f64::min);
    Ok(SectorFit {
        theta,
        gamma,
        satisfied: gamma.is_finite(),
    })
}
