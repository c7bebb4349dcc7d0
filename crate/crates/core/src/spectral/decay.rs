use num_complex::Complex64;
use serde::Serialize;

use super::eigen::eigen_decompose;
use super::fit_line;
use crate::assembly::GalerkinMatrix;
use crate::error::{Error, Result};
use crate::seqspace::CoeffSeq;

/// Coefficients below this modulus (after normalization) are left out of the fit.
const FLOOR: f64 = 1e-14;
const MIN_HALF_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// Slope of `ln |u(k)|` against `ln <f_k>`.
    pub slope: f64,
    pub r2: f64,
    pub points: usize,
}

fn outer(u: &CoeffSeq) -> impl Iterator<Item = (i64, Complex64)> + '_ {
    let half = (u.half_width() / 2) as i64;
    u.lattice()
        .indices()
        .filter(move |k| k.abs() > half)
        .map(move |k| (k, u.get(k)))
}

/// Largest outer-half coefficient modulus of `u / ||u||`.
pub fn outer_max(u: &CoeffSeq) -> f64 {
    let norm = u.l2_norm();
    if norm == 0.0 {
        return 0.0;
    }
    outer(u).map(|(_, c)| c.norm() / norm).fold(0.0, f64::max)
}

/// Power-law fit over the outer half `|k| > N/2` of the window.
pub fn decay_exponent(eigvec: &CoeffSeq) -> Result<DecayFit> {
    if eigvec.half_width() < MIN_HALF_WIDTH {
        return Err(Error::Domain(format!(
            "decay fit needs half-width >= {MIN_HALF_WIDTH}, got {}",
            eigvec.half_width()
        )));
    }
    let norm = eigvec.l2_norm();
    if norm == 0.0 {
        return Err(Error::Domain("decay fit of the zero vector".into()));
    }
    let lattice = eigvec.lattice();
    let points: Vec<(f64, f64)> = outer(eigvec)
        .filter_map(|(k, c)| {
            let c = c.norm() / norm;
            (c >= FLOOR).then(|| ((1.0 + lattice.phys(k).unsigned_abs() as f64).ln(), c.ln()))
        })
        .collect();
    let fit = fit_line(&points).ok_or_else(|| {
        Error::DegenerateFit(format!(
            "{} outer coefficients at or above {FLOOR:e}; shrink the fit range",
            points.len()
        ))
    })?;
    Ok(DecayFit {
        slope: fit.slope,
        r2: fit.r2,
        points: points.len(),
    })
}

/// Lex-lowest eigenvalue and its unit eigenvector on the matrix lattice.
pub fn ground_state(a: &GalerkinMatrix) -> Result<(Complex64, CoeffSeq)> {
    let dec = eigen_decompose(a.entries())?;
    let v = dec.vectors.column(0).iter().cloned().collect();
    Ok((dec.values[0], CoeffSeq::new(a.lattice(), v)?))
}
