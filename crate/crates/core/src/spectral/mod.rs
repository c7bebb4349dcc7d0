//! Eigenvalues, spectrum decomposition, numerical range, form-bound and
//! sectoriality audits, resolvent comparisons and eigenvector decay.

mod audit;
mod decay;
mod decomposition;
mod eigen;
mod matching;
mod numrange;
mod resolvent;

pub use audit::{
    estimate_conv_constant, form_bound_audit, random_trial_vectors, sectoriality_audit, ConvConstant, FormBoundReport,
    SectorRow, SectorialityReport, SAFETY_FACTOR,
};
pub use decay::{decay_exponent, ground_state, outer_max, DecayFit};
pub use decomposition::{decomposition_check, DecompositionReport};
pub use eigen::{eigen, eigen_decompose, lex_cmp, lex_sort, spectral_norm, EigenDecomp, SolverRoute, SpectrumReport};
pub use matching::{assignment, matching_distance};
pub use numrange::{numerical_range, sector_fit, NumericalRange, SectorFit, SupportSample};
pub use resolvent::{convergence_study, resolvent, resolvent_norm, ConvergenceRow, ConvergenceTable, DEFAULT_PROBE};

/// Least-squares line through `(x, y)` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// `None` with fewer than two points or no spread in `x`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}
