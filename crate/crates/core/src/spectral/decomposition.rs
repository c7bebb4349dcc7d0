use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{eigen_decompose, lex_sort};
use super::matching::matching_distance;
use crate::assembly::{assemble, assemble_minus_symmetric, matched_windows, parity_blocks, OperatorKind};
use crate::error::Result;
use crate::seqspace::CoeffSeq;
use crate::wire;

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub m: u32,
    pub half_width: usize,
    pub full_half_width: usize,
    /// Largest pair distance between `spec(S)` and `spec(S+) u spec(S-)`.
    pub distance: f64,
    pub norm: f64,
    /// Relative tolerance: pass iff `distance <= tol * norm`.
    pub tol: f64,
    /// Every even/odd coupling of the full matrix is exactly zero.
    pub blocks_exact: bool,
    pub max_residual: f64,
    pub pass: bool,
    #[serde(with = "wire::pair_vec")]
    pub full: Vec<Complex64>,
    #[serde(with = "wire::pair_vec")]
    pub union: Vec<Complex64>,
}

/// Compares the 2-periodic spectrum with the union of the periodic and
/// semiperiodic spectra on matched windows. `v` must cover the full window
/// (plus half-width `2N + 1`) for the full operator to see every coefficient.
pub fn decomposition_check(v: &CoeffSeq, m: u32, half_width: usize, tol: f64) -> Result<DecompositionReport> {
    let windows = matched_windows(half_width)?;
    let full = assemble(OperatorKind::SFull, m, v, windows.full.half_width())?;
    let blocks_exact = parity_blocks(&full).is_ok();
    let plus = assemble(OperatorKind::SPlus, m, v, half_width)?;
    let minus = assemble_minus_symmetric(m, v, half_width)?;

    let full_dec = eigen_decompose(full.entries())?;
    let plus_dec = eigen_decompose(plus.entries())?;
    let minus_dec = eigen_decompose(&minus)?;

    let union = lex_sort(&[plus_dec.values.clone(), minus_dec.values.clone()].concat());
    let distance = matching_distance(&full_dec.values, &union);
    let norm = full_dec.norm;
    let max_residual = full_dec.residual.max(plus_dec.residual).max(minus_dec.residual);
    Ok(DecompositionReport {
        m,
        half_width,
        full_half_width: windows.full.half_width(),
        distance,
        norm,
        tol,
        blocks_exact,
        max_residual,
        pass: blocks_exact && distance <= tol * norm,
        full: full_dec.values,
        union,
    })
}
