//! Independent reference implementations used by the integration suites.
//! None of these call into the library's numerics.

#![allow(dead_code)]

use std::cmp::Ordering;

use hillspec::assembly::CMatrix;
use hillspec::seqspace::{CoeffSeq, FreqLattice, Parity};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn phys_of(parity: Parity, k: i64) -> i64 {
    match parity {
        Parity::PeriodicPlus => 2 * k,
        Parity::SemiperiodicMinus => 2 * k + 1,
        Parity::FullTwoPeriodic => k,
    }
}

/// Direct double loop: for every output slot, sum over every input pair whose
/// physical frequencies add up to the slot's frequency.
pub fn convolve_oracle(a: &CoeffSeq, b: &CoeffSeq, out: FreqLattice) -> Vec<Complex64> {
    let n = a.half_width() as i64;
    let (pa, pb, po) = (a.lattice().parity(), b.lattice().parity(), out.parity());
    let mut result = Vec::new();
    for ko in -n..=n {
        let target = phys_of(po, ko);
        let mut acc = c(0.0, 0.0);
        for ka in -n..=n {
            for kb in -n..=n {
                if phys_of(pa, ka) + phys_of(pb, kb) == target {
                    acc += a.coeffs()[(ka + n) as usize] * b.coeffs()[(kb + n) as usize];
                }
            }
        }
        result.push(acc);
    }
    result
}

/// One-sided Jacobi SVD; returns the singular values in no particular order.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_singular_values(a: &CMatrix) -> Vec<f64> {
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut col: Vec<Vec<Complex64>> = (0..cols).map(|j| (0..rows).map(|i| a[(i, j)]).collect()).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = col[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = col[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = col[p].iter().zip(&col[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-16 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let x = col[p][i];
                    let y = col[q][i] * phase.conj();
                    col[p][i] = x * cs - y * sn;
                    col[q][i] = x * sn + y * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    col.iter()
        .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

pub fn resolvent_norm_oracle(a: &CMatrix, lambda: Complex64) -> f64 {
    let mut b = a.clone();
    for j in 0..b.nrows() {
        b[(j, j)] -= lambda;
    }
    let smin = jacobi_singular_values(&b).into_iter().fold(f64::INFINITY, f64::min);
    1.0 / smin
}

/// Stable insertion sort by (Re, Im).
pub fn insertion_sort(values: &[Complex64]) -> Vec<Complex64> {
    let key = |a: &Complex64, b: &Complex64| -> Ordering {
        if a.re < b.re {
            Ordering::Less
        } else if a.re > b.re {
            Ordering::Greater
        } else if a.im < b.im {
            Ordering::Less
        } else if a.im > b.im {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    };
    let mut out: Vec<Complex64> = Vec::with_capacity(values.len());
    for &v in values {
        let mut pos = out.len();
        while pos > 0 && key(&out[pos - 1], &v) == Ordering::Greater {
            pos -= 1;
        }
        out.insert(pos, v);
    }
    out
}

/// `sum_{n < |k| <= top} <2k>^{-2s}` for a unit-coefficient comb, summed
/// from the largest term down.
pub fn comb_tail_sum(n: usize, top: usize, s: f64) -> f64 {
    (n + 1..=top)
        .rev()
        .map(|k| 2.0 * (1.0 + 2.0 * k as f64).powf(-2.0 * s))
        .sum()
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_seq(rng: &mut ChaCha8Rng, lattice: FreqLattice) -> CoeffSeq {
    let coeffs = (0..lattice.dim()).map(|_| random_complex(rng)).collect();
    CoeffSeq::new(lattice, coeffs).unwrap()
}

pub fn bits(values: &[Complex64]) -> Vec<(u64, u64)> {
    values.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}
