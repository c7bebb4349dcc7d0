//! Randomized audits of the relative form bound and of sectoriality.
//!
//! Every audit draws from ChaCha8 seeded with the caller's seed: stream 0
//! feeds the convolution-constant estimate, stream 1 the test vectors.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::assembly::{free_symbol, OperatorKind};
use crate::error::{Error, Result};
use crate::potentials::{as_plus, split_smooth_small};
use crate::seqspace::{convolve, hs_norm, pairing, weight, CoeffSeq, FreqLattice};

/// Inflation applied to the empirical convolution constant before it enters
/// any bound.
pub const SAFETY_FACTOR: f64 = 2.0;

const VECTOR_STREAM: u64 = 1;

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A random sequence: either a few random spikes or a dense Gaussian vector
/// shaped by `<f>^b` with `b` drawn from `[lo, hi)`.
fn random_seq(rng: &mut ChaCha8Rng, lattice: FreqLattice, lo: f64, hi: f64) -> CoeffSeq {
    if rng.random_bool(0.25) {
        let mut a = CoeffSeq::zeros(lattice);
        let n = lattice.half_width() as i64;
        for _ in 0..rng.random_range(1..=3) {
            let k = rng.random_range(-n..=n);
            a.set(k, gaussian(rng)).expect("index in window");
        }
        a
    } else {
        let b = rng.random_range(lo..hi);
        CoeffSeq::from_fn(lattice, |k| gaussian(rng) * weight(lattice.phys(k), b / 2.0))
    }
}

fn ensure_nonzero(mut a: CoeffSeq) -> CoeffSeq {
    if a.l2_norm() == 0.0 {
        a.set(0, Complex64::new(1.0, 0.0)).expect("index 0");
    }
    a
}

/// Unit-norm test vectors on `lattice`, deterministic in `seed`.
pub fn random_trial_vectors(m: u32, lattice: FreqLattice, trials: usize, seed: u64) -> Vec<CoeffSeq> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(VECTOR_STREAM);
    let m = m as f64;
    (0..trials)
        .map(|_| {
            let u = ensure_nonzero(random_seq(&mut rng, lattice, -m - 1.0, 0.5));
            let norm = u.l2_norm();
            CoeffSeq::from_fn(lattice, |k| u.get(k) / norm)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvConstant {
    pub value: f64,
    /// Ratio of the deterministic witness `W = u = unit at index 0`.
    pub witness_ratio: f64,
    pub m: u32,
    pub half_width: usize,
    pub trials: usize,
    pub seed: u64,
}

fn conv_ratio(w: &CoeffSeq, u: &CoeffSeq, m: f64) -> Result<f64> {
    let num = hs_norm(&convolve(w, u)?, -m);
    let den = hs_norm(w, -m) * hs_norm(u, m);
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// Empirical lower bound for the constant of `h^{-m} x h^m -> h^{-m}`:
/// the largest ratio `||W * u||_{-m} / (||W||_{-m} ||u||_m)` seen over the
/// witness and `trials` seeded random pairs. `W` is a potential (periodic
/// lattice), `u` lives on `lattice`.
pub fn estimate_conv_constant(m: u32, lattice: FreqLattice, trials: usize, seed: u64) -> Result<ConvConstant> {
    if trials == 0 {
        return Err(Error::Domain("conv-constant estimate needs at least one trial".into()));
    }
    let mf = m as f64;
    let potential_lattice = FreqLattice::plus(lattice.half_width())?;
    let witness_ratio = conv_ratio(&CoeffSeq::unit(potential_lattice, 0)?, &CoeffSeq::unit(lattice, 0)?, mf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = witness_ratio;
    for _ in 0..trials {
        let w = ensure_nonzero(random_seq(&mut rng, potential_lattice, -1.0, 2.0 * mf + 1.0));
        let u = ensure_nonzero(random_seq(&mut rng, lattice, -2.0 * mf - 1.0, 0.5));
        best = best.max(conv_ratio(&w, &u, mf)?);
    }
    Ok(ConvConstant {
        value: best,
        witness_ratio,
        m,
        half_width: lattice.half_width(),
        trials,
        seed,
    })
}

/// `tau[u] = <D^{2m} u, u>`.
fn free_form(u: &CoeffSeq, m: u32) -> f64 {
    let lattice = u.lattice();
    lattice
        .indices()
        .zip(u.coeffs())
        .map(|(k, c)| free_symbol(lattice.phys(k), m) * c.norm_sqr())
        .sum()
}

/// `t_V[u] = <V u, u>` through the truncated convolution; `v` on the
/// periodic lattice.
fn potential_form(v: &CoeffSeq, u: &CoeffSeq) -> Result<Complex64> {
    let width = v.half_width().max(u.half_width());
    let vp = v.resized(width)?;
    let up = u.resized(width)?;
    pairing(&convolve(&vp, &up)?, &up)
}

#[derive(Debug, Clone, Serialize)]
pub struct FormBoundReport {
    pub kind: OperatorKind,
    pub m: u32,
    pub half_width: usize,
    pub delta: f64,
    pub conv_constant: ConvConstant,
    /// `SAFETY_FACTOR * conv_constant.value`.
    pub c_used: f64,
    pub cut: usize,
    pub smooth_norm: f64,
    pub small_norm: f64,
    /// `max (LHS - RHS) / RHS` over the trials.
    pub max_slack: f64,
    pub violations: usize,
    pub trials: usize,
    pub seed: u64,
    pub pass: bool,
}

/// Checks `|t_V[u]| <= delta tau[u] + (C ||V0||_{H^m} + delta) ||u||^2` on
/// seeded random `u`, with `V = V0 + V_delta` split at `delta / C`.
pub fn form_bound_audit(
    v: &CoeffSeq,
    kind: OperatorKind,
    m: u32,
    half_width: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<FormBoundReport> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let v = as_plus(v)?;
    let lattice = kind.lattice(half_width)?;
    let conv_constant = estimate_conv_constant(m, lattice, trials, seed)?;
    let c_used = SAFETY_FACTOR * conv_constant.value;
    let split = split_smooth_small(&v, m, delta, c_used)?;
    let smooth_norm = hs_norm(&split.smooth, m as f64);
    let small_norm = hs_norm(&split.small, -(m as f64));

    let mut max_slack = f64::NEG_INFINITY;
    let mut violations = 0;
    for u in random_trial_vectors(m, lattice, trials, seed) {
        let lhs = potential_form(&v, &u)?.norm();
        let l2 = u.l2_norm().powi(2);
        let rhs = delta * free_form(&u, m) + (c_used * smooth_norm + delta) * l2;
        let slack = (lhs - rhs) / rhs;
        max_slack = max_slack.max(slack);
        if slack > 1e-10 {
            violations += 1;
        }
    }
    Ok(FormBoundReport {
        kind,
        m,
        half_width,
        delta,
        conv_constant,
        c_used,
        cut: split.cut,
        smooth_norm,
        small_norm,
        max_slack,
        violations,
        trials,
        seed,
        pass: violations == 0,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectorRow {
    pub eps: f64,
    /// Smallest `c >= 0` with `|Im q| <= eps Re q + c ||u||^2` on every trial.
    pub c_empirical: f64,
    /// `2 C ||V0||_{H^m} + eps` with `V0` split at `delta = eps / 2`.
    pub c_theory: f64,
    pub cut: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorialityReport {
    pub kind: OperatorKind,
    pub m: u32,
    pub half_width: usize,
    pub conv_constant: ConvConstant,
    pub c_used: f64,
    pub rows: Vec<SectorRow>,
    /// `c_eps` nonincreasing when the rows are ordered by increasing `eps`.
    pub monotone: bool,
    pub trials: usize,
    pub seed: u64,
    pub pass: bool,
}

pub fn sectoriality_audit(
    v: &CoeffSeq,
    kind: OperatorKind,
    m: u32,
    half_width: usize,
    eps_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SectorialityReport> {
    if eps_list.is_empty() {
        return Err(Error::Domain("sectoriality audit needs at least one eps".into()));
    }
    if let Some(eps) = eps_list.iter().find(|e| !(**e > 0.0 && **e < 0.5)) {
        return Err(Error::Domain(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let v = as_plus(v)?;
    let lattice = kind.lattice(half_width)?;
    let conv_constant = estimate_conv_constant(m, lattice, trials, seed)?;
    let c_used = SAFETY_FACTOR * conv_constant.value;

    let forms: Vec<(Complex64, f64)> = random_trial_vectors(m, lattice, trials, seed)
        .iter()
        .map(|u| {
            let q = Complex64::new(free_form(u, m), 0.0) + potential_form(&v, u)?;
            Ok((q, u.l2_norm().powi(2)))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let c_empirical = forms
            .iter()
            .map(|(q, l2)| (q.im.abs() - eps * q.re) / l2)
            .fold(0.0, f64::max);
        let split = split_smooth_small(&v, m, eps / 2.0, c_used)?;
        let c_theory = 2.0 * c_used * hs_norm(&split.smooth, m as f64) + eps;
        rows.push(SectorRow {
            eps,
            c_empirical,
            c_theory,
            cut: split.cut,
            pass: c_empirical <= c_theory,
        });
    }
    let mut by_eps = rows.clone();
    by_eps.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let monotone = by_eps.windows(2).all(|w| w[1].c_empirical <= w[0].c_empirical);
    let pass = rows.iter().all(|r| r.pass);
    Ok(SectorialityReport {
        kind,
        m,
        half_width,
        conv_constant,
        c_used,
        rows,
        monotone,
        trials,
        seed,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::potentials::{materialize, PotentialSpec};

    fn plus(n: usize) -> FreqLattice {
        FreqLattice::plus(n).unwrap()
    }

    #[test]
    fn witness_and_reproducibility() {
        let a = estimate_conv_constant(1, plus(16), 200, 1).unwrap();
        let b = estimate_conv_constant(1, plus(16), 200, 1).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.witness_ratio, 1.0);
        assert!(a.value >= 1.0);
        let more = estimate_conv_constant(1, plus(16), 400, 1).unwrap();
        assert!(more.value >= a.value);
    }

    #[test]
    fn unit_potential_ratio_is_at_most_one() {
        // W = unit at 0 acts as the identity: ratio ||u||_{-m} / ||u||_m <= 1
        let w = CoeffSeq::unit(plus(8), 0).unwrap();
        for u in random_trial_vectors(1, plus(8), 50, 5) {
            assert!(conv_ratio(&w, &u, 1.0).unwrap() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn potential_form_matches_matrix() {
        let spec = PotentialSpec::RandomDecay {
            exponent: 0.75,
            seed: 8,
            phase: crate::potentials::PhaseMode::Complex,
        };
        for kind in [OperatorKind::SPlus, OperatorKind::SMinus, OperatorKind::SFull] {
            let n = 6;
            let v = materialize(&spec, kind.coverage(n).unwrap()).unwrap();
            let a = assemble(kind, 2, &v, n).unwrap();
            for u in random_trial_vectors(2, kind.lattice(n).unwrap(), 10, 3) {
                let x = nalgebra::DVector::from_column_slice(u.coeffs());
                let direct = (x.adjoint() * a.entries() * &x)[(0, 0)];
                let via = Complex64::new(free_form(&u, 2), 0.0) + potential_form(&v, &u).unwrap();
                assert!((direct - via).norm() <= 1e-12 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn zero_and_constant_potentials_never_violate() {
        let zero = CoeffSeq::zeros(plus(16));
        let rep = form_bound_audit(&zero, OperatorKind::SPlus, 1, 8, 0.1, 100, 2).unwrap();
        assert!(rep.pass);
        assert!(rep.max_slack < 0.0);
        let cst = materialize(
            &PotentialSpec::Constant {
                c: Complex64::new(-3.0, 2.0),
            },
            plus(16),
        )
        .unwrap();
        for delta in [10.0, 0.5, 1e-3] {
            let rep = form_bound_audit(&cst, OperatorKind::SPlus, 1, 8, delta, 100, 2).unwrap();
            assert!(rep.pass);
        }
        assert!(form_bound_audit(&zero, OperatorKind::SPlus, 1, 8, 0.0, 10, 2).is_err());
    }

    #[test]
    fn real_potential_has_zero_sector_constant() {
        let v = materialize(&PotentialSpec::comb(1.0), plus(32)).unwrap();
        let rep = sectoriality_audit(&v, OperatorKind::SPlus, 1, 16, &[0.1, 0.3], 200, 4).unwrap();
        for row in &rep.rows {
            assert_eq!(row.c_empirical, 0.0);
        }
        assert!(rep.pass && rep.monotone);
    }

    #[test]
    fn imaginary_cosine_passes() {
        let i = Complex64::new(0.0, 1.0);
        let v = materialize(&PotentialSpec::trig(&[(2, i), (-2, i)]), plus(32)).unwrap();
        let rep = sectoriality_audit(&v, OperatorKind::SPlus, 1, 16, &[0.1], 500, 9).unwrap();
        assert!(rep.rows[0].c_empirical.is_finite());
        assert!(rep.pass);
    }

    #[test]
    fn eps_range_enforced() {
        let v = CoeffSeq::zeros(plus(4));
        assert!(sectoriality_audit(&v, OperatorKind::SPlus, 1, 2, &[0.5], 10, 0).is_err());
        assert!(sectoriality_audit(&v, OperatorKind::SPlus, 1, 2, &[0.0], 10, 0).is_err());
    }
}
