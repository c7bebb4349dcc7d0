//! Declarative 1-periodic distributional potentials.
//!
//! A [`PotentialSpec`] names a generator family; [`materialize`] turns it into
//! Fourier coefficients `V(2k)` of `V(x) = sum_k V(2k) e^{i 2k pi x}`. Only even
//! physical frequencies ever carry coefficients.
//!
//! `RandomDecay` draws one ChaCha8 stream per frequency index (stream id is
//! the zigzag encoding of `k`, key is the seed), so a coefficient does not
//! depend on the window it was materialized in.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqspace::{hs_norm, weight, CoeffSeq, FreqLattice, Parity};
use crate::wire;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Symmetric `+-1` signs, so the potential is real-valued.
    Real,
    /// Independent phases `exp(i 2 pi u)` per frequency.
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    /// Physical frequency; must be even.
    pub freq: i64,
    #[serde(with = "wire::pair")]
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant {
        #[serde(with = "wire::pair")]
        c: Complex64,
    },
    TrigPoly {
        terms: Vec<TrigTerm>,
    },
    DiracComb {
        #[serde(with = "wire::pair", default = "wire::one")]
        amplitude: Complex64,
    },
    DiracCombDerivative {
        order: u32,
        #[serde(with = "wire::pair", default = "wire::one")]
        amplitude: Complex64,
    },
    RandomDecay {
        exponent: f64,
        seed: u64,
        phase: PhaseMode,
    },
    Explicit {
        path: PathBuf,
    },
}

impl PotentialSpec {
    pub fn trig(terms: &[(i64, Complex64)]) -> Self {
        PotentialSpec::TrigPoly {
            terms: terms
                .iter()
                .map(|&(freq, amplitude)| TrigTerm { freq, amplitude })
                .collect(),
        }
    }

    pub fn comb(amplitude: f64) -> Self {
        PotentialSpec::DiracComb {
            amplitude: Complex64::new(amplitude, 0.0),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            PotentialSpec::Zero => "zero",
            PotentialSpec::Constant { .. } => "constant",
            PotentialSpec::TrigPoly { .. } => "trig_poly",
            PotentialSpec::DiracComb { .. } => "dirac_comb",
            PotentialSpec::DiracCombDerivative { .. } => "dirac_comb_derivative",
            PotentialSpec::RandomDecay { .. } => "random_decay",
            PotentialSpec::Explicit { .. } => "explicit",
        }
    }

    /// Parameter checks that do not need file access.
    pub fn check(&self) -> Result<()> {
        match self {
            PotentialSpec::TrigPoly { terms } => {
                if let Some(t) = terms.iter().find(|t| t.freq % 2 != 0) {
                    return Err(Error::Domain(format!(
                        "trig_poly frequency {} is odd; potentials carry even frequencies only",
                        t.freq
                    )));
                }
            }
            PotentialSpec::DiracCombDerivative { order, .. } if *order == 0 => {
                return Err(Error::Domain("derivative order must be positive".into()));
            }
            PotentialSpec::RandomDecay { exponent, .. } if !exponent.is_finite() => {
                return Err(Error::Domain("random_decay exponent must be finite".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

fn zigzag(k: i64) -> u64 {
    ((k << 1) ^ (k >> 63)) as u64
}

/// Uniform draw in `[0, 1)` for frequency index `k`, 53-bit resolution.
fn stream_uniform(seed: u64, k: i64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(zigzag(k));
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn random_decay_coeff(exponent: f64, seed: u64, phase: PhaseMode, k: i64) -> Complex64 {
    let modulus = weight(2 * k, -exponent / 2.0);
    match phase {
        PhaseMode::Real => {
            let sign = if stream_uniform(seed, k.abs()) < 0.5 { -1.0 } else { 1.0 };
            Complex64::new(sign * modulus, 0.0)
        }
        PhaseMode::Complex => Complex64::from_polar(modulus, 2.0 * PI * stream_uniform(seed, k)),
    }
}

/// Coefficient `V(2k)` of a closed-form family; `None` for explicit data.
fn family_coeff(spec: &PotentialSpec, k: i64) -> Option<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let value = match spec {
        PotentialSpec::Zero => zero,
        PotentialSpec::Constant { c } => {
            if k == 0 {
                *c
            } else {
                zero
            }
        }
        PotentialSpec::TrigPoly { terms } => terms.iter().filter(|t| t.freq == 2 * k).map(|t| t.amplitude).sum(),
        PotentialSpec::DiracComb { amplitude } => *amplitude,
        PotentialSpec::DiracCombDerivative { order, amplitude } => {
            amplitude * Complex64::new(0.0, 2.0 * k as f64 * PI).powu(*order)
        }
        PotentialSpec::RandomDecay { exponent, seed, phase } => random_decay_coeff(*exponent, *seed, *phase, k),
        PotentialSpec::Explicit { .. } => return None,
    };
    Some(value)
}

pub fn load_explicit(path: &Path) -> Result<CoeffSeq> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read potential file {}: {e}", path.display())))?;
    let seq: CoeffSeq = serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("malformed potential file {}: {e}", path.display())))?;
    check_parity_pure(&seq)?;
    Ok(seq)
}

/// Errors unless every odd physical frequency has a zero coefficient.
pub fn check_parity_pure(v: &CoeffSeq) -> Result<()> {
    let lattice = v.lattice();
    match lattice.parity() {
        Parity::PeriodicPlus => Ok(()),
        Parity::SemiperiodicMinus => Err(Error::Domain(
            "potential on the semiperiodic lattice has odd frequencies".into(),
        )),
        Parity::FullTwoPeriodic => {
            match lattice
                .indices()
                .find(|&k| k % 2 != 0 && v.get(k) != Complex64::new(0.0, 0.0))
            {
                Some(k) => Err(Error::Domain(format!(
                    "potential has a nonzero coefficient at odd frequency {k}"
                ))),
                None => Ok(()),
            }
        }
    }
}

/// The same potential indexed on the periodic lattice.
pub fn as_plus(v: &CoeffSeq) -> Result<CoeffSeq> {
    check_parity_pure(v)?;
    let lattice = v.lattice();
    match lattice.parity() {
        Parity::PeriodicPlus => Ok(v.clone()),
        _ => {
            let plus = FreqLattice::plus((lattice.half_width() / 2).max(1))?;
            Ok(CoeffSeq::from_fn(plus, |k| v.at_phys(2 * k)))
        }
    }
}

/// Coefficients of `spec` on a periodic or full lattice.
pub fn materialize(spec: &PotentialSpec, lattice: FreqLattice) -> Result<CoeffSeq> {
    if lattice.parity() == Parity::SemiperiodicMinus {
        return Err(Error::Domain("potentials live on the plus or full lattice".into()));
    }
    spec.check()?;
    let explicit = match spec {
        PotentialSpec::Explicit { path } => Some(load_explicit(path)?),
        _ => None,
    };
    let coeff_at_phys = |p: i64| -> Complex64 {
        if p % 2 != 0 {
            return Complex64::new(0.0, 0.0);
        }
        match &explicit {
            Some(seq) => seq.at_phys(p),
            None => family_coeff(spec, p / 2).expect("closed-form family"),
        }
    };
    Ok(CoeffSeq::from_fn(lattice, |k| coeff_at_phys(lattice.phys(k))))
}

/// Lower end of the Sobolev membership range: the potential lies in
/// `H^{-s}` exactly for `s > s_star` (or `s >= s_star` when `open` is false).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipThreshold {
    #[serde(with = "wire::ext_real")]
    pub s_star: f64,
    pub open: bool,
    /// True when derived from data rather than a closed-form growth law.
    pub empirical: bool,
}

impl MembershipThreshold {
    fn from_growth(q: f64) -> Self {
        MembershipThreshold {
            s_star: q + 0.5,
            open: true,
            empirical: false,
        }
    }

    fn smooth() -> Self {
        MembershipThreshold {
            s_star: f64::NEG_INFINITY,
            open: true,
            empirical: false,
        }
    }

    pub fn belongs_to_negative(&self, s: f64) -> bool {
        if self.open {
            s > self.s_star
        } else {
            s >= self.s_star
        }
    }

    /// `alpha` with `V in H^{-m alpha}`, clamped to `[0, 1]`.
    pub fn alpha(&self, m: u32) -> f64 {
        if self.s_star == f64::NEG_INFINITY {
            0.0
        } else {
            (self.s_star / m as f64).clamp(0.0, 1.0)
        }
    }
}

/// Coefficients growing like `<2k>^q` belong to `H^{-s}` iff `s > q + 1/2`.
pub fn membership(spec: &PotentialSpec) -> Result<MembershipThreshold> {
    spec.check()?;
    Ok(match spec {
        PotentialSpec::Zero | PotentialSpec::Constant { .. } | PotentialSpec::TrigPoly { .. } => {
            MembershipThreshold::smooth()
        }
        PotentialSpec::DiracComb { amplitude } | PotentialSpec::DiracCombDerivative { amplitude, .. }
            if *amplitude == Complex64::new(0.0, 0.0) =>
        {
            MembershipThreshold::smooth()
        }
        PotentialSpec::DiracComb { .. } => MembershipThreshold::from_growth(0.0),
        PotentialSpec::DiracCombDerivative { order, .. } => MembershipThreshold::from_growth(*order as f64),
        PotentialSpec::RandomDecay { exponent, .. } => MembershipThreshold::from_growth(-exponent),
        PotentialSpec::Explicit { path } => estimate_membership(&load_explicit(path)?)?,
    })
}

/// Least-squares slope of `log|V(2k)|` against `log<2k>` over nonzero
/// coefficients with `k != 0`.
pub fn estimate_membership(v: &CoeffSeq) -> Result<MembershipThreshold> {
    check_parity_pure(v)?;
    let lattice = v.lattice();
    let points: Vec<(f64, f64)> = lattice
        .indices()
        .filter(|&k| lattice.phys(k) != 0)
        .filter_map(|k| {
            let c = v.get(k).norm();
            (c > 0.0).then(|| ((1.0 + lattice.phys(k).unsigned_abs() as f64).ln(), c.ln()))
        })
        .collect();
    let slope = match crate::spectral::fit_line(&points) {
        Some(fit) => fit.slope,
        None => {
            return Ok(MembershipThreshold {
                empirical: true,
                ..MembershipThreshold::smooth()
            })
        }
    };
    Ok(MembershipThreshold {
        s_star: slope + 0.5,
        open: true,
        empirical: true,
    })
}

/// Partial sum `V_n`: keeps indices `|k| <= n`.
pub fn truncate(v: &CoeffSeq, n: usize) -> Result<CoeffSeq> {
    if n > v.half_width() {
        return Err(Error::Domain(format!(
            "truncation level {n} exceeds half-width {}",
            v.half_width()
        )));
    }
    let n = n as i64;
    Ok(CoeffSeq::from_fn(v.lattice(), |k| {
        if k.abs() <= n {
            v.get(k)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub smooth: CoeffSeq,
    pub small: CoeffSeq,
    pub cut: usize,
}

/// `V = V0 + V_delta` with `V0 = V_cut` and the smallest `cut` for which
/// `||V_delta||_{H^{-m}} <= delta / c`.
pub fn split_smooth_small(v: &CoeffSeq, m: u32, delta: f64, c: f64) -> Result<Split> {
    if delta.is_nan() || delta <= 0.0 || c.is_nan() || c <= 0.0 {
        return Err(Error::Domain(format!("need delta > 0 and C > 0, got {delta}, {c}")));
    }
    let bound = delta / c;
    let s = -(m as f64);
    for cut in 0..=v.half_width() {
        let smooth = truncate(v, cut)?;
        let small = v.sub(&smooth)?;
        if hs_norm(&small, s) <= bound {
            return Ok(Split { smooth, small, cut });
        }
    }
    unreachable!("the empty tail always satisfies the bound")
}

/// `max_k |V(2k) - conj(V(-2k))| <= tol`.
pub fn is_real_valued(v: &CoeffSeq, tol: f64) -> bool {
    hermitian_defect(v) <= tol
}

pub fn hermitian_defect(v: &CoeffSeq) -> f64 {
    v.lattice()
        .indices()
        .map(|k| (v.get(k) - v.get(-k).conj()).norm())
        .fold(0.0, f64::max)
}

/// The standard family used by the verification suites: smooth, singular,
/// more singular, and seeded random potentials of both phase kinds.
pub fn canonical_set() -> Vec<(String, PotentialSpec)> {
    let one = Complex64::new(1.0, 0.0);
    let mut set = vec![
        ("trig_poly".to_string(), PotentialSpec::trig(&[(2, one), (-2, one)])),
        ("dirac_comb".to_string(), PotentialSpec::comb(1.0)),
        (
            "dirac_comb_derivative".to_string(),
            PotentialSpec::DiracCombDerivative {
                order: 1,
                amplitude: one,
            },
        ),
    ];
    for exponent in [0.75, 1.0] {
        for seed in 1..=5u64 {
            for phase in [PhaseMode::Real, PhaseMode::Complex] {
                let tag = match phase {
                    PhaseMode::Real => "real",
                    PhaseMode::Complex => "complex",
                };
                set.push((
                    format!("random_decay_p{exponent}_s{seed}_{tag}"),
                    PotentialSpec::RandomDecay { exponent, seed, phase },
                ));
            }
        }
    }
    set
}
