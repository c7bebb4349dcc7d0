//! Weighted two-sided sequence spaces over the three frequency lattices.
//!
//! A [`CoeffSeq`] stores the Fourier coefficients of a function or
//! distribution on a symmetric index window `{-N, ..., N}`. The index `k`
//! maps to a *physical* frequency that depends on the lattice:
//!
//! | lattice             | physical frequency | basis               |
//! |---------------------|--------------------|---------------------|
//! | `PeriodicPlus`      | `2k`               | `e^{i 2k pi x}`     |
//! | `SemiperiodicMinus` | `2k + 1`           | `e^{i (2k+1) pi x}` |
//! | `FullTwoPeriodic`   | `k`                | `e^{i k pi x}`      |
//!
//! Sobolev weights always use the physical frequency, `<n> = 1 + |n|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "plus")]
    PeriodicPlus,
    #[serde(rename = "minus")]
    SemiperiodicMinus,
    #[serde(rename = "full")]
    FullTwoPeriodic,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::PeriodicPlus => "plus",
            Parity::SemiperiodicMinus => "minus",
            Parity::FullTwoPeriodic => "full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FreqLattice {
    parity: Parity,
    half_width: usize,
}

impl FreqLattice {
    pub fn new(parity: Parity, half_width: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::Domain("lattice half-width must be positive".into()));
        }
        Ok(FreqLattice { parity, half_width })
    }

    pub fn plus(half_width: usize) -> Result<Self> {
        Self::new(Parity::PeriodicPlus, half_width)
    }

    pub fn minus(half_width: usize) -> Result<Self> {
        Self::new(Parity::SemiperiodicMinus, half_width)
    }

    pub fn full(half_width: usize) -> Result<Self> {
        Self::new(Parity::FullTwoPeriodic, half_width)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn with_half_width(&self, half_width: usize) -> Result<Self> {
        Self::new(self.parity, half_width)
    }

    /// Number of indices, `2N + 1`.
    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let n = self.half_width as i64;
        -n..=n
    }

    pub fn contains(&self, k: i64) -> bool {
        k.unsigned_abs() as usize <= self.half_width
    }

    /// Storage position of index `k`. Caller guarantees `contains(k)`.
    pub fn slot(&self, k: i64) -> usize {
        (k + self.half_width as i64) as usize
    }

    pub fn index_at(&self, slot: usize) -> i64 {
        slot as i64 - self.half_width as i64
    }

    pub fn phys(&self, k: i64) -> i64 {
        match self.parity {
            Parity::PeriodicPlus => 2 * k,
            Parity::SemiperiodicMinus => 2 * k + 1,
            Parity::FullTwoPeriodic => k,
        }
    }

    /// Inverse of [`phys`](Self::phys); `None` if the frequency has the wrong
    /// parity for this lattice or lies outside the window.
    pub fn index_of_phys(&self, p: i64) -> Option<i64> {
        let k = match self.parity {
            Parity::PeriodicPlus if p.rem_euclid(2) == 0 => p.div_euclid(2),
            Parity::SemiperiodicMinus if p.rem_euclid(2) == 1 => p.div_euclid(2),
            Parity::FullTwoPeriodic => p,
            _ => return None,
        };
        self.contains(k).then_some(k)
    }

    /// Physical frequencies in slot order.
    pub fn phys_list(&self) -> Vec<i64> {
        self.indices().map(|k| self.phys(k)).collect()
    }
}

/// `<n>^{2s}` with `<n> = 1 + |n|`.
pub fn weight(phys: i64, s: f64) -> f64 {
    (1.0 + phys.unsigned_abs() as f64).powf(2.0 * s)
}

/// A finite window of Fourier coefficients; entries outside the window are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    lattice: FreqLattice,
    coeffs: Vec<Complex64>,
}

impl CoeffSeq {
    pub fn new(lattice: FreqLattice, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.dim() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for half-width {}, got {}",
                lattice.dim(),
                lattice.half_width(),
                coeffs.len()
            )));
        }
        Ok(CoeffSeq { lattice, coeffs })
    }

    pub fn zeros(lattice: FreqLattice) -> Self {
        CoeffSeq {
            lattice,
            coeffs: vec![ZERO; lattice.dim()],
        }
    }

    pub fn unit(lattice: FreqLattice, k: i64) -> Result<Self> {
        let mut a = Self::zeros(lattice);
        a.set(k, Complex64::new(1.0, 0.0))?;
        Ok(a)
    }

    pub fn from_fn(lattice: FreqLattice, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let coeffs = lattice.indices().map(&mut f).collect();
        CoeffSeq { lattice, coeffs }
    }

    pub fn lattice(&self) -> FreqLattice {
        self.lattice
    }

    pub fn half_width(&self) -> usize {
        self.lattice.half_width()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn get(&self, k: i64) -> Complex64 {
        if self.lattice.contains(k) {
            self.coeffs[self.lattice.slot(k)]
        } else {
            ZERO
        }
    }

    pub fn set(&mut self, k: i64, value: Complex64) -> Result<()> {
        if !self.lattice.contains(k) {
            return Err(Error::Domain(format!(
                "index {k} outside window of half-width {}",
                self.half_width()
            )));
        }
        let slot = self.lattice.slot(k);
        self.coeffs[slot] = value;
        Ok(())
    }

    /// Coefficient at physical frequency `p`, zero when `p` is not on the lattice.
    pub fn at_phys(&self, p: i64) -> Complex64 {
        match self.lattice.index_of_phys(p) {
            Some(k) => self.get(k),
            None => ZERO,
        }
    }

    /// Same lattice, new window: pads with zeros or drops outer entries.
    pub fn resized(&self, half_width: usize) -> Result<Self> {
        let lattice = self.lattice.with_half_width(half_width)?;
        Ok(CoeffSeq::from_fn(lattice, |k| self.get(k)))
    }

    pub fn hs_norm(&self, s: f64) -> f64 {
        hs_norm(self, s)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CoeffSeq) -> f64 {
        let n = self.half_width().max(other.half_width()) as i64;
        (-n..=n)
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Coefficientwise sum; both operands must share the lattice.
    pub fn add(&self, other: &CoeffSeq) -> Result<CoeffSeq> {
        if self.lattice != other.lattice {
            return Err(Error::Dimension("cannot add sequences on different lattices".into()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CoeffSeq {
            lattice: self.lattice,
            coeffs,
        })
    }

    pub fn sub(&self, other: &CoeffSeq) -> Result<CoeffSeq> {
        if self.lattice != other.lattice {
            return Err(Error::Dimension(
                "cannot subtract sequences on different lattices".into(),
            ));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(CoeffSeq {
            lattice: self.lattice,
            coeffs,
        })
    }

    pub fn to_json(&self) -> CoeffSeqJson {
        CoeffSeqJson {
            parity: self.lattice.parity(),
            half_width: self.half_width(),
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: self.coeffs.iter().map(|c| c.im).collect(),
        }
    }

    pub fn from_json(wire: &CoeffSeqJson) -> Result<Self> {
        if wire.re.len() != wire.im.len() {
            return Err(Error::Input(format!(
                "re has {} entries but im has {}",
                wire.re.len(),
                wire.im.len()
            )));
        }
        let lattice = FreqLattice::new(wire.parity, wire.half_width)?;
        let coeffs = wire
            .re
            .iter()
            .zip(&wire.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        CoeffSeq::new(lattice, coeffs)
    }
}

/// Wire form: arrays ordered `k = -N ..= N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeqJson {
    pub parity: Parity,
    pub half_width: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Serialize for CoeffSeq {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoeffSeq {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = CoeffSeqJson::deserialize(deserializer)?;
        CoeffSeq::from_json(&wire).map_err(serde::de::Error::custom)
    }
}

/// `( sum_k <phys(k)>^{2s} |a(k)|^2 )^{1/2}`.
pub fn hs_norm(a: &CoeffSeq, s: f64) -> f64 {
    let lattice = a.lattice();
    lattice
        .indices()
        .zip(a.coeffs())
        .map(|(k, c)| weight(lattice.phys(k), s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Result lattice of a product under the frequency group rule
/// (`even * even = even`, `even * odd = odd`, `odd * odd = even`).
/// A periodic sequence may also act on a full-lattice one.
fn product_parity(a: Parity, b: Parity) -> Result<Parity> {
    use Parity::*;
    match (a, b) {
        (FullTwoPeriodic, FullTwoPeriodic) => Ok(FullTwoPeriodic),
        (PeriodicPlus, PeriodicPlus) | (SemiperiodicMinus, SemiperiodicMinus) => Ok(PeriodicPlus),
        (PeriodicPlus, SemiperiodicMinus) | (SemiperiodicMinus, PeriodicPlus) => Ok(SemiperiodicMinus),
        (PeriodicPlus, FullTwoPeriodic) | (FullTwoPeriodic, PeriodicPlus) => Ok(FullTwoPeriodic),
        _ => Err(Error::Dimension(format!(
            "cannot convolve a {} sequence with a {} sequence",
            a.as_str(),
            b.as_str()
        ))),
    }
}

/// Truncated convolution `(a * b)(k) = sum_j a(k - j) b(j)` in physical
/// frequency; products landing outside the window are dropped.
pub fn convolve(a: &CoeffSeq, b: &CoeffSeq) -> Result<CoeffSeq> {
    if a.half_width() != b.half_width() {
        return Err(Error::Dimension(format!(
            "convolution windows differ: {} vs {}",
            a.half_width(),
            b.half_width()
        )));
    }
    let (la, lb) = (a.lattice(), b.lattice());
    let out = FreqLattice::new(product_parity(la.parity(), lb.parity())?, a.half_width())?;
    let mut acc = vec![ZERO; out.dim()];
    for (ka, ca) in la.indices().zip(a.coeffs()) {
        if *ca == ZERO {
            continue;
        }
        let pa = la.phys(ka);
        for (kb, cb) in lb.indices().zip(b.coeffs()) {
            if let Some(k) = out.index_of_phys(pa + lb.phys(kb)) {
                acc[out.slot(k)] += ca * cb;
            }
        }
    }
    CoeffSeq::new(out, acc)
}

/// `sum_k a(k) conj(b(k))`, the L2 pairing extended to dual Sobolev spaces.
pub fn pairing(a: &CoeffSeq, b: &CoeffSeq) -> Result<Complex64> {
    if a.lattice().parity() != b.lattice().parity() {
        return Err(Error::Dimension("pairing requires a common lattice parity".into()));
    }
    let n = a.half_width().min(b.half_width()) as i64;
    Ok((-n..=n).map(|k| a.get(k) * b.get(k).conj()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvCheck {
    pub s: f64,
    pub r: f64,
    pub t: f64,
    pub verdict: Verdict,
}

impl ConvCheck {
    pub fn licensed(&self) -> bool {
        self.verdict == Verdict::Valid
    }
}

/// Continuity gate for `h^r x h^s -> h^t`: valid iff `s + r - t > 1/2`.
/// The boundary `s + r - t = 1/2` is reported as `Critical` and is not licensed.
pub fn conv_gate(s: f64, r: f64, t: f64) -> Result<ConvCheck> {
    if !(s.is_finite() && r.is_finite() && t.is_finite()) {
        return Err(Error::Domain("convolution gate needs finite exponents".into()));
    }
    if s < 0.0 || r < 0.0 {
        return Err(Error::Domain(format!("need s, r >= 0, got s = {s}, r = {r}")));
    }
    if t > s.min(r) {
        return Err(Error::Domain(format!("need t <= min(s, r), got t = {t}")));
    }
    let excess = s + r - t;
    let verdict = if excess > 0.5 {
        Verdict::Valid
    } else if excess < 0.5 {
        Verdict::Invalid
    } else {
        Verdict::Critical
    };
    Ok(ConvCheck { s, r, t, verdict })
}

/// Extension of a periodic or semiperiodic sequence to the 2-periodic lattice.
/// The output window `2N + 1` holds every physical frequency of the input.
pub fn embed_full(f: &CoeffSeq) -> Result<CoeffSeq> {
    let lattice = f.lattice();
    if lattice.parity() == Parity::FullTwoPeriodic {
        return Err(Error::Domain("input is already on the full lattice".into()));
    }
    let out = FreqLattice::full(2 * lattice.half_width() + 1)?;
    let mut g = CoeffSeq::zeros(out);
    for (k, c) in lattice.indices().zip(f.coeffs()) {
        g.set(lattice.phys(k), *c)?;
    }
    Ok(g)
}

/// Half of the full-lattice sequence that lives on the given parity.
pub fn restrict_parity(g: &CoeffSeq, parity: Parity, half_width: usize) -> Result<CoeffSeq> {
    if g.lattice().parity() != Parity::FullTwoPeriodic {
        return Err(Error::Domain("restriction needs a full-lattice sequence".into()));
    }
    if parity == Parity::FullTwoPeriodic {
        return Err(Error::Domain("restriction target must be plus or minus".into()));
    }
    let lattice = FreqLattice::new(parity, half_width)?;
    Ok(CoeffSeq::from_fn(lattice, |k| g.get(lattice.phys(k))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_norm_is_one() {
        let a = CoeffSeq::unit(FreqLattice::plus(3).unwrap(), 0).unwrap();
        for s in [-3.0, -0.5, 0.0, 1.0, 4.0] {
            assert_eq!(hs_norm(&a, s), 1.0);
        }
    }

    #[test]
    fn pair_at_plus_minus_one() {
        let mut a = CoeffSeq::zeros(FreqLattice::plus(2).unwrap());
        a.set(1, c(1.0, 0.0)).unwrap();
        a.set(-1, c(1.0, 0.0)).unwrap();
        assert!((hs_norm(&a, 1.0) - 18f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn all_ones_negative_index() {
        let lattice = FreqLattice::plus(8).unwrap();
        let a = CoeffSeq::from_fn(lattice, |_| c(1.0, 0.0));
        // 17 terms of (1 + |2k|)^{-2}
        let mut expected = 0.0;
        for k in -8i64..=8 {
            let w = 1.0 + (2 * k).abs() as f64;
            expected += 1.0 / (w * w);
        }
        assert!((hs_norm(&a, -1.0) - expected.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn convolution_identity_and_shift() {
        let lattice = FreqLattice::plus(4).unwrap();
        let b = CoeffSeq::from_fn(lattice, |k| c(k as f64, 1.0 - k as f64));
        let e0 = CoeffSeq::unit(lattice, 0).unwrap();
        assert_eq!(convolve(&e0, &b).unwrap(), b);
        let e1 = CoeffSeq::unit(lattice, 1).unwrap();
        assert_eq!(convolve(&e1, &e1).unwrap(), CoeffSeq::unit(lattice, 2).unwrap());
    }

    #[test]
    fn convolution_parity_rule() {
        let even = CoeffSeq::unit(FreqLattice::plus(3).unwrap(), 1).unwrap();
        let odd = CoeffSeq::unit(FreqLattice::minus(3).unwrap(), 0).unwrap();
        let p = convolve(&even, &odd).unwrap();
        assert_eq!(p.lattice().parity(), Parity::SemiperiodicMinus);
        // phys 2 + 1 = 3 -> index 1
        assert_eq!(p.get(1), c(1.0, 0.0));
        let q = convolve(&odd, &odd).unwrap();
        assert_eq!(q.lattice().parity(), Parity::PeriodicPlus);
        assert_eq!(q.get(1), c(1.0, 0.0));
    }

    #[test]
    fn convolution_rejects_mismatched_windows() {
        let a = CoeffSeq::zeros(FreqLattice::plus(3).unwrap());
        let b = CoeffSeq::zeros(FreqLattice::plus(4).unwrap());
        assert!(matches!(convolve(&a, &b), Err(Error::Dimension(_))));
        let f = CoeffSeq::zeros(FreqLattice::full(3).unwrap());
        let odd = CoeffSeq::zeros(FreqLattice::minus(3).unwrap());
        assert!(matches!(convolve(&odd, &f), Err(Error::Dimension(_))));
        assert_eq!(convolve(&a, &f).unwrap().lattice().parity(), Parity::FullTwoPeriodic);
    }

    #[test]
    fn gate_verdicts() {
        assert_eq!(conv_gate(1.0, 1.0, 1.0).unwrap().verdict, Verdict::Valid);
        assert_eq!(conv_gate(0.0, 0.0, 0.0).unwrap().verdict, Verdict::Invalid);
        assert_eq!(conv_gate(0.25, 0.25, 0.0).unwrap().verdict, Verdict::Critical);
        assert!(!conv_gate(0.25, 0.25, 0.0).unwrap().licensed());
        for m in 1..6 {
            let m = m as f64;
            assert!(conv_gate(m, m, m).unwrap().licensed());
        }
    }

    #[test]
    fn gate_preconditions() {
        assert!(conv_gate(1.0, 1.0, 1.5).is_err());
        assert!(conv_gate(-0.1, 1.0, -1.0).is_err());
        assert!(conv_gate(1.0, -2.0, -3.0).is_err());
    }

    #[test]
    fn embed_units() {
        let plus = CoeffSeq::unit(FreqLattice::plus(2).unwrap(), 0).unwrap();
        let g = embed_full(&plus).unwrap();
        assert_eq!(g.half_width(), 5);
        assert_eq!(g.get(0), c(1.0, 0.0));
        let minus = CoeffSeq::unit(FreqLattice::minus(2).unwrap(), 0).unwrap();
        let g = embed_full(&minus).unwrap();
        assert_eq!(g.get(1), c(1.0, 0.0));
        assert_eq!(g.l2_norm(), 1.0);
    }

    #[test]
    fn restrict_inverts_embed() {
        let lattice = FreqLattice::minus(3).unwrap();
        let f = CoeffSeq::from_fn(lattice, |k| c(k as f64, 2.0));
        let g = embed_full(&f).unwrap();
        assert_eq!(restrict_parity(&g, Parity::SemiperiodicMinus, 3).unwrap(), f);
    }

    #[test]
    fn json_shape() {
        let a = CoeffSeq::from_fn(FreqLattice::minus(1).unwrap(), |k| c(k as f64, -(k as f64)));
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(
            text,
            r#"{"parity":"minus","half_width":1,"re":[-1.0,0.0,1.0],"im":[1.0,-0.0,-1.0]}"#
        );
        let back: CoeffSeq = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<CoeffSeq>(r#"{"parity":"plus","half_width":1,"re":[1.0],"im":[0.0]}"#).is_err());
    }

    #[test]
    fn index_of_phys_roundtrip() {
        for parity in [Parity::PeriodicPlus, Parity::SemiperiodicMinus, Parity::FullTwoPeriodic] {
            let lattice = FreqLattice::new(parity, 5).unwrap();
            for k in lattice.indices() {
                assert_eq!(lattice.index_of_phys(lattice.phys(k)), Some(k));
            }
        }
        let plus = FreqLattice::plus(5).unwrap();
        assert_eq!(plus.index_of_phys(3), None);
        assert_eq!(plus.index_of_phys(12), None);
    }
}
