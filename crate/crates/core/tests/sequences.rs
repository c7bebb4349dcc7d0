mod common;

use common::*;
use hillspec::seqspace::{convolve, embed_full, hs_norm, pairing, restrict_parity, CoeffSeq, FreqLattice, Parity};
use num_complex::Complex64;
use proptest::prelude::*;

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![
        Just(Parity::PeriodicPlus),
        Just(Parity::SemiperiodicMinus),
        Just(Parity::FullTwoPeriodic)
    ]
}

fn seq_on(parity: Parity, n: usize) -> impl Strategy<Value = CoeffSeq> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2 * n + 1).prop_map(move |v| {
        let lattice = FreqLattice::new(parity, n).unwrap();
        CoeffSeq::new(lattice, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (CoeffSeq, CoeffSeq)> {
    (1usize..=8, parity(), parity())
        .prop_filter("minus and full do not mix", |(_, a, b)| {
            !matches!(
                (a, b),
                (Parity::SemiperiodicMinus, Parity::FullTwoPeriodic)
                    | (Parity::FullTwoPeriodic, Parity::SemiperiodicMinus)
            )
        })
        .prop_flat_map(|(n, pa, pb)| (seq_on(pa, n), seq_on(pb, n)))
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

proptest! {
    #[test]
    fn convolution_matches_double_loop((a, b) in pair()) {
        let got = convolve(&a, &b).unwrap();
        let expected = convolve_oracle(&a, &b, got.lattice());
        prop_assert!(close(got.coeffs(), &expected, 1e-12));
    }

    #[test]
    fn convolution_commutes((a, b) in pair()) {
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        prop_assert_eq!(ab.lattice(), ba.lattice());
        prop_assert!(close(ab.coeffs(), ba.coeffs(), 1e-12));
    }

    #[test]
    fn convolution_is_bilinear((a, b) in pair(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let z = Complex64::new(re, im);
        let scaled = CoeffSeq::from_fn(a.lattice(), |k| a.get(k) * z);
        let lhs = convolve(&scaled, &b).unwrap();
        let rhs: Vec<Complex64> = convolve(&a, &b).unwrap().coeffs().iter().map(|c| c * z).collect();
        prop_assert!(close(lhs.coeffs(), &rhs, 1e-11));
    }

    #[test]
    fn sobolev_norm_is_monotone_in_s(a in (1usize..=10, parity()).prop_flat_map(|(n, p)| seq_on(p, n)),
                                     s in -3.0..3.0f64, ds in 0.0..2.0f64) {
        prop_assert!(hs_norm(&a, s) <= hs_norm(&a, s + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn embedding_is_isometric(a in (1usize..=10, prop_oneof![Just(Parity::PeriodicPlus), Just(Parity::SemiperiodicMinus)])
                                  .prop_flat_map(|(n, p)| seq_on(p, n)),
                              s in -3.0..3.0f64) {
        let g = embed_full(&a).unwrap();
        prop_assert_eq!(hs_norm(&g, s), hs_norm(&a, s));
        let back = restrict_parity(&g, a.lattice().parity(), a.half_width()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn pairing_is_hermitian(a in seq_on(Parity::FullTwoPeriodic, 6), b in seq_on(Parity::FullTwoPeriodic, 6)) {
        let ab = pairing(&a, &b).unwrap();
        let ba = pairing(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12);
        prop_assert!((pairing(&a, &a).unwrap().re - a.l2_norm().powi(2)).abs() <= 1e-12);
    }

    #[test]
    fn json_roundtrip_is_exact(a in (1usize..=6, parity()).prop_flat_map(|(n, p)| seq_on(p, n))) {
        let text = serde_json::to_string(&a).unwrap();
        let back: CoeffSeq = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(bits(back.coeffs()), bits(a.coeffs()));
    }
}

#[test]
fn mixing_minus_with_full_is_rejected() {
    let a = CoeffSeq::zeros(FreqLattice::minus(2).unwrap());
    let b = CoeffSeq::zeros(FreqLattice::full(2).unwrap());
    assert!(convolve(&a, &b).is_err());
    let c = CoeffSeq::zeros(FreqLattice::full(3).unwrap());
    assert!(convolve(&b, &c).is_err());
}
