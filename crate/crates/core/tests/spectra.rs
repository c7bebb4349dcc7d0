mod common;

use std::f64::consts::PI;

use common::*;
use hillspec::assembly::{assemble, assemble_spec, CMatrix, OperatorKind};
use hillspec::potentials::{canonical_set, materialize, PhaseMode, PotentialSpec};
use hillspec::seqspace::{CoeffSeq, FreqLattice};
use hillspec::spectral::{
    convergence_study, decomposition_check, eigen, estimate_conv_constant, matching_distance, numerical_range,
    resolvent_norm, sector_fit, DEFAULT_PROBE,
};
use num_complex::Complex64;
use proptest::prelude::*;

const KINDS: [OperatorKind; 3] = [OperatorKind::SPlus, OperatorKind::SMinus, OperatorKind::SFull];

/// Ground energy of `-u'' + sum_n delta(x - n)` with periodic conditions:
/// the smallest root `E = q^2` of `cos q + sin q / (2q) = 1`.
fn kronig_penney_ground() -> f64 {
    let f = |q: f64| q.cos() + q.sin() / (2.0 * q) - 1.0;
    let (mut lo, mut hi) = (0.1, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo * lo
}

#[test]
fn comb_ground_state_converges_at_first_order() {
    let exact = kronig_penney_ground();
    let mut previous = f64::INFINITY;
    for n in [32, 64, 128, 256] {
        let rep = eigen(&assemble_spec(OperatorKind::SPlus, 1, &PotentialSpec::comb(1.0), n).unwrap()).unwrap();
        let ground = rep.eigenvalues[0].re;
        let err = ground - exact;
        assert!(err > 0.0, "Galerkin eigenvalue is an upper bound");
        assert!(ground < previous);
        assert!(
            (0.04..0.045).contains(&(err * n as f64)),
            "N = {n}: N * err = {}",
            err * n as f64
        );
        previous = ground;
    }
}

#[test]
fn shift_moves_the_spectrum() {
    let shift = c(2.5, -1.0);
    for (name, spec) in canonical_set().into_iter().step_by(4) {
        for kind in KINDS {
            let v = materialize(&spec, kind.coverage(12).unwrap()).unwrap();
            let mut w = v.clone();
            w.set(0, v.get(0) + shift).unwrap();
            let a = assemble(kind, 1, &v, 12).unwrap();
            let b = assemble(kind, 1, &w, 12).unwrap();
            for j in 0..a.dim() {
                for k in 0..a.dim() {
                    if j == k {
                        let want = a.entries()[(j, j)] + shift;
                        assert!(
                            (b.entries()[(j, j)] - want).norm() <= 4.0 * f64::EPSILON * want.norm(),
                            "{name}"
                        );
                    } else {
                        assert_eq!(b.entries()[(j, k)], a.entries()[(j, k)], "{name}");
                    }
                }
            }
            let ea = eigen(&a).unwrap();
            let eb = eigen(&b).unwrap();
            let moved: Vec<Complex64> = ea.eigenvalues.iter().map(|z| z + shift).collect();
            assert!(matching_distance(&moved, &eb.eigenvalues) <= 1e-10 * eb.norm, "{name}");
        }
    }
}

#[test]
fn eigenvalues_lie_in_numerical_range() {
    let spec = PotentialSpec::trig(&[(2, c(0.0, 1.0))]);
    let a = assemble_spec(OperatorKind::SPlus, 1, &spec, 16).unwrap();
    let rep = eigen(&a).unwrap();
    let range = numerical_range(a.entries(), 64).unwrap();
    for z in &rep.eigenvalues {
        assert!(range.contains(*z, 1e-8 * rep.norm), "{z}");
    }
    let hull = range.hull();
    assert!(hull.len() >= 3);
    for p in &hull {
        assert!(range.contains(*p, 1e-8 * rep.norm));
    }
}

#[test]
fn comb_spectrum_fits_narrow_sector() {
    let a = assemble_spec(OperatorKind::SPlus, 1, &PotentialSpec::comb(1.0), 32).unwrap();
    let range = numerical_range(a.entries(), 64).unwrap();
    let fit = sector_fit(&range.points(), PI / 8.0).unwrap();
    assert!(fit.gamma.is_finite() && fit.satisfied);
    let rep = eigen(&a).unwrap();
    assert!(rep.eigenvalues.iter().all(|z| fit.contains(*z, 1e-8 * rep.norm)));
}

#[test]
fn decomposition_examples() {
    let cover = |spec: &PotentialSpec, n: usize| materialize(spec, FreqLattice::plus(2 * n + 1).unwrap()).unwrap();
    let constant = PotentialSpec::Constant { c: c(1.0, 0.0) };
    let rep = decomposition_check(&cover(&constant, 8), 1, 8, 0.0).unwrap();
    assert_eq!(rep.distance, 0.0);
    assert!(rep.pass);
    for phase in [PhaseMode::Real, PhaseMode::Complex] {
        let spec = PotentialSpec::RandomDecay {
            exponent: 1.0,
            seed: 3,
            phase,
        };
        let rep = decomposition_check(&cover(&spec, 24), 1, 24, 1e-8).unwrap();
        assert!(rep.pass, "distance {} vs norm {}", rep.distance, rep.norm);
    }
}

#[test]
fn residual_contract_holds() {
    for (name, spec) in canonical_set().into_iter().step_by(3) {
        for kind in KINDS {
            let rep = eigen(&assemble_spec(kind, 1, &spec, 48).unwrap()).unwrap();
            assert!(rep.residual <= 1e-10, "{name}/{}: {}", kind.as_str(), rep.residual);
            assert_eq!(rep.eigenvalues.len(), 97);
        }
    }
}

#[test]
fn conv_constant_witnesses() {
    let lattice = FreqLattice::plus(16).unwrap();
    let est = estimate_conv_constant(1, lattice, 1000, 1).unwrap();
    assert_eq!(est.witness_ratio, 1.0);
    assert!(est.value >= est.witness_ratio);
    assert_eq!(est.value, estimate_conv_constant(1, lattice, 1000, 1).unwrap().value);
    let fewer = estimate_conv_constant(1, lattice, 100, 1).unwrap();
    assert!(fewer.value <= est.value);

    // W = u = unit at index 1: ||W * u||_{-1} = <4>^{-1}, ||W||_{-1} = <2>^{-1}, ||u||_1 = <2>.
    let w = CoeffSeq::unit(lattice, 1).unwrap();
    let conv = hillspec::seqspace::convolve(&w, &w).unwrap();
    let ratio = hillspec::seqspace::hs_norm(&conv, -1.0)
        / (hillspec::seqspace::hs_norm(&w, -1.0) * hillspec::seqspace::hs_norm(&w, 1.0));
    assert!((ratio - 0.2).abs() < 1e-15);
}

#[test]
fn resolvent_examples_against_jacobi() {
    let mut a = CMatrix::zeros(2, 2);
    a[(0, 1)] = c(10.0, 0.0);
    a[(1, 1)] = c(1.0, 0.0);
    let got = resolvent_norm(&a, c(-1.0, 0.0)).unwrap();
    let expected = resolvent_norm_oracle(&a, c(-1.0, 0.0));
    assert!((got - expected).abs() <= 1e-12 * expected);
    assert!(got > 1.0);
    let free = assemble_spec(OperatorKind::SPlus, 1, &PotentialSpec::Zero, 3).unwrap();
    assert!((resolvent_norm(free.entries(), c(-1.0, 0.0)).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn smooth_truncation_is_exact_past_support() {
    let spec = PotentialSpec::trig(&[(4, c(1.0, 0.5)), (-4, c(1.0, -0.5)), (2, c(0.0, 1.0))]);
    let v = materialize(&spec, FreqLattice::plus(32).unwrap()).unwrap();
    for kind in KINDS {
        let t = convergence_study(&v, 1, kind, &[1, 2, 3, 16, 32], 32, DEFAULT_PROBE, 5).unwrap();
        assert!(t.rows[0].dist > 0.0 && t.rows[0].gap.unwrap() > 0.0);
        for row in &t.rows[1..] {
            assert_eq!((row.dist, row.gap, row.specdist), (0.0, Some(0.0), Some(0.0)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_potentials_have_real_spectra(seed in 0u64..1000, exponent in 0.5..1.5f64, kind in 0usize..3) {
        let kind = KINDS[kind];
        let spec = PotentialSpec::RandomDecay { exponent, seed, phase: PhaseMode::Real };
        let rep = eigen(&assemble_spec(kind, 1, &spec, 16).unwrap()).unwrap();
        prop_assert!(rep.max_abs_imag() <= 1e-9 * rep.norm);
    }

    #[test]
    fn spectra_are_lex_ordered(seed in 0u64..1000, kind in 0usize..3) {
        let spec = PotentialSpec::RandomDecay { exponent: 0.75, seed, phase: PhaseMode::Complex };
        let rep = eigen(&assemble_spec(KINDS[kind], 1, &spec, 10).unwrap()).unwrap();
        prop_assert_eq!(bits(&insertion_sort(&rep.eigenvalues)), bits(&rep.eigenvalues));
    }

    #[test]
    fn resolvent_norm_matches_jacobi(seed in 0u64..10_000, dim in 1usize..12) {
        let mut r = rng(seed);
        let a = CMatrix::from_fn(dim, dim, |_, _| random_complex(&mut r));
        let lambda = random_complex(&mut r) * 2.0;
        let got = resolvent_norm(&a, lambda).unwrap();
        let expected = resolvent_norm_oracle(&a, lambda);
        prop_assert!((got - expected).abs() <= 1e-10 * expected);
    }
}
