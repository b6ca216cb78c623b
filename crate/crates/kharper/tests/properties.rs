//! Randomized invariant checks over the whole circuit layer: every
//! stepper is norm-preserving, transforms invert cleanly, diagonal
//! gates commute, phase-space densities stay sane, the classical map
//! preserves area, and seeded sampling is reproducible.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use kharper::chebyshev::{chebyshev_coefficients, ChebyshevStep};
use kharper::classical::{gaussian_cloud, jacobian_det, ClassicalPoint};
use kharper::harper::{ExactStep, HarperParams};
use kharper::noise::sample_disorder;
use kharper::observables::{husimi, ipr, momentum_distribution};
use kharper::slices::{SliceConfig, SliceStep};
use kharper::{apply_gate, apply_qft, apply_qft_fast, Gate, QuantumState};

fn random_state(n_q: usize, seed: u64) -> QuantumState {
    let mut rng = StdRng::seed_from_u64(seed);
    let amps: Vec<Complex64> = (0..1usize << n_q)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let mut s = QuantumState::from_amplitudes(n_q, amps).unwrap();
    s.normalize();
    s
}

fn norm_params() -> impl Strategy<Value = (f64, f64, usize, f64, u64)> {
    (
        0.01f64..10.0,
        0.01f64..10.0,
        4usize..7,
        0.05f64..0.45,
        any::<u64>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_step_preserves_norm((k, l, n_r, frac, seed) in norm_params()) {
        let params = HarperParams::cylinder(k, l, n_r, frac).unwrap();
        let stepper = ExactStep::new(params);
        let mut s = random_state(n_r, seed);
        for _ in 0..5 {
            stepper.step(&mut s);
        }
        prop_assert!((s.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn slice_step_preserves_norm(
        (k, l, n_r, frac, seed) in norm_params(),
        n_s in 1usize..6,
        symmetrized in any::<bool>(),
    ) {
        let params = HarperParams::cylinder(k, l, n_r, frac).unwrap();
        let stepper = SliceStep::new(params, SliceConfig { n_s, symmetrized }).unwrap();
        // slice circuits carry one ancilla above the register
        let mut s = random_state(n_r + 1, seed);
        for _ in 0..3 {
            stepper.step(&mut s).unwrap();
        }
        prop_assert!((s.norm_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_step_preserves_norm(
        (k, l, n_r, frac, seed) in norm_params(),
        degree in 2usize..8,
    ) {
        let params = HarperParams::cylinder(k, l, n_r, frac).unwrap();
        let approx = chebyshev_coefficients(64, degree);
        let stepper = ChebyshevStep::new(params, approx, 0.0).unwrap();
        let mut s = random_state(n_r, seed);
        for _ in 0..3 {
            stepper.step(&mut s);
        }
        prop_assert!((s.norm_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn qft_round_trip_is_identity(n_q in 2usize..9, seed in any::<u64>()) {
        let s0 = random_state(n_q, seed);
        let mut s = s0.clone();
        apply_qft_fast(&mut s, 0, n_q, false);
        apply_qft_fast(&mut s, 0, n_q, true);
        let f = s.fidelity(&s0).unwrap();
        prop_assert!((f - 1.0).abs() < 1e-10, "fidelity {f}");
    }

    #[test]
    fn gate_qft_matches_fast_path(n_q in 2usize..7, seed in any::<u64>()) {
        let mut a = random_state(n_q, seed);
        let mut b = a.clone();
        apply_qft(&mut a, 0, n_q, false).unwrap();
        apply_qft_fast(&mut b, 0, n_q, false);
        let f = a.fidelity(&b).unwrap();
        prop_assert!((f - 1.0).abs() < 1e-10, "fidelity {f}");
    }

    #[test]
    fn diagonal_gates_commute(n_q in 2usize..6, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dim = 1usize << n_q;
        let pick = |rng: &mut StdRng| -> Gate {
            match rng.gen_range(0..3) {
                0 => Gate::ZRotation(rng.gen_range(0..n_q), rng.gen_range(-3.0..3.0)),
                1 => Gate::PhaseOnMask {
                    mask: rng.gen_range(1..1u64 << n_q),
                    phase: rng.gen_range(-3.0..3.0),
                },
                _ => Gate::Diagonal {
                    lo: 0,
                    len: n_q,
                    phases: Arc::new((0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect()),
                    cost: 1,
                },
            }
        };
        let g1 = pick(&mut rng);
        let g2 = pick(&mut rng);
        let s0 = random_state(n_q, seed.wrapping_add(1));
        let mut a = s0.clone();
        let mut b = s0;
        apply_gate(&mut a, &g1).unwrap();
        apply_gate(&mut a, &g2).unwrap();
        apply_gate(&mut b, &g2).unwrap();
        apply_gate(&mut b, &g1).unwrap();
        for (x, y) in a.amps.iter().zip(b.amps.iter()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn husimi_nonnegative_and_consistently_normalized(
        seed in any::<u64>(),
        n_r in 5usize..8,
    ) {
        let params = HarperParams::torus(0.5, 0.5, n_r, 4, 4).unwrap();
        let a = random_state(n_r, seed);
        let b = random_state(n_r, seed.wrapping_add(99));
        let ha = husimi(&a.amps, &params);
        let hb = husimi(&b.amps, &params);
        for &v in ha.values.iter() {
            prop_assert!(v >= 0.0);
        }
        // the grid sum is a fixed quadrature constant for unit-norm input
        let sa = ha.values.sum();
        let sb = hb.values.sum();
        prop_assert!(sa > 0.0);
        prop_assert!((sa - sb).abs() / sa < 2e-2, "sums {sa} vs {sb}");
    }

    #[test]
    fn classical_map_preserves_area(
        k in 0.01f64..20.0,
        l in 0.01f64..20.0,
        i in -10.0f64..10.0,
        theta in 0.0f64..TAU,
    ) {
        let params = HarperParams::cylinder(k, l, 6, 0.25).unwrap();
        let params = HarperParams { k, l, ..params };
        let det = jacobian_det(ClassicalPoint { i, theta }, &params, 1e-5);
        prop_assert!((det - 1.0).abs() < 1e-3, "det {det}");
    }

    #[test]
    fn seeded_sampling_is_deterministic(seed in any::<u64>(), eps in 1e-6f64..1e-2) {
        let d1 = sample_disorder(9, eps, seed);
        let d2 = sample_disorder(9, eps, seed);
        prop_assert_eq!(&d1.delta, &d2.delta);
        prop_assert_eq!(&d1.coupling, &d2.coupling);
        let params = HarperParams::torus(0.5, 0.5, 6, 4, 4).unwrap();
        let c1 = gaussian_cloud(50, ClassicalPoint { i: 1.0, theta: 2.0 }, 0.3, &params, seed);
        let c2 = gaussian_cloud(50, ClassicalPoint { i: 1.0, theta: 2.0 }, 0.3, &params, seed);
        for (p, q) in c1.iter().zip(c2.iter()) {
            prop_assert_eq!(p.i, q.i);
            prop_assert_eq!(p.theta, q.theta);
        }
    }

    #[test]
    fn evolution_is_deterministic_and_ipr_bounded(
        (k, l, n_r, frac, seed) in norm_params(),
    ) {
        let params = HarperParams::cylinder(k, l, n_r, frac).unwrap();
        let stepper = ExactStep::new(params);
        let mut a = random_state(n_r, seed);
        let mut b = a.clone();
        for _ in 0..4 {
            stepper.step(&mut a);
            stepper.step(&mut b);
        }
        for (x, y) in a.amps.iter().zip(b.amps.iter()) {
            prop_assert_eq!(x, y);
        }
        let p = momentum_distribution(&a);
        let x = ipr(&p).unwrap();
        prop_assert!(x >= 1.0 - 1e-9 && x <= (1u64 << n_r) as f64 + 1e-9);
    }
}
