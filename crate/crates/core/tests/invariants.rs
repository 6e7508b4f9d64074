//! Property tests for the simulator, noise, mitigation, data and training
//! invariants. Random objects are built from a proptest-chosen seed so
//! shrinking stays cheap.

mod common;

use common::*;
use proptest::prelude::*;
use qnoise::data::{discretize, write_histogram, TargetSpec};
use qnoise::mitigation::{calibrate_bf, calibrate_ibf, mitigate, project_to_simplex};
use qnoise::noise::{apply_readout_to_distribution, full_confusion_matrix, NoiseModel};
use qnoise::qgan::{kl_divergence, AnsatzConfig, GeneratorModel, GeneratorParams};
use qnoise::simcore::{simulate_mixed, simulate_pure, MixedState};
use qnoise::backend::Backend;
use qnoise::{BasisDistribution, Shots};
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_then_adjoint_is_identity(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let state = random_state(n, &mut r);
        let gate = random_gate(n, &mut r);
        let back = state.apply_gate(&gate).unwrap().apply_gate(&gate.adjoint()).unwrap();
        for (a, b) in state.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn circuits_preserve_norm(seed in any::<u64>(), n in 1usize..=8, len in 0usize..40) {
        let mut r = rng(seed);
        let state = simulate_pure(&random_circuit(n, len, &mut r)).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((state.probabilities().total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_and_mixed_paths_agree(seed in any::<u64>(), n in 1usize..=5, len in 0usize..30) {
        let mut r = rng(seed);
        let c = random_circuit(n, len, &mut r);
        let p = simulate_pure(&c).unwrap().probabilities();
        let m = simulate_mixed(&c, None).unwrap().probabilities();
        for (a, b) in p.as_slice().iter().zip(m.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_is_cptp(seed in any::<u64>(), n in 2usize..=4, lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let mut rho = MixedState::from_pure(&random_state(n, &mut r)).unwrap();
        rho.run(&random_circuit(n, 10, &mut r), Some(r.random_range(0.0..1.0))).unwrap();
        let a = r.random_range(0..n);
        let b = (a + 1 + r.random_range(0..n - 1)) % n;
        rho.depolarize(a, b, lambda).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.trace().im.abs() < 1e-12);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn factored_readout_equals_dense_product(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let d = random_dist(n, &mut r);
        let err = random_readout(n, &mut r);
        let m = full_confusion_matrix(&err, n).unwrap();
        for s in m.column_sums() {
            prop_assert!((s - 1.0).abs() < 1e-14);
        }
        let dense = m.mul_vec(d.as_slice());
        let fast = apply_readout_to_distribution(&d, &err).unwrap();
        for (a, b) in dense.iter().zip(fast.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bf_and_ibf_agree_with_exact_calibration(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let d = random_dist(n, &mut r);
        let backend = Backend::new(NoiseModel::readout_only(random_readout(n, &mut r)));
        let bf = calibrate_bf(&backend, n, Shots::Exact, &mut r).unwrap();
        let ibf = calibrate_ibf(&backend, n, Shots::Exact, &mut r).unwrap();
        let a = mitigate(&d, &bf).unwrap();
        let b = mitigate(&d, &ibf).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn mitigation_round_trip(seed in any::<u64>(), n in 1usize..=6, use_bf in any::<bool>()) {
        let mut r = rng(seed);
        let p = random_dist(n, &mut r);
        let err = random_readout(n, &mut r);
        let backend = Backend::new(NoiseModel::readout_only(err.clone()));
        let cal = if use_bf {
            calibrate_bf(&backend, n, Shots::Exact, &mut r).unwrap()
        } else {
            calibrate_ibf(&backend, n, Shots::Exact, &mut r).unwrap()
        };
        let noisy = apply_readout_to_distribution(&p, &err).unwrap();
        let back = project_to_simplex(&mitigate(&noisy, &cal).unwrap()).unwrap();
        for (a, b) in p.as_slice().iter().zip(back.as_slice()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_identity(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let p = random_dist(n, &mut r);
        let q = random_dist(n, &mut r);
        prop_assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
        prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn generator_output_is_normalized(seed in any::<u64>(), p in 0.0f64..0.2, lambda in 0.0f64..0.2, mitigate_it in any::<bool>(), finite in any::<bool>()) {
        let mut r = rng(seed);
        let ansatz = AnsatzConfig::default();
        let noise = NoiseModel::readout_only(qnoise::noise::ReadoutError::symmetric(3, p).unwrap())
            .with_gate_depolarizing(lambda)
            .unwrap();
        let cal = calibrate_ibf(&Backend::new(noise.clone()), 3, Shots::Finite(500), &mut r).unwrap();
        let shots = if finite { Shots::Finite(200) } else { Shots::Exact };
        let model = GeneratorModel::new(ansatz, noise, shots, mitigate_it.then_some(&cal)).unwrap();
        let theta = GeneratorParams::new((0..ansatz.n_params()).map(|_| r.random_range(-3.0..3.0)).collect());
        let q = model.distribution(&theta, &mut r).unwrap();
        prop_assert!((q.total() - 1.0).abs() < 1e-9);
        prop_assert!(q.as_slice().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn real_batch_order_does_not_change_discriminator_loss(seed in any::<u64>()) {
        let mut r = rng(seed);
        let disc = random_discriminator(&[1, 6, 4, 1], &mut r);
        let real = random_batch(16, &mut r);
        let fake = random_batch(8, &mut r);
        let mut shuffled = real.clone();
        shuffled.reverse();
        shuffled.rotate_left(r.random_range(0..16));
        let (a, _) = disc.loss_and_grads(&real, &fake).unwrap();
        let (b, _) = disc.loss_and_grads(&shuffled, &fake).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn discretization_ignores_density_scale(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let w: Vec<f64> = (0..8).map(|_| r.random_range(0.0..5.0)).collect();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        write_histogram(&a, &w).unwrap();
        write_histogram(&b, &w.iter().map(|v| v * scale).collect::<Vec<_>>()).unwrap();
        let pa = discretize(&TargetSpec::Histogram { path: a, min: 0.0, max: 1.0 }, 3).unwrap();
        let pb = discretize(&TargetSpec::Histogram { path: b, min: 0.0, max: 1.0 }, 3).unwrap();
        for (x, y) in pa.probs.as_slice().iter().zip(pb.probs.as_slice()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_rate_is_an_axis_rescaling(rate in 0.2f64..5.0) {
        // the rate only rescales the axis, and the normalizer absorbs the Jacobian
        let base = discretize(&TargetSpec::Gamma { shape: 2.0, rate: 1.0, min: 0.0, max: 8.0 }, 3).unwrap();
        let scaled = discretize(&TargetSpec::Gamma { shape: 2.0, rate, min: 0.0, max: 8.0 / rate }, 3).unwrap();
        for (x, y) in base.probs.as_slice().iter().zip(scaled.probs.as_slice()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn uniform_distribution_is_fixed_by_symmetric_readout() {
    for n in 1..=5 {
        let u = BasisDistribution::<f64>::uniform(n);
        let err = qnoise::noise::ReadoutError::symmetric(n, 0.17).unwrap();
        let out = apply_readout_to_distribution(&u, &err).unwrap();
        assert!(out.total_variation(&u) < 1e-15);
    }
}

#[test]
fn single_precision_tracks_double() {
    let mut r = rng(21);
    let c = random_circuit(4, 30, &mut r);
    let wide = simulate_pure(&c).unwrap().probabilities();
    let narrow_ops: Vec<_> = c
        .gates()
        .iter()
        .map(|g| match *g {
            qnoise::simcore::GateOp::Ry(q, t) => qnoise::simcore::GateOp::Ry(q, t as f32),
            qnoise::simcore::GateOp::H(q) => qnoise::simcore::GateOp::H(q),
            qnoise::simcore::GateOp::X(q) => qnoise::simcore::GateOp::X(q),
            qnoise::simcore::GateOp::Cz(a, b) => qnoise::simcore::GateOp::Cz(a, b),
        })
        .collect();
    let narrow: qnoise::Circuit32 = qnoise::simcore::Circuit::with_gates(4, narrow_ops).unwrap();
    let p32 = simulate_pure(&narrow).unwrap().probabilities();
    for (a, b) in wide.as_slice().iter().zip(p32.as_slice()) {
        assert!((a - *b as f64).abs() < 1e-5);
    }
    let rho: qnoise::Distribution32 = simulate_mixed(&narrow, Some(0.05f32)).unwrap().probabilities();
    assert!((rho.total() - 1.0).abs() < 1e-5);
}
