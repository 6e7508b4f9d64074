#![allow(dead_code)]

use num_complex::Complex64;
use qnoise::noise::{FlipPair, ReadoutError};
use qnoise::qgan::{AnsatzConfig, Discriminator, GeneratorModel, GeneratorParams, WeightedValue, DEFAULT_LAYERS};
use qnoise::simcore::{Circuit, GateOp, PureState};
use qnoise::{BasisDistribution, Shots};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DATA_RANGE: (f64, f64) = (0.0, 8.0);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive random distribution over `2^n` outcomes.
pub fn random_dist(n: usize, rng: &mut impl Rng) -> BasisDistribution<f64> {
    let w: Vec<f64> = (0..1usize << n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    BasisDistribution::new(w.into_iter().map(|v| v / s).collect()).unwrap()
}

pub fn random_readout(n: usize, rng: &mut impl Rng) -> ReadoutError<f64> {
    let pairs = (0..n)
        .map(|_| FlipPair::new(rng.random_range(0.0..0.3), rng.random_range(0.0..0.3)).unwrap())
        .collect();
    ReadoutError::new(pairs).unwrap()
}

pub fn random_gate(n: usize, rng: &mut impl Rng) -> GateOp<f64> {
    let q = rng.random_range(0..n);
    match rng.random_range(0..4) {
        0 => GateOp::H(q),
        1 => GateOp::X(q),
        2 => GateOp::Ry(q, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)),
        _ if n > 1 => {
            let mut b = rng.random_range(0..n - 1);
            if b >= q {
                b += 1;
            }
            GateOp::Cz(q, b)
        }
        _ => GateOp::H(q),
    }
}

pub fn random_circuit(n: usize, len: usize, rng: &mut impl Rng) -> Circuit<f64> {
    Circuit::with_gates(n, (0..len).map(|_| random_gate(n, rng)).collect()).unwrap()
}

pub fn random_state(n: usize, rng: &mut impl Rng) -> PureState<f64> {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    PureState::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// Random weights and biases, unlike the zero-bias training init.
pub fn random_discriminator(sizes: &[usize], rng: &mut impl Rng) -> Discriminator<f64> {
    let count: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    let params = (0..count).map(|_| rng.random_range(-0.6..0.6)).collect();
    Discriminator::from_params(sizes, params, DATA_RANGE).unwrap()
}

pub fn random_batch(len: usize, rng: &mut impl Rng) -> Vec<WeightedValue<f64>> {
    (0..len)
        .map(|_| (rng.random_range(DATA_RANGE.0..DATA_RANGE.1), rng.random_range(0.1..3.0)))
        .collect()
}

/// Largest absolute gap between the parameter-shift gradient and central
/// differences (h = 1e-5) for a random three-qubit noise-free instance.
pub fn generator_gradient_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let ansatz = AnsatzConfig::new(3, 2);
    let model = GeneratorModel::new(ansatz, Default::default(), Shots::Exact, None).unwrap();
    let theta: Vec<f64> = (0..ansatz.n_params()).map(|_| r.random_range(-3.0..3.0)).collect();
    let disc = random_discriminator(&DEFAULT_LAYERS, &mut r);
    let grid = model.grid(DATA_RANGE.0, DATA_RANGE.1).unwrap();
    let params = GeneratorParams::new(theta.clone());
    let (_, grad) = model.loss_and_grad(&params, &disc, &grid, &mut r).unwrap();
    let loss = |t: Vec<f64>, r: &mut ChaCha8Rng| model.loss_and_grad(&GeneratorParams::new(t), &disc, &grid, r).unwrap().0;
    let h = 1e-5;
    (0..theta.len())
        .map(|j| {
            let mut up = theta.clone();
            up[j] += h;
            let mut down = theta.clone();
            down[j] -= h;
            let fd = (loss(up, &mut r) - loss(down, &mut r)) / (2.0 * h);
            (fd - grad[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest relative gap between backprop and central differences
/// (h = 1e-5) for a random discriminator and weighted batches. The
/// denominator is floored at 1e-3 so vanishing components do not divide
/// by round-off.
pub fn discriminator_gradient_error(seed: u64, sizes: &[usize]) -> f64 {
    let mut r = rng(seed);
    let disc = random_discriminator(sizes, &mut r);
    let real = random_batch(12, &mut r);
    let fake = random_batch(8, &mut r);
    let (_, grad) = disc.loss_and_grads(&real, &fake).unwrap();
    let h = 1e-5;
    let base = disc.params().to_vec();
    let loss = |p: Vec<f64>| {
        Discriminator::from_params(sizes, p, DATA_RANGE)
            .unwrap()
            .loss_and_grads(&real, &fake)
            .unwrap()
            .0
    };
    (0..base.len())
        .map(|j| {
            let mut up = base.clone();
            up[j] += h;
            let mut down = base.clone();
            down[j] -= h;
            let fd = (loss(up) - loss(down)) / (2.0 * h);
            (fd - grad[j]).abs() / fd.abs().max(1e-3)
        })
        .fold(0.0, f64::max)
}
