use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Hidden-layer LeakyReLU slope.
pub const LEAKY_SLOPE: f64 = 0.2;

/// Floor applied to probabilities inside logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

pub const DEFAULT_LAYERS: [usize; 4] = [1, 50, 20, 1];

/// Fully connected classifier on scalar inputs: LeakyReLU hidden layers and
/// a sigmoid output. Inputs are rescaled from `input_range` to `[-1, 1]`.
///
/// Parameters live in one flat vector; each layer stores its weights
/// (`out x in`, row-major) followed by its biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discriminator<T = f64> {
    sizes: Vec<usize>,
    params: Vec<T>,
    input_range: (f64, f64),
}

/// A scalar input with its weight in a batch average.
pub type WeightedValue<T> = (T, T);

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<T: Real> Discriminator<T> {
    fn check(sizes: &[usize], input_range: (f64, f64)) -> Result<()> {
        if sizes.len() < 2 || sizes[0] != 1 || *sizes.last().unwrap() != 1 || sizes.contains(&0) {
            return Err(Error::Config(format!("invalid discriminator layout {sizes:?}")));
        }
        if !(input_range.0 < input_range.1) {
            return Err(Error::Config(format!("empty input range {input_range:?}")));
        }
        Ok(())
    }

    /// Glorot-uniform weights, zero biases.
    pub fn random<R: Rng + ?Sized>(sizes: &[usize], input_range: (f64, f64), rng: &mut R) -> Result<Self> {
        Self::check(sizes, input_range)?;
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| T::lit(limit * (2.0 * rng.random::<f64>() - 1.0))));
            params.extend((0..fan_out).map(|_| T::zero()));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
            input_range,
        })
    }

    /// All-zero network, which outputs 0.5 everywhere.
    pub fn zeros(sizes: &[usize], input_range: (f64, f64)) -> Result<Self> {
        Self::check(sizes, input_range)?;
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![T::zero(); param_count(sizes)],
            input_range,
        })
    }

    pub fn from_params(sizes: &[usize], params: Vec<T>, input_range: (f64, f64)) -> Result<Self> {
        Self::check(sizes, input_range)?;
        if params.len() != param_count(sizes) {
            return Err(Error::Contract(format!(
                "{} parameters for layout {sizes:?} (needs {})",
                params.len(),
                param_count(sizes)
            )));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
            input_range,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn input_range(&self) -> (f64, f64) {
        self.input_range
    }

    fn scale_input(&self, value: T) -> T {
        let (lo, hi) = (T::lit(self.input_range.0), T::lit(self.input_range.1));
        T::lit(2.0) * (value - lo) / (hi - lo) - T::one()
    }

    /// Pre-activations of every layer for one input.
    fn forward_trace(&self, value: T) -> Vec<Vec<T>> {
        let slope = T::lit(LEAKY_SLOPE);
        let mut act = vec![self.scale_input(value)];
        let mut pres = Vec::with_capacity(self.sizes.len() - 1);
        let mut off = 0;
        let n_layers = self.sizes.len() - 1;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[off..off + n_in * n_out];
            let bias = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            off += n_in * n_out + n_out;
            let pre: Vec<T> = weights
                .chunks_exact(n_in)
                .zip(bias)
                .map(|(row, b)| row.iter().zip(&act).map(|(w, a)| *w * *a).sum::<T>() + *b)
                .collect();
            if l + 1 < n_layers {
                act = pre.iter().map(|z| if *z > T::zero() { *z } else { slope * *z }).collect();
            }
            pres.push(pre);
        }
        pres
    }

    /// Output logit for one input.
    pub fn logit(&self, value: T) -> T {
        self.forward_trace(value).last().expect("output layer")[0]
    }

    /// `D(value)` in (0, 1).
    pub fn forward(&self, value: T) -> T {
        sigmoid(self.logit(value))
    }

    /// `ln D(value)`, floored at `ln 1e-12`.
    pub fn log_prob_real(&self, value: T) -> T {
        log_sigmoid(self.logit(value)).max(T::lit(LOG_FLOOR.ln()))
    }

    /// Accumulates `dL/dparams` for one input given `dL/dlogit`.
    fn backward(&self, value: T, dlogit: T, grads: &mut [T]) {
        let slope = T::lit(LEAKY_SLOPE);
        let pres = self.forward_trace(value);
        let input = self.scale_input(value);
        // offsets of each layer's parameter block
        let mut offsets = Vec::with_capacity(self.sizes.len() - 1);
        let mut off = 0;
        for w in self.sizes.windows(2) {
            offsets.push(off);
            off += w[0] * w[1] + w[1];
        }
        let mut delta = vec![dlogit];
        for l in (0..self.sizes.len() - 1).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let prev_act: Vec<T> = if l == 0 {
                vec![input]
            } else {
                pres[l - 1]
                    .iter()
                    .map(|z| if *z > T::zero() { *z } else { slope * *z })
                    .collect()
            };
            for o in 0..n_out {
                let d = delta[o];
                if d == T::zero() {
                    continue;
                }
                let row = off + o * n_in;
                for i in 0..n_in {
                    grads[row + i] = grads[row + i] + d * prev_act[i];
                }
                let b = off + n_in * n_out + o;
                grads[b] = grads[b] + d;
            }
            if l == 0 {
                break;
            }
            let weights = &self.params[off..off + n_in * n_out];
            delta = (0..n_in)
                .map(|i| {
                    let back: T = (0..n_out).map(|o| weights[o * n_in + i] * delta[o]).sum();
                    let z = pres[l - 1][i];
                    back * if z > T::zero() { T::one() } else { slope }
                })
                .collect();
        }
    }

    /// Binary cross-entropy `-E_real[ln D] - E_fake[ln(1 - D)]` and its
    /// gradient. Each batch is a weighted average; weights need not sum to 1.
    pub fn loss_and_grads(&self, real: &[WeightedValue<T>], fake: &[WeightedValue<T>]) -> Result<(T, Vec<T>)> {
        let total = |b: &[WeightedValue<T>]| b.iter().map(|(_, w)| *w).sum::<T>();
        let (w_real, w_fake) = (total(real), total(fake));
        if real.is_empty() || fake.is_empty() || !(w_real > T::zero()) || !(w_fake > T::zero()) {
            return Err(Error::Contract("discriminator batches must be non-empty".into()));
        }
        let floor = T::lit(LOG_FLOOR.ln());
        let mut grads = vec![T::zero(); self.params.len()];
        let mut loss = T::zero();
        for &(x, w) in real {
            let w = w / w_real;
            let z = self.logit(x);
            let ld = log_sigmoid(z);
            if ld > floor {
                loss = loss - w * ld;
                // d(-ln sigmoid z)/dz = sigmoid(z) - 1
                self.backward(x, w * (sigmoid(z) - T::one()), &mut grads);
            } else {
                loss = loss - w * floor;
            }
        }
        for &(x, w) in fake {
            let w = w / w_fake;
            let z = self.logit(x);
            let l1d = log_sigmoid(-z);
            if l1d > floor {
                loss = loss - w * l1d;
                // d(-ln(1 - sigmoid z))/dz = sigmoid(z)
                self.backward(x, w * sigmoid(z), &mut grads);
            } else {
                loss = loss - w * floor;
            }
        }
        Ok((loss, grads))
    }
}

#[inline]
pub(crate) fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `ln sigmoid(z) = -softplus(-z)`, stable for large `|z|`.
#[inline]
pub(crate) fn log_sigmoid<T: Real>(z: T) -> T {
    let softplus_neg = (-z).max(T::zero()) + (-z.abs()).exp().ln_1p();
    -softplus_neg
}

/// Discriminator output for one input.
pub fn disc_forward<T: Real>(phi: &Discriminator<T>, value: T) -> T {
    phi.forward(value)
}

/// Discriminator loss and gradient for weighted real and fake batches.
pub fn disc_loss_and_grads<T: Real>(
    phi: &Discriminator<T>,
    real: &[WeightedValue<T>],
    fake: &[WeightedValue<T>],
) -> Result<(T, Vec<T>)> {
    phi.loss_and_grads(real, fake)
}
