use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::ansatz::{init_params, GeneratorParams};
use super::discriminator::{Discriminator, WeightedValue, DEFAULT_LAYERS};
use super::generator::GeneratorModel;
use super::kl::kl_divergence;
use crate::data::RealSource;
use crate::dist::{BasisDistribution, Shots};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// How real samples reach the discriminator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealInput {
    /// Each draw is replaced by the grid point of its bin, so real and fake
    /// data share the same support.
    #[default]
    Binned,
    /// Raw continuous draws.
    Continuous,
}

impl std::str::FromStr for RealInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binned" => Ok(Self::Binned),
            "continuous" => Ok(Self::Continuous),
            other => Err(Error::Config(format!("unknown real input mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub lr_g: f64,
    pub lr_d: f64,
    /// Per-epoch multiplicative decay of both learning rates.
    pub gamma: f64,
    pub epochs: usize,
    /// Discriminator updates per generator update.
    pub k_d: usize,
    pub batch_size: usize,
    pub shots: Shots,
    pub init_mean: f64,
    pub init_std: f64,
    pub real_input: RealInput,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            lr_g: 0.02,
            lr_d: 0.02,
            gamma: 0.999,
            epochs: 3000,
            k_d: 1,
            batch_size: 512,
            shots: Shots::Exact,
            init_mean: 0.1,
            init_std: 0.2,
            real_input: RealInput::Binned,
        }
    }
}

impl TrainingConfig {
    /// Schedule with ten discriminator updates per generator update.
    pub fn full_noise_schedule() -> Self {
        Self {
            epochs: 300,
            k_d: 10,
            ..Self::default()
        }
    }

    /// Rates that converge reliably on the default three-qubit problem.
    /// The plain defaults are sweep starting points and oscillate more.
    pub fn tuned() -> Self {
        Self {
            lr_g: 0.005,
            lr_d: 0.05,
            ..Self::default()
        }
    }

    /// [`Self::full_noise_schedule`] with rates tuned for 300 epochs.
    pub fn tuned_full_noise() -> Self {
        Self {
            lr_g: 0.01,
            lr_d: 0.05,
            ..Self::full_noise_schedule()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        pos("lr_g", self.lr_g)?;
        pos("lr_d", self.lr_d)?;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if self.k_d == 0 {
            return Err(Error::Config("k_d must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite() && self.init_mean.is_finite()) {
            return Err(Error::Config("invalid parameter initialization".into()));
        }
        self.shots.validate()?;
        Ok(())
    }

    /// Learning rates in effect during `epoch`.
    pub fn learning_rates(&self, epoch: usize) -> (f64, f64) {
        let decay = self.gamma.powi(i32::try_from(epoch).unwrap_or(i32::MAX));
        (self.lr_g * decay, self.lr_d * decay)
    }
}

/// Telemetry of one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Relative entropy of the target against the generator after this epoch (nats).
    pub kl: f64,
    pub loss_g: f64,
    pub loss_d: f64,
    pub lr_g: f64,
    pub lr_d: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T = f64> {
    pub records: Vec<EpochRecord>,
    pub params: GeneratorParams<T>,
    pub discriminator: Discriminator<T>,
    pub disc_steps: u64,
    pub gen_steps: u64,
}

impl<T: Real> TrainOutcome<T> {
    pub fn final_kl(&self) -> Option<f64> {
        self.records.last().map(|r| r.kl)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError<T: Real = f64> {
    /// A loss or parameter became non-finite; carries everything up to `epoch`.
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize, partial: Box<TrainOutcome<T>> },
    #[error(transparent)]
    Failed(#[from] Error),
}

fn real_batch<T: Real>(
    config: &TrainingConfig,
    real: &dyn RealSource,
    grid: &[T],
    rng: &mut dyn RngCore,
) -> Vec<WeightedValue<T>> {
    match config.real_input {
        RealInput::Binned => {
            let mut counts = vec![0usize; grid.len()];
            for b in real.sample_bins(config.batch_size, rng) {
                counts[b] += 1;
            }
            counts
                .iter()
                .zip(grid)
                .filter(|(c, _)| **c > 0)
                .map(|(c, g)| (*g, T::from_usize_lossy(*c)))
                .collect()
        }
        RealInput::Continuous => real
            .sample_values(config.batch_size, rng)
            .into_iter()
            .map(|v| (T::lit(v), T::one()))
            .collect(),
    }
}

/// Alternating adversarial training.
///
/// Each epoch draws a fresh real batch for each of the `k_d` discriminator
/// updates, then updates the generator once, then decays both learning
/// rates by `gamma`. The run is deterministic given `rng`.
pub fn train<T: Real, R: RngCore>(
    config: &TrainingConfig,
    model: &GeneratorModel<T>,
    real: &dyn RealSource,
    rng: &mut R,
) -> std::result::Result<TrainOutcome<T>, TrainError<T>> {
    config.validate()?;
    let target = real.target();
    let n = model.ansatz().n_qubits;
    if target.n_qubits() != n {
        return Err(Error::Contract(format!(
            "target has {} bins but the generator has {n} qubits",
            target.probs.len()
        ))
        .into());
    }
    let p_target: BasisDistribution<T> = target.probs.cast();
    let grid = model.grid(target.data_min, target.data_max)?;

    let params = init_params(model.ansatz(), config.init_mean, config.init_std, rng)?;
    let discriminator = Discriminator::random(&DEFAULT_LAYERS, (target.data_min, target.data_max), rng)?;
    let mut adam_g = AdamState::new(params.theta.len());
    let mut adam_d = AdamState::new(discriminator.params().len());
    let mut out = TrainOutcome {
        records: Vec::with_capacity(config.epochs),
        params,
        discriminator,
        disc_steps: 0,
        gen_steps: 0,
    };

    for epoch in 0..config.epochs {
        let (lr_g, lr_d) = config.learning_rates(epoch);
        let q = model.distribution(&out.params, rng)?;
        let fake: Vec<WeightedValue<T>> = q
            .as_slice()
            .iter()
            .zip(&grid)
            .filter(|(p, _)| **p > T::zero())
            .map(|(p, g)| (*g, *p))
            .collect();

        let mut loss_d = T::nan();
        for _ in 0..config.k_d {
            let batch = real_batch(config, real, &grid, rng);
            let (loss, grads) = out.discriminator.loss_and_grads(&batch, &fake)?;
            adam_d.step(out.discriminator.params_mut(), &grads, T::lit(lr_d));
            out.disc_steps += 1;
            loss_d = loss;
        }

        let (loss_g, grad_g) = model.loss_and_grad(&out.params, &out.discriminator, &grid, rng)?;
        adam_g.step(&mut out.params.theta, &grad_g, T::lit(lr_g));
        out.gen_steps += 1;

        let finite = loss_d.is_finite()
            && loss_g.is_finite()
            && out.params.is_finite()
            && out.discriminator.params().iter().all(|p| p.is_finite());
        if !finite {
            return Err(TrainError::Diverged {
                epoch,
                partial: Box::new(out),
            });
        }
        let kl = kl_divergence(&p_target, &model.exact_distribution(&out.params)?)?;
        out.records.push(EpochRecord {
            epoch,
            kl: kl.to_f64_lossy(),
            loss_g: loss_g.to_f64_lossy(),
            loss_d: loss_d.to_f64_lossy(),
            lr_g,
            lr_d,
        });
    }
    Ok(out)
}
