use rand::Rng;

use super::ansatz::{build_generator, grid_map, AnsatzConfig, GeneratorParams};
use super::discriminator::Discriminator;
use crate::backend::Backend;
use crate::dist::{BasisDistribution, Shots};
use crate::error::{Error, Result};
use crate::mitigation::{project_to_simplex, CalibrationData, Mitigator};
use crate::noise::NoiseModel;
use crate::scalar::Real;

/// The generator as seen by the trainer: circuit simulation, readout noise,
/// optional finite-shot sampling, and optional readout mitigation.
#[derive(Clone, Debug)]
pub struct GeneratorModel<T = f64> {
    ansatz: AnsatzConfig,
    backend: Backend<T>,
    shots: Shots,
    mitigator: Option<Mitigator<T>>,
}

impl<T: Real> GeneratorModel<T> {
    pub fn new(
        ansatz: AnsatzConfig,
        noise: NoiseModel<T>,
        shots: Shots,
        calibration: Option<&CalibrationData<T>>,
    ) -> Result<Self> {
        ansatz.validate()?;
        if let Some(err) = &noise.readout {
            if err.n_qubits() != ansatz.n_qubits {
                return Err(Error::Contract(format!(
                    "readout error for {} qubits on a {}-qubit generator",
                    err.n_qubits(),
                    ansatz.n_qubits
                )));
            }
        }
        let mitigator = match calibration {
            Some(cal) if cal.n_qubits() != ansatz.n_qubits => {
                return Err(Error::Contract(format!(
                    "calibration for {} qubits on a {}-qubit generator",
                    cal.n_qubits(),
                    ansatz.n_qubits
                )))
            }
            Some(cal) => Some(cal.mitigator()?),
            None => None,
        };
        Ok(Self {
            ansatz,
            backend: Backend::new(noise),
            shots: shots.validate()?,
            mitigator,
        })
    }

    pub fn ansatz(&self) -> &AnsatzConfig {
        &self.ansatz
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    fn mitigated(&self, measured: BasisDistribution<T>) -> Result<BasisDistribution<T>> {
        match &self.mitigator {
            Some(m) => project_to_simplex(&m.apply(&measured)?),
            None => Ok(measured),
        }
    }

    /// `Q(x)` as the trainer observes it, sampled when shots are finite.
    pub fn distribution<R: Rng + ?Sized>(&self, params: &GeneratorParams<T>, rng: &mut R) -> Result<BasisDistribution<T>> {
        let circuit = build_generator(&self.ansatz, params)?;
        self.mitigated(self.backend.measure(&circuit, self.shots, rng)?)
    }

    /// `Q(x)` through the same noise and mitigation, in the infinite-shot limit.
    pub fn exact_distribution(&self, params: &GeneratorParams<T>) -> Result<BasisDistribution<T>> {
        let circuit = build_generator(&self.ansatz, params)?;
        self.mitigated(self.backend.exact_distribution(&circuit)?)
    }

    /// Grid values the generator's basis states map to.
    pub fn grid(&self, data_min: f64, data_max: f64) -> Result<Vec<T>> {
        (0..1usize << self.ansatz.n_qubits)
            .map(|x| grid_map(x, data_min, data_max, self.ansatz.n_qubits).map(T::lit))
            .collect()
    }

    /// Non-saturating generator loss `-sum_x Q(x) ln D(grid(x))` and its
    /// parameter-shift gradient.
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        params: &GeneratorParams<T>,
        disc: &Discriminator<T>,
        grid: &[T],
        rng: &mut R,
    ) -> Result<(T, Vec<T>)> {
        if grid.len() != 1usize << self.ansatz.n_qubits {
            return Err(Error::Contract(format!("grid of length {}", grid.len())));
        }
        let log_d: Vec<T> = grid.iter().map(|g| disc.log_prob_real(*g)).collect();
        let objective = |q: &BasisDistribution<T>| -> T {
            -q.as_slice().iter().zip(&log_d).map(|(p, l)| *p * *l).sum::<T>()
        };
        let loss = objective(&self.distribution(params, rng)?);
        let shift = T::FRAC_PI_2();
        let half = T::lit(0.5);
        let mut grad = Vec::with_capacity(params.theta.len());
        let mut shifted = params.clone();
        for j in 0..params.theta.len() {
            let base = params.theta[j];
            shifted.theta[j] = base + shift;
            let plus = objective(&self.distribution(&shifted, rng)?);
            shifted.theta[j] = base - shift;
            let minus = objective(&self.distribution(&shifted, rng)?);
            shifted.theta[j] = base;
            grad.push(half * (plus - minus));
        }
        Ok((loss, grad))
    }
}

/// One-off evaluation of the generator distribution.
pub fn generator_distribution<T: Real, R: Rng + ?Sized>(
    params: &GeneratorParams<T>,
    ansatz: &AnsatzConfig,
    noise: Option<&NoiseModel<T>>,
    calibration: Option<&CalibrationData<T>>,
    shots: Shots,
    rng: &mut R,
) -> Result<BasisDistribution<T>> {
    let model = GeneratorModel::new(*ansatz, noise.cloned().unwrap_or_default(), shots, calibration)?;
    model.distribution(params, rng)
}

/// Generator loss and gradient for the given discriminator.
pub fn gen_loss_and_grad<T: Real, R: Rng + ?Sized>(
    params: &GeneratorParams<T>,
    model: &GeneratorModel<T>,
    disc: &Discriminator<T>,
    data_range: (f64, f64),
    rng: &mut R,
) -> Result<(T, Vec<T>)> {
    let grid = model.grid(data_range.0, data_range.1)?;
    model.loss_and_grad(params, disc, &grid, rng)
}
