//! Simulated device: exact simulation followed by readout noise and,
//! optionally, finite-shot sampling.

use rand::Rng;

use crate::dist::{BasisDistribution, Shots};
use crate::error::Result;
use crate::noise::{apply_readout_to_distribution, NoiseModel};
use crate::scalar::Real;
use crate::simcore::{sample_counts, simulate_mixed, simulate_pure, Circuit};

#[derive(Clone, Debug, Default)]
pub struct Backend<T = f64> {
    noise: NoiseModel<T>,
}

impl<T: Real> Backend<T> {
    pub fn new(noise: NoiseModel<T>) -> Self {
        Self { noise }
    }

    pub fn ideal() -> Self {
        Self::new(NoiseModel::ideal())
    }

    pub fn noise(&self) -> &NoiseModel<T> {
        &self.noise
    }

    /// Distribution before readout: statevector path without gate noise,
    /// density-matrix path with it.
    pub fn prepared_distribution(&self, circuit: &Circuit<T>) -> Result<BasisDistribution<T>> {
        match self.noise.active_gate_lambda() {
            None => Ok(simulate_pure(circuit)?.probabilities()),
            Some(lambda) => Ok(simulate_mixed(circuit, Some(lambda))?.probabilities()),
        }
    }

    /// Infinite-shot measured distribution, including readout error.
    pub fn exact_distribution(&self, circuit: &Circuit<T>) -> Result<BasisDistribution<T>> {
        let ideal = self.prepared_distribution(circuit)?;
        match &self.noise.readout {
            Some(err) => apply_readout_to_distribution(&ideal, err),
            None => Ok(ideal),
        }
    }

    /// Measured distribution, sampled when `shots` is finite.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        circuit: &Circuit<T>,
        shots: Shots,
        rng: &mut R,
    ) -> Result<BasisDistribution<T>> {
        let exact = self.exact_distribution(circuit)?;
        match shots {
            Shots::Exact => Ok(exact),
            Shots::Finite(n) => sample_counts(&exact, n, rng),
        }
    }
}
