use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::simcore::{Circuit, GateOp};

/// Layout of the variational generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Leading Hadamard on every qubit. Only switched off in tests.
    #[serde(default = "yes")]
    pub hadamard_layer: bool,
}

fn yes() -> bool {
    true
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            n_qubits: 3,
            n_layers: 2,
            hadamard_layer: true,
        }
    }
}

impl AnsatzConfig {
    pub fn new(n_qubits: usize, n_layers: usize) -> Self {
        Self {
            n_qubits,
            n_layers,
            hadamard_layer: true,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_qubits * self.n_layers
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > crate::simcore::MAX_QUBITS {
            return Err(Error::Config(format!("unsupported qubit count {}", self.n_qubits)));
        }
        if self.n_layers == 0 {
            return Err(Error::Config("ansatz needs at least one layer".into()));
        }
        Ok(())
    }
}

/// Rotation angles, indexed `layer * n_qubits + qubit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams<T = f64> {
    pub theta: Vec<T>,
}

impl<T: Real> GeneratorParams<T> {
    pub fn new(theta: Vec<T>) -> Self {
        Self { theta }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|t| t.is_finite())
    }
}

/// Hadamard layer, then per layer an RY on every qubit followed by a CZ
/// chain `(q, q+1)`.
pub fn build_generator<T: Real>(ansatz: &AnsatzConfig, params: &GeneratorParams<T>) -> Result<Circuit<T>> {
    let n = ansatz.n_qubits;
    if params.theta.len() != ansatz.n_params() {
        return Err(Error::Contract(format!(
            "{} angles for an ansatz with {} parameters",
            params.theta.len(),
            ansatz.n_params()
        )));
    }
    let mut gates = Vec::with_capacity(n + ansatz.n_layers * (2 * n - 1));
    if ansatz.hadamard_layer {
        gates.extend((0..n).map(GateOp::H));
    }
    for layer in params.theta.chunks_exact(n) {
        gates.extend(layer.iter().enumerate().map(|(q, t)| GateOp::Ry(q, *t)));
        gates.extend((0..n.saturating_sub(1)).map(|q| GateOp::Cz(q, q + 1)));
    }
    Circuit::with_gates(n, gates)
}

/// I.i.d. normal angles; `std = 0` gives constant `mean`.
pub fn init_params<T: Real, R: Rng + ?Sized>(
    ansatz: &AnsatzConfig,
    mean: f64,
    std: f64,
    rng: &mut R,
) -> Result<GeneratorParams<T>> {
    let normal = Normal::new(mean, std)
        .map_err(|e| Error::Config(format!("invalid init distribution ({mean}, {std}): {e}")))?;
    Ok(GeneratorParams {
        theta: (0..ansatz.n_params())
            .map(|_| T::lit(normal.sample(rng)))
            .collect(),
    })
}

/// Affine map from basis index to the equidistant grid over the data range.
pub fn grid_map(x: usize, data_min: f64, data_max: f64, n_qubits: usize) -> Result<f64> {
    if !(data_min < data_max) {
        return Err(Error::Config(format!("empty data range [{data_min}, {data_max}]")));
    }
    let last = (1usize << n_qubits) - 1;
    if x > last {
        return Err(Error::Contract(format!("basis index {x} exceeds {last}")));
    }
    if last == 0 {
        return Ok(data_min);
    }
    Ok(data_min + x as f64 * (data_max - data_min) / last as f64)
}
