//! Exact few-qubit simulation: statevectors for the noise-free path,
//! density matrices when gate noise is present, and basis-state sampling.

mod gate;
mod mixed;
mod pure;
mod sample;

pub use gate::{Circuit, GateOp};
pub use mixed::{apply_depolarizing, simulate_mixed, MixedState};
pub use pure::{simulate_pure, PureState};
pub use sample::{sample_counts, sample_histogram, sample_outcomes};

use crate::dist::BasisDistribution;
use crate::scalar::Real;

/// Largest register accepted by the statevector backend.
pub const MAX_QUBITS: usize = 16;

/// Largest register accepted by the dense density-matrix backend.
pub const MAX_MIXED_QUBITS: usize = 12;

/// Either simulation substrate.
#[derive(Clone, Debug)]
pub enum State<T = f64> {
    Pure(PureState<T>),
    Mixed(MixedState<T>),
}

impl<T: Real> State<T> {
    pub fn probabilities(&self) -> BasisDistribution<T> {
        match self {
            State::Pure(s) => s.probabilities(),
            State::Mixed(s) => s.probabilities(),
        }
    }
}

/// Measurement distribution of either state kind.
pub fn probabilities<T: Real>(state: &State<T>) -> BasisDistribution<T> {
    state.probabilities()
}
