//! Noisy few-qubit circuit simulation, readout-error mitigation and a
//! hybrid quantum GAN trainer. The numerical core is generic over
//! [`Real`]; the aliases below pin it to `f32` or `f64`.

pub mod backend;
pub mod data;
pub mod dist;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mitigation;
pub mod noise;
pub mod qgan;
pub mod scalar;
pub mod simcore;

pub use dist::{BasisDistribution, Shots};
pub use error::{Error, Result};
pub use scalar::Real;

// concrete precisions
pub type PureState64 = simcore::PureState<f64>;
pub type PureState32 = simcore::PureState<f32>;
pub type MixedState64 = simcore::MixedState<f64>;
pub type MixedState32 = simcore::MixedState<f32>;
pub type Circuit64 = simcore::Circuit<f64>;
pub type Circuit32 = simcore::Circuit<f32>;
pub type Distribution64 = BasisDistribution<f64>;
pub type Distribution32 = BasisDistribution<f32>;
pub type NoiseModel64 = noise::NoiseModel<f64>;
pub type NoiseModel32 = noise::NoiseModel<f32>;
pub type GeneratorModel64 = qgan::GeneratorModel<f64>;
pub type GeneratorModel32 = qgan::GeneratorModel<f32>;
