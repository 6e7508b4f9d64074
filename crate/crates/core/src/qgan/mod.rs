//! Hybrid quantum-classical GAN: variational generator, classical
//! discriminator, and the alternating adversarial trainer.

mod adam;
mod ansatz;
mod discriminator;
mod generator;
mod kl;
mod trainer;

pub use adam::{adam_step, AdamState};
pub use ansatz::{build_generator, grid_map, init_params, AnsatzConfig, GeneratorParams};
pub use discriminator::{
    disc_forward, disc_loss_and_grads, Discriminator, WeightedValue, DEFAULT_LAYERS, LEAKY_SLOPE, LOG_FLOOR,
};
pub use generator::{gen_loss_and_grad, generator_distribution, GeneratorModel};
pub use kl::{kl_divergence, KL_FLOOR};
pub use trainer::{train, EpochRecord, RealInput, TrainError, TrainOutcome, TrainingConfig};
