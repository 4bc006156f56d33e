//! Stochastic reward environments and instance generators.

mod generators;
mod instance;
mod kl;
mod rng;

pub use generators::{
    gen_hard_gpsi, gen_random_gpsi, gen_random_gpsi_mcmc, gen_random_lbgi, gen_random_lbgi_multi, validate_hard_params,
    DEFAULT_ATTEMPT_BUDGET, HARD_DEFAULTS,
};
pub use instance::{Instance, InstanceFile, NoiseKind, NoiseModel};
pub use kl::{kl_fully_dependent, kl_monte_carlo};
pub use rng::{ArmStreams, RngStream, GENERATOR_ID};
