//! Exact transfer-matrix computations for directed polymers in a random
//! environment, with Monte Carlo and exact-enumeration experiment suites.
//!
//! * [`lattice`]: cone geometry, walk kernels, collision probability `π_d`.
//! * [`disorder`]: disorder laws, `λ(β)`, environment fields.
//! * [`engine`]: partition functions, polymer marginals, particle-view densities.
//! * [`verify`]: the experiment suites and their records.

pub mod disorder;
pub mod engine;
pub mod lattice;
pub mod numeric;
pub mod verify;

pub use disorder::{DisorderLaw, Environment, EnvironmentField, ModelParams, SampledEnvironment};
pub use engine::Polymer;
pub use lattice::{Ball, LatticeCone};
