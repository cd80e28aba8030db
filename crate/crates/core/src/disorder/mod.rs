//! Disorder laws, their log-moment generating functions, and environment
//! fields (sampled, enumerated, time-reversed, persisted).

mod field;
mod io;
mod law;
mod rng;

pub use field::{
    enumerate_environments, sample_environment, time_reverse, Environment, EnvironmentField,
    Provenance, SampledEnvironment, TimeReversed, MAX_ENUMERATED_SITES,
};
pub use io::{load_field, read_field, save_field, write_field, ENUMERATED_SEED, HEADER_LEN, MAGIC, VERSION};
pub use law::{DisorderLaw, ModelParams};
pub use rng::{mix64, standard_normal_quantile, unit_open, StreamKey};

use thiserror::Error;

use crate::lattice::LatticeError;

#[derive(Debug, Error)]
pub enum DisorderError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("unknown disorder law {0:?}")]
    UnknownLaw(String),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} values, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("site outside the stored window at t = {time}: {detail}")]
    OutsideWindow { time: i64, detail: String },
    #[error("exhaustive enumeration refused: {sites} sites exceed the limit of {limit}")]
    TooManySites { sites: usize, limit: usize },
    #[error("field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
