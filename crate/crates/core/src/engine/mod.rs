//! Exact forward/backward transfer-matrix sweeps for one fixed environment.
//!
//! Path weights follow the polymer-measure convention: a path started at
//! `(M, x)` collects `e^{β η(M+t, ω_t)}` for `t = 1..N−M`, so the disorder at
//! the starting time is never used.

mod density;
mod polymer;
mod slice;

pub use density::{DensityValue, HTransformKernel, LimitDensity, LltDecomposition, LltTerms};
pub use polymer::{within_diffusive_window, EndpointMoments, PartitionSet, Polymer, SweepOptions};
pub use slice::SliceVector;

use thiserror::Error;

use crate::disorder::DisorderError;
use crate::lattice::LatticeError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("environment does not cover t = {time}: {detail}")]
    WindowCoverage { time: i64, detail: String },
    #[error("endpoint {to:?} is unreachable from {from:?} in {steps} steps")]
    Unreachable { from: Vec<i32>, to: Vec<i32>, steps: i64 },
    #[error("numeric range exhausted at t = {time}: {detail}")]
    NumericRange { time: i64, detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Disorder(DisorderError),
}

impl From<DisorderError> for EngineError {
    fn from(e: DisorderError) -> Self {
        match e {
            DisorderError::OutsideWindow { time, detail } => EngineError::WindowCoverage { time, detail },
            DisorderError::Lattice(l) => EngineError::Lattice(l),
            other => EngineError::Disorder(other),
        }
    }
}
