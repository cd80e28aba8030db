//! Directed space-time geometry, simple random walk kernels and the
//! collision statistics that define the L² region.

mod ball;
mod collision;
mod cone;
mod walk;

pub use ball::{ball_site_count, Ball, BallShape, MAX_SITES};
pub(crate) use ball::neighbor_sum;
pub use collision::{
    collision_green_function, collision_series, return_probabilities, sample_collision_count,
    CollisionEstimate, OverlapHistogram,
};
pub use cone::{ball_within, build_cone, forward_cone, LatticeCone};
pub use walk::{n_step_distribution, WalkDistribution};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("lattice dimension must be at least 1")]
    ZeroDimension,
    #[error("empty time window: t_min = {t_min} > t_max = {t_max}")]
    EmptyWindow { t_min: i64, t_max: i64 },
    #[error("expected a {expected}-dimensional site, got {found} coordinates")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("window needs {sites} sites, above the capacity limit of {limit}")]
    Capacity { sites: u128, limit: u128 },
    #[error("T_max = {t_max} leaves {usable} points in the last decade; the tail fit needs {needed}")]
    TailFitTooShort { t_max: u32, usable: usize, needed: usize },
}

/// ℓ¹ norm of a site.
pub fn l1_norm(site: &[i32]) -> i64 {
    site.iter().map(|x| (*x as i64).abs()).sum()
}

/// True when a walk can go from `from` to `to` in exactly `steps` steps.
pub fn reachable(from: &[i32], to: &[i32], steps: i64) -> bool {
    if steps < 0 || from.len() != to.len() {
        return false;
    }
    let dist: i64 = from
        .iter()
        .zip(to)
        .map(|(a, b)| (*a as i64 - *b as i64).abs())
        .sum();
    dist <= steps && (steps - dist) % 2 == 0
}
