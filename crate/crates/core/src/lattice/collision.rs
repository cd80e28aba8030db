//! Collision statistics of two independent walks: the series
//! `u_t = Σ_x p_t(x)²`, its sum (the Green function at the origin) and the
//! probability `π_d` that the walks ever meet after time zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::LatticeError;
use crate::numeric::pairwise_sum;

/// Fitted exponents at or below this are treated as a divergent series.
/// Lattice walks decay like `t^{-d/2}`, so this separates d = 2 (exponent 1)
/// from d = 3 (exponent 3/2).
const RECURRENT_EXPONENT: f64 = 1.25;
/// Cauchy test: the last tenth of the terms may add at most this share.
const CAUCHY_SHARE: f64 = 0.01;
const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionEstimate {
    pub dim: usize,
    pub t_max: u32,
    /// `Σ_{t=0}^{T} u_t`.
    pub partial_green: f64,
    /// Fitted remainder `Σ_{t>T} c·t^{-d/2}`; infinite when recurrent.
    pub tail_bound: f64,
    /// Lower and upper remainder carried into the interval: `(0, 2·tail)`.
    pub tail_interval: (f64, f64),
    pub pi_d: f64,
    pub pi_interval: (f64, f64),
    pub recurrent: bool,
    /// Fitted amplitude `c` of `u_t ≈ c·t^{-d/2}`.
    pub tail_amplitude: f64,
    /// Free log-log slope of `u_t` over the last decade.
    pub decay_exponent: f64,
}

impl CollisionEstimate {
    /// The conservative (largest) collision probability.
    pub fn pi_upper(&self) -> f64 {
        self.pi_interval.1
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    (0..=n).map(|k| libm::lgamma(k as f64 + 1.0)).collect()
}

/// `P_0(S_n = 0)` for `n = 0..=max_time`.
///
/// Splits the steps between the first axis and the rest: with `m` steps on
/// axis one (binomial with rate `1/d`), the return probability factors into a
/// one-dimensional return after `m` steps and a `(d−1)`-dimensional return
/// after `n − m`.
pub fn return_probabilities(dim: usize, max_time: usize) -> Vec<f64> {
    let lf = ln_factorials(max_time);
    let ln2 = std::f64::consts::LN_2;
    let one_d: Vec<f64> = (0..=max_time)
        .map(|n| {
            if n % 2 == 1 {
                0.0
            } else {
                (lf[n] - 2.0 * lf[n / 2] - n as f64 * ln2).exp()
            }
        })
        .collect();
    let mut current = one_d.clone();
    for k in 2..=dim {
        let ln_a = (1.0 / k as f64).ln();
        let ln_b = ((k - 1) as f64 / k as f64).ln();
        let mut next = vec![0.0; max_time + 1];
        for (n, slot) in next.iter_mut().enumerate().step_by(2) {
            let terms: Vec<f64> = (0..=n)
                .step_by(2)
                .map(|m| {
                    let ln_w = lf[n] - lf[m] - lf[n - m] + m as f64 * ln_a + (n - m) as f64 * ln_b;
                    ln_w.exp() * one_d[m] * current[n - m]
                })
                .collect();
            *slot = pairwise_sum(&terms);
        }
        current = next;
    }
    current
}

/// `u_t = Σ_x p_t(x)² = p_{2t}(0, 0)` for `t = 0..=t_max`.
pub fn collision_series(dim: usize, t_max: u32) -> Vec<f64> {
    let returns = return_probabilities(dim, 2 * t_max as usize);
    returns.into_iter().step_by(2).collect()
}

pub fn collision_green_function(dim: usize, t_max: u32) -> Result<CollisionEstimate, LatticeError> {
    if dim == 0 {
        return Err(LatticeError::ZeroDimension);
    }
    let u = collision_series(dim, t_max);
    let first = (t_max as usize).div_ceil(10).max(1);
    let fit: Vec<(f64, f64)> = (first..=t_max as usize)
        .filter(|&t| u[t] > 0.0)
        .map(|t| ((t as f64).ln(), u[t].ln()))
        .collect();
    if fit.len() < MIN_FIT_POINTS {
        return Err(LatticeError::TailFitTooShort {
            t_max,
            usable: fit.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let half_d = dim as f64 / 2.0;
    let n = fit.len() as f64;
    let ln_c = fit.iter().map(|(lt, lu)| lu + half_d * lt).sum::<f64>() / n;
    let tail_amplitude = ln_c.exp();
    let mean_x = fit.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = fit.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = fit.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = fit.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let decay_exponent = -sxy / sxx;

    let partial_green = pairwise_sum(&u);
    let last = (t_max as usize).div_ceil(10).max(1);
    let increment = pairwise_sum(&u[u.len() - last..]);
    let recurrent = decay_exponent <= RECURRENT_EXPONENT || increment > CAUCHY_SHARE * partial_green;

    if recurrent {
        return Ok(CollisionEstimate {
            dim,
            t_max,
            partial_green,
            tail_bound: f64::INFINITY,
            tail_interval: (0.0, f64::INFINITY),
            pi_d: 1.0,
            pi_interval: (1.0, 1.0),
            recurrent,
            tail_amplitude,
            decay_exponent,
        });
    }
    let tail = tail_amplitude * (t_max as f64 + 0.5).powf(1.0 - half_d) / (half_d - 1.0);
    let pi = |g: f64| 1.0 - 1.0 / g;
    Ok(CollisionEstimate {
        dim,
        t_max,
        partial_green,
        tail_bound: tail,
        tail_interval: (0.0, 2.0 * tail),
        pi_d: pi(partial_green + tail),
        pi_interval: (pi(partial_green), pi(partial_green + 2.0 * tail)),
        recurrent,
        tail_amplitude,
        decay_exponent,
    })
}

/// Histogram of the overlap `L_N = #{1 ≤ t ≤ N: ω_t = ω̃_t}` of independent walk pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapHistogram {
    pub dim: usize,
    pub steps: u32,
    /// `counts[k]` = number of pairs with `L_N = k`.
    pub counts: Vec<u64>,
}

impl OverlapHistogram {
    pub fn samples(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        let total: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as f64 * c as f64)
            .sum();
        total / self.samples() as f64
    }

    /// The same data with the time-zero co-location counted as well.
    pub fn counting_origin(&self) -> OverlapHistogram {
        let mut counts = vec![0];
        counts.extend_from_slice(&self.counts);
        OverlapHistogram {
            dim: self.dim,
            steps: self.steps,
            counts,
        }
    }
}

fn overlap_of_pair(dim: usize, steps: u32, seed: u64, pair: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair);
    let mut diff = vec![0i32; dim];
    let mut hits = 0;
    let dirs = 2 * dim as u32;
    for _ in 0..steps {
        let a = rng.gen_range(0..dirs);
        let b = rng.gen_range(0..dirs);
        diff[(a / 2) as usize] += if a % 2 == 0 { 1 } else { -1 };
        diff[(b / 2) as usize] -= if b % 2 == 0 { 1 } else { -1 };
        if diff.iter().all(|&x| x == 0) {
            hits += 1;
        }
    }
    hits
}

/// Samples the overlap of `samples` independent walk pairs.
///
/// Pair `i` draws from the ChaCha stream `i` under `seed`, so the histogram
/// does not depend on scheduling.
pub fn sample_collision_count(dim: usize, steps: u32, seed: u64, samples: u64) -> OverlapHistogram {
    let counts = (0..samples)
        .into_par_iter()
        .fold(Vec::new, |mut acc: Vec<u64>, pair| {
            let k = overlap_of_pair(dim, steps, seed, pair);
            if acc.len() <= k {
                acc.resize(k + 1, 0);
            }
            acc[k] += 1;
            acc
        })
        .reduce(Vec::new, |mut a, b| {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        });
    OverlapHistogram { dim, steps, counts }
}
