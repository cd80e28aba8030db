//! The collision constant, the overlap law and the `L²` gate.

use crate::disorder::{DisorderLaw, ModelParams};
use crate::lattice::{collision_series, n_step_distribution, return_probabilities, sample_collision_count, CollisionEstimate};
use crate::numeric::pairwise_sum;

use super::stats::chi_square_gof;
use super::{ExperimentConfig, ExperimentRecord, SuiteId, SuiteReport, VerifyError};

const GOF_LEVEL: f64 = 0.01;
const MIN_EXPECTED: f64 = 5.0;
const IDENTITY_TIMES: u32 = 10;
const IDENTITY_TOL: f64 = 1e-12;

/// `log(1/π⁺) − γ` with the conservative (upper) collision constant.
pub(crate) fn l2_margin(params: &ModelParams, pi: &CollisionEstimate) -> f64 {
    0.0 - pi.pi_upper().ln() - params.gamma
}

/// Largest β with `λ(2β) − 2λ(β) < log(1/π)`; `None` when every β qualifies.
pub fn l2_threshold(law: DisorderLaw, pi: f64) -> Option<f64> {
    let target = -pi.ln();
    if target <= 0.0 {
        return Some(0.0);
    }
    let gamma = |b: f64| law.lambda(2.0 * b) - 2.0 * law.lambda(b);
    let mut hi = 1.0;
    while gamma(hi) < target {
        hi *= 2.0;
        if hi > 1024.0 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

pub(crate) fn check_l2_condition(params: &ModelParams, pi: &CollisionEstimate) -> ExperimentRecord {
    let margin = l2_margin(params, pi);
    ExperimentRecord::new("l2.margin", params, margin, margin > 0.0).threshold(0.0)
}

/// `(1 − π) π^k` for `k = 0..len`.
pub fn geometric_law(pi: f64, len: usize) -> Vec<f64> {
    (0..len).map(|k| (1.0 - pi) * pi.powi(k as i32)).collect()
}

/// `P(L_N = k)` for `k = 0..len` with `L_N` counting meetings at `t = 1..N`.
///
/// Meetings form a renewal process with occupation `u_t = p_{2t}(0,0)`; the
/// first-meeting law `f` solves `u_t = Σ_{s=1}^{t} f_s u_{t−s}` and
/// `P(L_N ≥ k)` is the mass of `f^{*k}` on `[1, N]`.
pub fn exact_overlap_law(dim: usize, steps: u32, len: usize) -> Vec<f64> {
    let n = steps as usize;
    let u = collision_series(dim, steps);
    let mut f = vec![0.0; n + 1];
    for t in 1..=n {
        let conv: f64 = (1..t).map(|s| f[s] * u[t - s]).sum();
        f[t] = u[t] - conv;
    }
    // at_least[k] = P(L_N ≥ k)
    let mut at_least = vec![1.0];
    let mut g = f.clone();
    while at_least.len() <= len {
        at_least.push(pairwise_sum(&g[1..]));
        let mut next = vec![0.0; n + 1];
        for t in 2..=n {
            next[t] = (1..t).map(|s| g[s] * f[t - s]).sum();
        }
        g = next;
    }
    (0..len).map(|k| at_least[k] - at_least[k + 1]).collect()
}

pub(crate) fn pi_suite(config: &ExperimentConfig, pi: &CollisionEstimate) -> Result<SuiteReport, VerifyError> {
    let params = &config.params;
    let dim = params.dim;
    let mut records = Vec::new();

    let value_ok = if dim <= 2 {
        pi.recurrent && pi.pi_d == 1.0
    } else {
        !pi.recurrent && pi.pi_d > 0.0 && pi.pi_d < 1.0
    };
    records.push(ExperimentRecord::new("pi.value", params, pi.pi_d, value_ok));
    let width = pi.pi_interval.1 - pi.pi_interval.0;
    records.push(ExperimentRecord::new("pi.interval_width", params, width, width < 0.01).threshold(0.01));

    let returns = return_probabilities(dim, 2 * IDENTITY_TIMES as usize);
    let mut worst: f64 = 0.0;
    for t in 0..=IDENTITY_TIMES {
        let walk = n_step_distribution(dim, t)?;
        let sq: Vec<f64> = walk.masses().iter().map(|p| p * p).collect();
        worst = worst.max((pairwise_sum(&sq) - returns[2 * t as usize]).abs());
    }
    records.push(
        ExperimentRecord::new("pi.collision_identity", params, worst, worst <= IDENTITY_TOL)
            .n(IDENTITY_TIMES)
            .threshold(IDENTITY_TOL),
    );

    if !pi.recurrent {
        let steps = config.overlap_steps;
        let hist = sample_collision_count(dim, steps, config.master_seed, config.overlap_pairs);
        let len = hist.counts.len() + 64;
        let law = geometric_law(pi.pi_d, len);
        let mut best: f64 = 0.0;
        for (name, h) in [("overlap.gof.from_t1", hist.clone()), ("overlap.gof.from_t0", hist.counting_origin())] {
            let p = chi_square_gof(&h.counts, &law, MIN_EXPECTED).map_or(0.0, |f| f.p_value);
            best = best.max(p);
            records.push(
                ExperimentRecord::new(name, params, p, p >= GOF_LEVEL)
                    .n(steps)
                    .threshold(GOF_LEVEL)
                    .diagnostic(),
            );
        }
        records.push(
            ExperimentRecord::new("overlap.geometric", params, best, best >= GOF_LEVEL)
                .n(steps)
                .threshold(GOF_LEVEL),
        );
        let exact = exact_overlap_law(dim, steps, len);
        let p = chi_square_gof(&hist.counts, &exact, MIN_EXPECTED).map_or(0.0, |f| f.p_value);
        records.push(
            ExperimentRecord::new("overlap.gof.truncated_law", params, p, p >= GOF_LEVEL)
                .n(steps)
                .threshold(GOF_LEVEL)
                .diagnostic(),
        );
    }
    Ok(SuiteReport::gated(SuiteId::Pi, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_threshold_is_square_root() {
        let b = l2_threshold(DisorderLaw::StandardGaussian, 0.34).unwrap();
        assert!((b - (1.0f64 / 0.34).ln().sqrt()).abs() < 1e-12);
        assert_eq!(l2_threshold(DisorderLaw::StandardGaussian, 1.0), Some(0.0));
        assert_eq!(l2_threshold(DisorderLaw::Rademacher, 0.34), None);
    }

    #[test]
    fn exact_law_sums_to_one() {
        let law = exact_overlap_law(3, 50, 60);
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // One step, d = 1: the difference walk sits at 0 with probability 1/2.
        let one = exact_overlap_law(1, 1, 3);
        assert!((one[0] - 0.5).abs() < 1e-15 && (one[1] - 0.5).abs() < 1e-15 && one[2] == 0.0);
    }

    #[test]
    fn exact_law_tends_to_geometric() {
        let law = exact_overlap_law(3, 400, 8);
        let pi = crate::lattice::collision_green_function(3, 2000).unwrap().pi_d;
        assert!((law[0] - (1.0 - pi)).abs() < 0.02);
        assert!(law[0] > 1.0 - pi);
    }
}
