//! First and second moments of `W_N`: exact enumeration and Monte Carlo.

use crate::disorder::{enumerate_environments, DisorderLaw, ModelParams};
use crate::engine::Polymer;
use crate::lattice::build_cone;
use crate::numeric::sample_variance;

use super::stats::Estimate;
use super::{per_sample, within_se, ExperimentConfig, ExperimentRecord, SuiteId, SuiteReport, VerifyError};

/// `P⊗²[e^{γ L_N}]` by enumerating every pair of `N`-step paths from the origin.
pub fn pair_overlap_moment(dim: usize, steps: u32, gamma: f64) -> f64 {
    let moves = 2 * dim;
    let total = moves.pow(steps);
    let paths: Vec<Vec<Vec<i32>>> = (0..total)
        .map(|mut code| {
            let mut pos = vec![0i32; dim];
            (0..steps)
                .map(|_| {
                    let m = code % moves;
                    code /= moves;
                    pos[m / 2] += if m % 2 == 0 { 1 } else { -1 };
                    pos.clone()
                })
                .collect()
        })
        .collect();
    let mut sum = 0.0;
    for a in &paths {
        for b in &paths {
            let meet = a.iter().zip(b).filter(|(x, y)| x == y).count();
            sum += (gamma * meet as f64).exp();
        }
    }
    sum / (total * total) as f64
}

/// `(Q(W_N), Q(W_N²))` over every Rademacher field on the forward cone.
fn enumerated_moments(params: &ModelParams, steps: u32) -> Result<(f64, f64), VerifyError> {
    let d = params.dim;
    let origin = vec![0; d];
    let cone = build_cone(d, 0, steps as i64, (0, &origin))?;
    let mut first = 0.0;
    let mut second = 0.0;
    for (field, prob) in enumerate_environments(&cone).map_err(crate::engine::EngineError::from)? {
        let w = Polymer::new(&field, params)?.normalized_w(0, steps as i64, &origin)?;
        first += prob * w;
        second += prob * w * w;
    }
    Ok((first, second))
}

/// Enumerable instances: `(d, N)` whose forward cone has at most 24 sites.
const ENUMERABLE: [(usize, u32); 5] = [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)];

pub(crate) fn second_moment_suite(config: &ExperimentConfig) -> Result<SuiteReport, VerifyError> {
    let tol = config.tolerances.exact_tol;
    let mut records = Vec::new();
    let mut chain: Vec<f64> = Vec::new();
    for (d, n) in ENUMERABLE {
        if d > config.params.dim {
            continue;
        }
        let params = ModelParams::new(d, config.params.beta, DisorderLaw::Rademacher)
            .map_err(|e| super::invalid("beta", e.to_string()))?;
        let (first, second) = enumerated_moments(&params, n)?;
        let pair = pair_overlap_moment(d, n, params.gamma);
        let e1 = (first - 1.0).abs();
        let e2 = (second - pair).abs();
        records.push(ExperimentRecord::new("moments.first", &params, e1, e1 <= tol).n(n).threshold(tol));
        records.push(ExperimentRecord::new("moments.second", &params, e2, e2 <= tol * pair).n(n).threshold(tol * pair));
        records.push(ExperimentRecord::new("moments.second_value", &params, second, true).n(n).diagnostic());
        if d == 1 {
            chain.push(second);
        }
    }
    let params = ModelParams::new(1, config.params.beta, DisorderLaw::Rademacher)
        .map_err(|e| super::invalid("beta", e.to_string()))?;
    let step = chain.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    records.push(ExperimentRecord::new("moments.monotone", &params, step, step >= -tol).threshold(-tol));
    Ok(SuiteReport::gated(SuiteId::Moments, records))
}

pub(crate) fn martingale_suite(config: &ExperimentConfig) -> Result<SuiteReport, VerifyError> {
    let params = &config.params;
    let tol = &config.tolerances;
    let origin = vec![0; params.dim];
    let n_max = *config.n_grid.last().expect("validated grid");
    let series = per_sample(config.samples, |i| {
        let env = config.environment(i);
        Ok(Polymer::new(&env, params)?.w_series(0, &origin, n_max)?)
    })?;
    let mut records = Vec::new();
    let mut variances = Vec::new();
    for &n in &config.n_grid {
        let w: Vec<f64> = series.iter().map(|s| s[n as usize]).collect();
        let est = Estimate::of(&w);
        records.push(
            ExperimentRecord::new("martingale.mean", params, est.mean, within_se(est, 1.0, tol.se_factor))
                .n(n)
                .se(est.se)
                .threshold(tol.se_factor * est.se),
        );
        let var = sample_variance(&w);
        variances.push(var);
        records.push(ExperimentRecord::new("martingale.variance", params, var, true).n(n).diagnostic());
    }
    let max = variances.iter().copied().fold(0.0, f64::max);
    let min = variances.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if max == 0.0 { 1.0 } else { max / min };
    records.push(
        ExperimentRecord::new("martingale.variance_ratio", params, ratio, ratio < tol.variance_ratio_limit)
            .threshold(tol.variance_ratio_limit),
    );

    let enum_params = ModelParams::new(1, params.beta, DisorderLaw::Rademacher)
        .map_err(|e| super::invalid("beta", e.to_string()))?;
    let (first, _) = enumerated_moments(&enum_params, 2)?;
    let err = (first - 1.0).abs();
    records.push(
        ExperimentRecord::new("martingale.enumerated", &enum_params, first, err <= tol.exact_tol)
            .n(2)
            .threshold(tol.exact_tol),
    );
    Ok(SuiteReport::gated(SuiteId::Martingale, records))
}
