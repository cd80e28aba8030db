//! Averaged diffusivity of the polymer endpoint.

use crate::engine::{EndpointMoments, Polymer};

use super::stats::Estimate;
use super::{per_sample, within_se, ExperimentConfig, ExperimentRecord, SuiteId, SuiteReport, VerifyError, ROUNDING_FLOOR};

pub(crate) fn diffusivity_suite(config: &ExperimentConfig) -> Result<SuiteReport, VerifyError> {
    let params = &config.params;
    let tol = &config.tolerances;
    let d = params.dim;
    let origin = vec![0; d];
    let moments = per_sample(config.samples, |i| {
        let env = config.environment(i);
        let poly = Polymer::new(&env, params)?;
        config
            .n_grid
            .iter()
            .map(|&n| Ok(poly.endpoint_moments(0, n as i64, &origin)?))
            .collect::<Result<Vec<EndpointMoments>, VerifyError>>()
    })?;

    let mut records = Vec::new();
    let last = config.n_grid.len() - 1;
    for (k, &n) in config.n_grid.iter().enumerate() {
        let ratio: Vec<f64> = moments.iter().map(|m| m[k].mean_square / n as f64).collect();
        let est = Estimate::of(&ratio);
        let record = ExperimentRecord::new("diffusion.ratio", params, est.mean, (est.mean - 1.0).abs() < tol.diffusion_tol)
            .n(n)
            .se(est.se)
            .threshold(tol.diffusion_tol);
        records.push(if k == last { record } else { record.diagnostic() });
    }

    let n = config.n_grid[last];
    let total = Estimate::of(&moments.iter().map(|m| m[last].mean_square).collect::<Vec<_>>()).mean;
    for i in 0..d {
        let coord: Vec<f64> = moments.iter().map(|m| m[last].second_moment[i * d + i]).collect();
        let share = Estimate::of(&coord).mean / total;
        records.push(
            ExperimentRecord::new(format!("diffusion.share.x{i}"), params, share, (share * d as f64 - 1.0).abs() < tol.share_tol)
                .n(n)
                .threshold(tol.share_tol / d as f64),
        );
        for j in i + 1..d {
            let cross: Vec<f64> = moments.iter().map(|m| m[last].second_moment[i * d + j]).collect();
            let est = Estimate::of(&cross);
            records.push(
                ExperimentRecord::new(format!("diffusion.offdiag.x{i}x{j}"), params, est.mean, within_se(est, 0.0, tol.se_factor))
                    .n(n)
                    .se(est.se)
                    .threshold(tol.se_factor * est.se),
            );
        }
    }

    let flat = params.with_beta(0.0).map_err(|e| super::invalid("beta", e.to_string()))?;
    let env = config.environment(0);
    let poly = Polymer::new(&env, &flat)?;
    for &n in &config.n_grid {
        let ratio = poly.endpoint_mean_square(0, n as i64, &origin)? / n as f64;
        records.push(
            ExperimentRecord::new("diffusion.beta0", &flat, ratio, (ratio - 1.0).abs() <= ROUNDING_FLOOR)
                .n(n)
                .threshold(ROUNDING_FLOOR),
        );
    }
    Ok(SuiteReport::gated(SuiteId::Diffusion, records))
}
