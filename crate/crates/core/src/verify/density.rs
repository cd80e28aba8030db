//! Convergence of the environment seen from the particle.

use crate::engine::Polymer;
use crate::numeric::correlation;

use super::stats::{fisher_se, Estimate};
use super::{
    decreased, per_sample, within_se, ExperimentConfig, ExperimentRecord, SuiteId, SuiteReport, VerifyError,
    ROUNDING_FLOOR,
};

/// `D(last)/D(first)`, zero when both vanish up to rounding.
fn shrink_ratio(first: f64, last: f64) -> f64 {
    if last.abs() <= ROUNDING_FLOOR {
        0.0
    } else {
        last / first
    }
}

/// Records shared by both density suites: mean density, distance to the
/// limit, paired decreases and the halving ratio.
fn trend_records(
    config: &ExperimentConfig,
    prefix: &str,
    horizons: &[(u32, Option<u32>)],
    densities: &[Vec<f64>],
    distances: &[Vec<f64>],
    halving_gates: bool,
) -> Vec<ExperimentRecord> {
    let params = &config.params;
    let tol = &config.tolerances;
    let with_horizon = |r: ExperimentRecord, (n, m): (u32, Option<u32>)| match m {
        Some(m) => r.n(n).m(m),
        None => r.n(n),
    };
    let mut records = Vec::new();
    let mut means = Vec::new();
    for (k, &h) in horizons.iter().enumerate() {
        let q = Estimate::of(&densities[k]);
        records.push(with_horizon(
            ExperimentRecord::new(format!("{prefix}.mean"), params, q.mean, within_se(q, 1.0, tol.se_factor))
                .se(q.se)
                .threshold(tol.se_factor * q.se),
            h,
        ));
        let d = Estimate::of(&distances[k]);
        means.push(d.mean);
        records.push(with_horizon(
            ExperimentRecord::new(format!("{prefix}.distance"), params, d.mean, true).se(d.se),
            h,
        ));
    }
    for k in 1..horizons.len() {
        let (diff, ok) = decreased(&distances[k - 1], &distances[k], tol.trend_factor);
        records.push(with_horizon(
            ExperimentRecord::new(format!("{prefix}.decrease"), params, diff.mean, ok)
                .se(diff.se)
                .threshold(tol.trend_factor * diff.se),
            horizons[k],
        ));
    }
    let ratio = shrink_ratio(means[0], *means.last().expect("nonempty grid"));
    let halving = ExperimentRecord::new(format!("{prefix}.halving"), params, ratio, ratio < 0.5).threshold(0.5);
    records.push(if halving_gates { halving } else { halving.diagnostic() });
    records
}

pub(crate) fn qn_convergence_suite(config: &ExperimentConfig) -> Result<SuiteReport, VerifyError> {
    let params = &config.params;
    let grid = &config.n_grid;
    struct Sample {
        q: Vec<f64>,
        far: Vec<f64>,
        limit: f64,
    }
    let samples = per_sample(config.samples, |i| {
        let env = config.environment(i);
        let poly = Polymer::new(&env, params)?;
        let values = poly.density_qn_series(grid)?;
        let limit = poly.limit_density(config.k_horizon, None)?.value;
        Ok(Sample {
            q: values.iter().map(|v| v.q).collect(),
            far: values.iter().map(|v| v.far_mass(config.big_a)).collect(),
            limit,
        })
    })?;
    let densities: Vec<Vec<f64>> = (0..grid.len()).map(|k| samples.iter().map(|s| s.q[k]).collect()).collect();
    let distances: Vec<Vec<f64>> = (0..grid.len())
        .map(|k| samples.iter().map(|s| (s.q[k] - s.limit).abs()).collect())
        .collect();
    let horizons: Vec<(u32, Option<u32>)> = grid.iter().map(|&n| (n, None)).collect();
    let mut records = trend_records(config, "qn", &horizons, &densities, &distances, true);
    for (k, &n) in grid.iter().enumerate() {
        let far: Vec<f64> = samples.iter().map(|s| s.far[k]).collect();
        let est = Estimate::of(&far);
        let limit = config.tolerances.far_mass_limit;
        records.push(
            ExperimentRecord::new("qn.far_mass", params, est.mean, est.mean < limit)
                .n(n)
                .se(est.se)
                .threshold(limit),
        );
    }
    Ok(SuiteReport::gated(SuiteId::Qn, records))
}

pub(crate) fn qnm_convergence_suite(config: &ExperimentConfig) -> Result<SuiteReport, VerifyError> {
    let params = &config.params;
    let pairs: Vec<(u32, u32)> = config.n_grid.iter().copied().zip(config.m_grid.iter().copied()).collect();
    let k = config.k_horizon;
    struct Sample {
        q: Vec<f64>,
        limit: f64,
        backward: f64,
        forward: f64,
    }
    let samples = per_sample(config.samples, |i| {
        let env = config.environment(i);
        let poly = Polymer::new(&env, params)?;
        let q = pairs
            .iter()
            .map(|&(n, m)| poly.density_qnm(n, m).map(|v| v.q))
            .collect::<Result<Vec<_>, _>>()?;
        let limit = poly.limit_density(k, Some(k))?;
        Ok(Sample {
            q,
            limit: limit.value,
            backward: limit.backward_w,
            forward: limit.forward_w.expect("forward factor requested"),
        })
    })?;
    let densities: Vec<Vec<f64>> = (0..pairs.len()).map(|j| samples.iter().map(|s| s.q[j]).collect()).collect();
    let distances: Vec<Vec<f64>> = (0..pairs.len())
        .map(|j| samples.iter().map(|s| (s.q[j] - s.limit).abs()).collect())
        .collect();
    let horizons: Vec<(u32, Option<u32>)> = pairs.iter().map(|&(n, m)| (n, Some(m))).collect();
    let mut records = trend_records(config, "qnm", &horizons, &densities, &distances, false);

    let backward: Vec<f64> = samples.iter().map(|s| s.backward).collect();
    let forward: Vec<f64> = samples.iter().map(|s| s.forward).collect();
    let r = correlation(&backward, &forward);
    let r = if r.is_finite() { r } else { 0.0 };
    let se = fisher_se(samples.len());
    let bound = config.tolerances.se_factor * se;
    records.push(
        ExperimentRecord::new("qnm.factor_correlation", params, r, r.atanh().abs() <= bound)
            .n(k)
            .m(k)
            .se(se)
            .threshold(bound.tanh()),
    );
    Ok(SuiteReport::gated(SuiteId::Qnm, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_of_vanishing_distances() {
        assert_eq!(shrink_ratio(0.0, 0.0), 0.0);
        assert_eq!(shrink_ratio(0.4, 0.1), 0.25);
    }
}
