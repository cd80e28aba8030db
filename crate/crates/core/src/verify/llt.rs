//! Decay of the local-limit remainder `R_{−N,0}(x, 0)`.

use crate::disorder::ModelParams;
use crate::engine::{within_diffusive_window, LltTerms, Polymer};
use crate::lattice::l1_norm;

use super::stats::Estimate;
use super::{decreased, per_sample, ExperimentConfig, ExperimentRecord, SuiteId, SuiteReport, VerifyError};

/// Samples of the β = 0 control.
const CONTROL_SAMPLES: usize = 4;

/// `{0, s·e₁, s·(e₁+e₂)}` (or `{0, s, 2s}` on the line) with `s = ⌊√N⌋`,
/// each moved to the parity class reachable in `N` steps and kept only
/// inside `|x| < A√N`.
pub fn probe_set(dim: usize, n: u32, big_a: f64) -> Vec<Vec<i32>> {
    let s = (n as f64).sqrt().floor() as i32;
    let mut base = vec![vec![0; dim]];
    let mut along = vec![0; dim];
    along[0] = s;
    base.push(along);
    let mut diagonal = vec![0; dim];
    if dim >= 2 {
        diagonal[0] = s;
        diagonal[1] = s;
    } else {
        diagonal[0] = 2 * s;
    }
    base.push(diagonal);
    let mut out: Vec<Vec<i32>> = Vec::new();
    for mut x in base {
        if (l1_norm(&x) - n as i64).rem_euclid(2) == 1 {
            x[0] += 1;
        }
        if within_diffusive_window(&x, big_a, n) && !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn probe_terms(
    config: &ExperimentConfig,
    params: &ModelParams,
    sample: usize,
    probes: &[Vec<Vec<i32>>],
) -> Result<Vec<Vec<LltTerms>>, VerifyError> {
    let env = config.environment(sample);
    let poly = Polymer::new(&env, params)?;
    config
        .n_grid
        .iter()
        .zip(probes)
        .map(|(&n, xs)| Ok(poly.llt_probes(n, config.splitting_length(n), xs)?))
        .collect()
}

pub(crate) fn llt_decay_suite(config: &ExperimentConfig) -> Result<SuiteReport, VerifyError> {
    let params = &config.params;
    let tol = &config.tolerances;
    let probes: Vec<Vec<Vec<i32>>> = config
        .n_grid
        .iter()
        .map(|&n| probe_set(params.dim, n, config.big_a))
        .collect();
    let terms = per_sample(config.samples, |i| probe_terms(config, params, i, &probes))?;

    let mut records = Vec::new();
    let mut argmax_series: Vec<Vec<f64>> = Vec::new();
    for (k, &n) in config.n_grid.iter().enumerate() {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for j in 0..probes[k].len() {
            let r2: Vec<f64> = terms.iter().map(|t| t[k][j].remainder.powi(2)).collect();
            let est = Estimate::of(&r2);
            records.push(
                ExperimentRecord::new(format!("llt.r2.probe{j}"), params, est.mean, true)
                    .n(n)
                    .se(est.se)
                    .diagnostic(),
            );
            if best.as_ref().is_none_or(|(m, _)| est.mean > *m) {
                best = Some((est.mean, r2));
            }
        }
        let (max, series) = best.expect("probe set contains the origin or its neighbour");
        records.push(ExperimentRecord::new("llt.max_r2", params, max, true).n(n).se(Estimate::of(&series).se));
        argmax_series.push(series);

        let r2: Vec<f64> = terms.iter().map(|t| t[k][0].remainder.powi(2)).collect();
        let c2: Vec<f64> = terms.iter().map(|t| (t[k][0].conditional - 1.0).powi(2)).collect();
        let f2: Vec<f64> = terms
            .iter()
            .map(|t| {
                let p = &t[k][0];
                (p.forward_factor * p.backward_factor * p.site_factor - 1.0).powi(2)
            })
            .collect();
        let envelope = (Estimate::of(&c2).mean.sqrt() + Estimate::of(&f2).mean.sqrt()).powi(2);
        let value = Estimate::of(&r2).mean;
        records.push(
            ExperimentRecord::new("llt.envelope", params, value, value <= envelope * (1.0 + 1e-12))
                .n(n)
                .threshold(envelope),
        );
    }
    for k in 1..config.n_grid.len() {
        let (diff, ok) = decreased(&argmax_series[k - 1], &argmax_series[k], tol.trend_factor);
        records.push(
            ExperimentRecord::new("llt.decrease", params, diff.mean, ok)
                .n(config.n_grid[k])
                .se(diff.se)
                .threshold(tol.trend_factor * diff.se),
        );
    }

    let flat = params.with_beta(0.0).map_err(|e| super::invalid("beta", e.to_string()))?;
    let mut worst: f64 = 0.0;
    for i in 0..CONTROL_SAMPLES {
        for per_n in probe_terms(config, &flat, i, &probes)? {
            for t in per_n {
                worst = worst.max(t.remainder.abs());
            }
        }
    }
    records.push(ExperimentRecord::new("llt.beta0", &flat, worst, worst == 0.0).threshold(0.0));
    Ok(SuiteReport::gated(SuiteId::Llt, records))
}
