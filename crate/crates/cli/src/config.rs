//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use polymerlab::verify::{ExperimentConfig, VerifyError};
use polymerlab::DisorderLaw;
use thiserror::Error;

use crate::output::fmt_f64;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("`{key}`: cannot parse `{value}`: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(#[from] VerifyError),
}

/// Every key a configuration file may set, in the order they are echoed.
pub const KEYS: [&str; 22] = [
    "dim",
    "law",
    "beta",
    "n_grid",
    "m_grid",
    "samples",
    "seed",
    "u_grid",
    "big_a",
    "alpha",
    "k_horizon",
    "pi_t_max",
    "overlap_steps",
    "overlap_pairs",
    "se_factor",
    "trend_factor",
    "diffusion_tol",
    "share_tol",
    "far_mass_limit",
    "variance_ratio_limit",
    "exact_tol",
    "record_timings",
];

/// Raw settings keyed by name, before validation.
pub type Settings = BTreeMap<String, String>;

/// Splits a configuration text into settings. `#` starts a comment.
pub fn parse_settings(text: &str) -> Result<Settings, ConfigError> {
    let mut out = Settings::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: line.to_string(),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: i + 1,
                key: key.to_string(),
            });
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate {
                line: i + 1,
                key: key.to_string(),
            });
        }
    }
    Ok(out)
}

fn value<T: std::str::FromStr>(settings: &Settings, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    settings
        .get(key)
        .map(|v| {
            v.parse::<T>().map_err(|e| ConfigError::Value {
                key: key.into(),
                value: v.clone(),
                reason: e.to_string(),
            })
        })
        .transpose()
}

fn list<T: std::str::FromStr>(settings: &Settings, key: &str) -> Result<Option<Vec<T>>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    settings
        .get(key)
        .map(|v| {
            v.split(',')
                .map(|item| {
                    item.trim().parse::<T>().map_err(|e| ConfigError::Value {
                        key: key.into(),
                        value: v.clone(),
                        reason: e.to_string(),
                    })
                })
                .collect()
        })
        .transpose()
}

/// A validated configuration plus the run switches stored alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub experiment: ExperimentConfig,
    pub record_timings: bool,
}

/// Applies defaults to `settings` and validates the result.
pub fn resolve(settings: &Settings) -> Result<ResolvedConfig, ConfigError> {
    let dim = value::<usize>(settings, "dim")?.unwrap_or(polymerlab::verify::DEFAULT_DIM);
    let law = value::<DisorderLaw>(settings, "law")?.unwrap_or(DisorderLaw::StandardGaussian);
    let beta = value::<f64>(settings, "beta")?;
    if dim == 0 {
        return Err(ConfigError::Value {
            key: "dim".into(),
            value: "0".into(),
            reason: "dimension must be at least 1".into(),
        });
    }
    let mut c = ExperimentConfig::new(dim, law, beta)?;
    if let Some(n) = list(settings, "n_grid")? {
        c.m_grid = n.clone();
        c.n_grid = n;
    }
    if let Some(m) = list(settings, "m_grid")? {
        c.m_grid = m;
    }
    if let Some(v) = value(settings, "samples")? {
        c.samples = v;
    }
    if let Some(v) = value(settings, "seed")? {
        c.master_seed = v;
    }
    if let Some(v) = list(settings, "u_grid")? {
        c.u_grid = v;
    }
    if let Some(v) = value(settings, "big_a")? {
        c.big_a = v;
    }
    if let Some(v) = value(settings, "alpha")? {
        c.alpha = v;
    }
    if let Some(v) = value(settings, "k_horizon")? {
        c.k_horizon = v;
    }
    if let Some(v) = value(settings, "pi_t_max")? {
        c.pi_t_max = v;
    }
    if let Some(v) = value(settings, "overlap_steps")? {
        c.overlap_steps = v;
    }
    if let Some(v) = value(settings, "overlap_pairs")? {
        c.overlap_pairs = v;
    }
    let t = &mut c.tolerances;
    for (key, slot) in [
        ("se_factor", &mut t.se_factor),
        ("trend_factor", &mut t.trend_factor),
        ("diffusion_tol", &mut t.diffusion_tol),
        ("share_tol", &mut t.share_tol),
        ("far_mass_limit", &mut t.far_mass_limit),
        ("variance_ratio_limit", &mut t.variance_ratio_limit),
        ("exact_tol", &mut t.exact_tol),
    ] {
        if let Some(v) = value(settings, key)? {
            *slot = v;
        }
    }
    c.validate()?;
    Ok(ResolvedConfig {
        experiment: c,
        record_timings: value(settings, "record_timings")?.unwrap_or(false),
    })
}

pub fn parse_config_str(text: &str) -> Result<ResolvedConfig, ConfigError> {
    resolve(&parse_settings(text)?)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ResolvedConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn join_f64(items: &[f64]) -> String {
    items.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(", ")
}

/// Every key with its resolved value, one per line, in [`KEYS`] order.
pub fn render_config(config: &ResolvedConfig) -> String {
    let c = &config.experiment;
    let t = &c.tolerances;
    let values: [String; 22] = [
        c.params.dim.to_string(),
        c.params.law.to_string(),
        fmt_f64(c.params.beta),
        join(&c.n_grid),
        join(&c.m_grid),
        c.samples.to_string(),
        c.master_seed.to_string(),
        join_f64(&c.u_grid),
        fmt_f64(c.big_a),
        fmt_f64(c.alpha),
        c.k_horizon.to_string(),
        c.pi_t_max.to_string(),
        c.overlap_steps.to_string(),
        c.overlap_pairs.to_string(),
        fmt_f64(t.se_factor),
        fmt_f64(t.trend_factor),
        fmt_f64(t.diffusion_tol),
        fmt_f64(t.share_tol),
        fmt_f64(t.far_mass_limit),
        fmt_f64(t.variance_ratio_limit),
        fmt_f64(t.exact_tol),
        config.record_timings.to_string(),
    ];
    let mut out = String::new();
    for (k, v) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config_str("").unwrap();
        assert_eq!(c.experiment.params.dim, 3);
        assert_eq!(c.experiment.n_grid, vec![8, 16, 24]);
        assert_eq!(c.experiment.samples, 2000);
        assert!(!c.record_timings);
    }

    #[test]
    fn comments_and_lists() {
        let c = parse_config_str("# run\nn_grid = 4, 6 # short\nsamples=150\nlaw = uniform\nbeta = 0.25\n").unwrap();
        assert_eq!(c.experiment.n_grid, vec![4, 6]);
        assert_eq!(c.experiment.m_grid, vec![4, 6]);
        assert_eq!(c.experiment.samples, 150);
        assert_eq!(c.experiment.params.law, DisorderLaw::UniformBounded);
        assert_eq!(c.experiment.params.beta, 0.25);
    }

    #[test]
    fn strictness() {
        assert!(matches!(parse_config_str("colour = red"), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!(parse_config_str("dim 3"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(parse_config_str("dim = 3\ndim = 2"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(parse_config_str("samples = many"), Err(ConfigError::Value { .. })));
        let e = parse_config_str("alpha = 0.6").unwrap_err().to_string();
        assert!(e.contains("alpha") && e.contains("1/2"), "{e}");
    }

    #[test]
    fn round_trip() {
        for text in ["", "dim = 1\nlaw = rademacher\nu_grid = 0.25, 0.75\nrecord_timings = true", "beta = 0.123456789\nexact_tol = 1e-11"] {
            let c = parse_config_str(text).unwrap();
            let again = parse_config_str(&render_config(&c)).unwrap();
            assert_eq!(c, again);
        }
    }
}
