//! Records table, summary document and manifest hash.

use std::io::Write;

use polymerlab::verify::{ExperimentRecord, SuiteReport};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::render_config;
use crate::{RunManifest, CONFIG_FILE, RECORDS_FILE, SUMMARY_FILE};

pub const CSV_HEADER: [&str; 12] = [
    "experiment", "dim", "law", "beta", "N", "M", "u", "statistic", "std_error", "threshold", "pass", "seconds",
];

/// Prefix marking rows that are reported but do not decide a suite's status.
pub const DIAGNOSTIC_PREFIX: &str = "diag:";

/// Shortest round-trip form; scientific notation outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    let v = v + 0.0;
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn opt_u32(v: Option<u32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn row(r: &ExperimentRecord) -> [String; 12] {
    let experiment = if r.gating {
        r.experiment.clone()
    } else {
        format!("{DIAGNOSTIC_PREFIX}{}", r.experiment)
    };
    [
        experiment,
        r.dim.to_string(),
        r.law.to_string(),
        fmt_f64(r.beta),
        opt_u32(r.n),
        opt_u32(r.m),
        opt(r.u),
        fmt_f64(r.statistic),
        opt(r.std_error),
        opt(r.threshold),
        r.pass.to_string(),
        opt(r.seconds),
    ]
}

/// Writes every record of every report, in run order, under [`CSV_HEADER`].
pub fn write_records<W: Write>(reports: &[SuiteReport], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for report in reports {
        for r in &report.records {
            w.write_record(row(r))?;
        }
    }
    w.flush()
}

/// SHA-256 over the artifact version, the resolved configuration and the
/// suite list: the inputs that determine every record.
pub fn manifest_hash(manifest: &RunManifest) -> String {
    let mut h = Sha256::new();
    h.update(format!("polymerlab {}\n", env!("CARGO_PKG_VERSION")));
    h.update(render_config(&manifest.config));
    let suites: Vec<&str> = manifest.suites.iter().map(|s| s.name()).collect();
    h.update(format!("suites = {}\n", suites.join(", ")));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn summary_json(manifest: &RunManifest, reports: &[SuiteReport], exit: i32, hash: &str) -> Value {
    let config: serde_json::Map<String, Value> = render_config(&manifest.config)
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
        .collect();
    let suites: Vec<Value> = reports
        .iter()
        .map(|r| {
            let failed: Vec<&str> = r
                .records
                .iter()
                .filter(|x| x.gating && !x.pass)
                .map(|x| x.experiment.as_str())
                .collect();
            json!({
                "suite": r.suite.name(),
                "status": r.status.label(),
                "records": r.records.len(),
                "failed_records": failed,
                "seconds": r.seconds,
            })
        })
        .collect();
    json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "manifest_sha256": hash,
        "config_path": manifest.config_path.as_ref().map(|p| p.display().to_string()),
        "output_dir": manifest.out_dir.display().to_string(),
        "master_seed": manifest.config.experiment.master_seed,
        "config": config,
        "suites": suites,
        "exit_code": exit,
        "files": [RECORDS_FILE, CONFIG_FILE, SUMMARY_FILE],
    })
}
