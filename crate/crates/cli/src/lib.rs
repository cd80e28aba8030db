//! Configuration parsing, suite orchestration and machine-readable output
//! for the `polymerlab` command.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use polymerlab::verify::{run_suites, RunOptions, SuiteId, SuiteReport, SuiteStatus, VerifyError};

pub use config::{parse_config, parse_config_str, render_config, ConfigError, ResolvedConfig};
pub use output::{manifest_hash, write_records, CSV_HEADER};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.txt";

/// Everything needed to reproduce one run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub config: ResolvedConfig,
    pub suites: Vec<SuiteId>,
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<SuiteReport>,
    pub exit_code: i32,
    pub manifest_hash: String,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Verify(e) if e.is_capacity() => EXIT_CAPACITY,
            RunError::Verify(VerifyError::Invalid { .. }) => EXIT_CONFIG,
            _ => EXIT_FAIL,
        }
    }
}

/// 0 when every suite passed or was legitimately skipped, 3 on a capacity
/// error, 1 otherwise.
pub fn exit_code(reports: &[SuiteReport]) -> i32 {
    if reports
        .iter()
        .any(|r| matches!(r.status, SuiteStatus::Error { capacity: true, .. }))
    {
        EXIT_CAPACITY
    } else if reports.iter().all(|r| r.status.is_ok()) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Runs the manifest's suites and writes the records table, the resolved
/// configuration and the summary into the output directory.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome, RunError> {
    let options = RunOptions {
        record_timings: manifest.config.record_timings,
    };
    let reports = run_suites(&manifest.config.experiment, &manifest.suites, options)?;
    let exit = exit_code(&reports);
    let hash = manifest_hash(manifest);

    let dir = &manifest.out_dir;
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    let records_path = dir.join(RECORDS_FILE);
    let file = std::fs::File::create(&records_path).map_err(io_error(&records_path))?;
    write_records(&reports, file).map_err(io_error(&records_path))?;
    let config_path = dir.join(CONFIG_FILE);
    std::fs::write(&config_path, render_config(&manifest.config)).map_err(io_error(&config_path))?;
    let summary_path = dir.join(SUMMARY_FILE);
    let summary = output::summary_json(manifest, &reports, exit, &hash);
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n")
        .map_err(io_error(&summary_path))?;

    Ok(RunOutcome {
        reports,
        exit_code: exit,
        manifest_hash: hash,
    })
}
