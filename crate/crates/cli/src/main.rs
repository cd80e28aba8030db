use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use polymerlab::verify::SuiteId;
use polymerlab_cli::config::{parse_settings, resolve, Settings};
use polymerlab_cli::output::fmt_f64;
use polymerlab_cli::{run, RunManifest, EXIT_CONFIG};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Pi,
    L2check,
    Moments,
    Martingale,
    Conc,
    Qn,
    Qnm,
    Llt,
    Diffusion,
    All,
}

impl Command {
    fn suites(self) -> Vec<SuiteId> {
        match self {
            Command::Pi => vec![SuiteId::Pi],
            Command::L2check => vec![SuiteId::L2Check],
            Command::Moments => vec![SuiteId::Moments],
            Command::Martingale => vec![SuiteId::Martingale],
            Command::Conc => vec![SuiteId::Concentration],
            Command::Qn => vec![SuiteId::Qn],
            Command::Qnm => vec![SuiteId::Qnm],
            Command::Llt => vec![SuiteId::Llt],
            Command::Diffusion => vec![SuiteId::Diffusion],
            Command::All => SuiteId::ALL.to_vec(),
        }
    }
}

/// Exact transfer-matrix and Monte Carlo checks for directed polymers in a
/// random environment.
#[derive(Debug, Parser)]
#[command(name = "polymerlab", version)]
struct Cli {
    /// Suite to run.
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// gaussian, uniform or rademacher.
    #[arg(long)]
    law: Option<String>,
    /// Horizon grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    /// Forward horizons paired with --n.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest deviation level; the grid is 0.5, 1.0, … up to this value.
    #[arg(long)]
    umax: Option<f64>,
    /// Exponent of the splitting length l_N = ⌊N^α⌋.
    #[arg(long)]
    alpha: Option<f64>,
    /// Window constant A in |x| < A√N.
    #[arg(long = "bigA")]
    big_a: Option<f64>,
    /// Finite proxy K for the infinite horizon.
    #[arg(long)]
    khorizon: Option<u32>,
    #[arg(long, default_value = "polymerlab-out")]
    out: PathBuf,
    /// Worker threads (falls back to POLYMERLAB_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Flat `key = value` configuration file; its settings win over flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fill the seconds column of the records table.
    #[arg(long)]
    timings: bool,
}

fn u_grid(umax: f64) -> String {
    let mut grid = Vec::new();
    let mut u = 0.5;
    while u <= umax + 1e-12 {
        grid.push(u.to_string());
        u += 0.5;
    }
    if grid.is_empty() {
        grid.push(umax.to_string());
    }
    grid.join(", ")
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl Cli {
    fn flag_settings(&self) -> Vec<(&'static str, &'static str, String)> {
        let mut out = Vec::new();
        let mut push = |flag, key, v: Option<String>| {
            if let Some(v) = v {
                out.push((flag, key, v));
            }
        };
        push("--dim", "dim", self.dim.map(|v| v.to_string()));
        push("--beta", "beta", self.beta.map(|v| v.to_string()));
        push("--law", "law", self.law.clone());
        push("--n", "n_grid", self.n.as_deref().map(join));
        push("--m", "m_grid", self.m.as_deref().map(join));
        push("--samples", "samples", self.samples.map(|v| v.to_string()));
        push("--seed", "seed", self.seed.map(|v| v.to_string()));
        push("--umax", "u_grid", self.umax.map(u_grid));
        push("--alpha", "alpha", self.alpha.map(|v| v.to_string()));
        push("--bigA", "big_a", self.big_a.map(|v| v.to_string()));
        push("--khorizon", "k_horizon", self.khorizon.map(|v| v.to_string()));
        push("--timings", "record_timings", self.timings.then(|| "true".to_string()));
        out
    }
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("POLYMERLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| format!("POLYMERLAB_THREADS must be a positive integer, got `{v}`")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config_error = |msg: String| {
        eprintln!("configuration error: {msg}");
        ExitCode::from(EXIT_CONFIG as u8)
    };

    let mut settings = Settings::new();
    if let Some(path) = &cli.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return config_error(format!("cannot read {}: {e}", path.display())),
        };
        settings = match parse_settings(&text) {
            Ok(s) => s,
            Err(e) => return config_error(e.to_string()),
        };
    }
    for (flag, key, value) in cli.flag_settings() {
        match settings.get(key) {
            Some(file_value) => {
                eprintln!("warning: {flag} {value} ignored; the config file sets {key} = {file_value}");
            }
            None => {
                settings.insert(key.to_string(), value);
            }
        }
    }
    let config = match resolve(&settings) {
        Ok(c) => c,
        Err(e) => return config_error(e.to_string()),
    };
    match threads(cli.threads) {
        Ok(Some(0)) => return config_error("thread count must be positive".into()),
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                return config_error(e.to_string());
            }
        }
        Ok(None) => {}
        Err(msg) => return config_error(msg),
    }

    let manifest = RunManifest {
        config_path: cli.config.clone(),
        config,
        suites: cli.command.suites(),
        out_dir: cli.out.clone(),
    };
    let outcome = match run(&manifest) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let params = &manifest.config.experiment.params;
    println!(
        "d = {}, law = {}, beta = {}, samples = {}, seed = {}",
        params.dim, params.law, params.beta, manifest.config.experiment.samples, manifest.config.experiment.master_seed
    );
    for report in &outcome.reports {
        if let Some(pi) = report.records.iter().find(|r| r.experiment == "pi.value") {
            let width = report
                .records
                .iter()
                .find(|r| r.experiment == "pi.interval_width")
                .map_or(0.0, |r| r.statistic);
            if pi.statistic >= 1.0 {
                println!("pi_{} = 1 (recurrent)", params.dim);
            } else {
                println!("pi_{} = {:.6} (truncation interval width {:.2e})", params.dim, pi.statistic, width);
            }
        }
        println!("{}: {} ({} records, {:.1} s)", report.suite, report.status.label(), report.records.len(), report.seconds);
        for r in report.records.iter().filter(|r| r.gating && !r.pass) {
            println!(
                "  failed {} N={} M={} statistic={} threshold={}",
                r.experiment,
                opt(r.n),
                opt(r.m),
                fmt_f64(r.statistic),
                opt(r.threshold.map(fmt_f64))
            );
        }
    }
    println!("manifest {}", outcome.manifest_hash);
    println!("records written to {}", manifest.out_dir.display());
    ExitCode::from(outcome.exit_code as u8)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}
