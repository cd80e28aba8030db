//! Monte Carlo and exact-enumeration experiment suites.
//!
//! Every suite turns one theorem-level statement into a list of
//! [`ExperimentRecord`]s with a statistic, its standard error, the threshold
//! it was compared against and a pass flag. Per-sample work runs in parallel
//! over environment samples; aggregation happens afterwards in sample order,
//! so records do not depend on the thread count.

mod collision;
mod concentration;
mod density;
mod diffusion;
mod llt;
mod moments;
pub mod stats;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::disorder::{DisorderLaw, ModelParams, SampledEnvironment};
use crate::engine::EngineError;
use crate::lattice::{collision_green_function, CollisionEstimate, LatticeError};

pub use collision::{exact_overlap_law, geometric_law, l2_threshold};
pub use moments::pair_overlap_moment;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl VerifyError {
    /// True when the failure is a window or memory capacity limit.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            VerifyError::Lattice(LatticeError::Capacity { .. })
                | VerifyError::Engine(EngineError::Lattice(LatticeError::Capacity { .. }))
        )
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> VerifyError {
    VerifyError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Pass thresholds shared by the suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Width, in standard errors, of "equal within MC error".
    pub se_factor: f64,
    /// Standard errors a paired decrease must exceed.
    pub trend_factor: f64,
    /// Allowed relative deviation of the diffusivity ratio.
    pub diffusion_tol: f64,
    /// Allowed relative deviation of each coordinate share from `1/d`.
    pub share_tol: f64,
    /// Largest admissible mass outside the `A√N` window.
    pub far_mass_limit: f64,
    /// Largest admissible max/min ratio of variances across the grid.
    pub variance_ratio_limit: f64,
    /// Tolerance of exact (enumerated) identities.
    pub exact_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            se_factor: 4.0,
            trend_factor: 2.0,
            diffusion_tol: 0.05,
            share_tol: 0.10,
            far_mass_limit: 0.01,
            variance_ratio_limit: 3.0,
            exact_tol: 1e-10,
        }
    }
}

/// Everything a run needs besides the list of suites.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub n_grid: Vec<u32>,
    /// Forward horizons paired with `n_grid` in the `q_{N,M}` suite.
    pub m_grid: Vec<u32>,
    pub samples: usize,
    pub master_seed: u64,
    pub u_grid: Vec<f64>,
    /// Window constant `A` in `|x| < A√N`.
    pub big_a: f64,
    /// Exponent of the splitting length `l_N = max(1, ⌊N^α⌋)`.
    pub alpha: f64,
    /// Finite proxy `K` for the infinite horizon.
    pub k_horizon: u32,
    /// Truncation time of the collision series.
    pub pi_t_max: u32,
    pub overlap_steps: u32,
    pub overlap_pairs: u64,
    pub tolerances: Tolerances,
}

pub const DEFAULT_DIM: usize = 3;
pub const DEFAULT_PI_T_MAX: u32 = 2000;
/// β used when the second-moment threshold is infinite.
pub const UNBOUNDED_THRESHOLD_BETA: f64 = 1.0;

impl ExperimentConfig {
    /// Defaults for `(dim, law)`, with `β` at half the `L²` threshold when not given.
    pub fn new(dim: usize, law: DisorderLaw, beta: Option<f64>) -> Result<Self, VerifyError> {
        let beta = match beta {
            Some(b) => b,
            None => default_beta(dim, law, DEFAULT_PI_T_MAX)?,
        };
        let params = ModelParams::new(dim, beta, law).map_err(|e| invalid("beta", e.to_string()))?;
        let config = ExperimentConfig {
            params,
            n_grid: vec![8, 16, 24],
            m_grid: vec![8, 16, 24],
            samples: 2000,
            master_seed: 1,
            u_grid: vec![0.5, 1.0, 1.5, 2.0],
            big_a: 5.0,
            alpha: 0.3,
            k_horizon: 32,
            pi_t_max: DEFAULT_PI_T_MAX,
            overlap_steps: 400,
            overlap_pairs: 100_000,
            tolerances: Tolerances::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.samples < 100 {
            return Err(invalid("samples", format!("Monte Carlo suites need at least 100 samples, got {}", self.samples)));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(invalid("alpha", format!("need 0 < α < 1/2, got {}", self.alpha)));
        }
        if self.u_grid.is_empty() || self.u_grid.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
            return Err(invalid("u_grid", "deviation levels must be positive and finite"));
        }
        if self.u_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("u_grid", "deviation levels must be strictly increasing"));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(invalid("n_grid", "horizons must be positive"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("n_grid", "horizons must be strictly increasing"));
        }
        if self.m_grid.len() != self.n_grid.len() {
            return Err(invalid("m_grid", "needs one forward horizon per entry of n_grid"));
        }
        if !(self.big_a.is_finite() && self.big_a > 0.0) {
            return Err(invalid("big_a", "window constant must be positive"));
        }
        if self.k_horizon == 0 {
            return Err(invalid("k_horizon", "limit horizon must be positive"));
        }
        if self.pi_t_max < 20 {
            return Err(invalid("pi_t_max", "collision series needs at least 20 terms"));
        }
        if self.overlap_pairs == 0 {
            return Err(invalid("overlap_pairs", "need at least one walk pair"));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("se_factor", t.se_factor),
            ("trend_factor", t.trend_factor),
            ("diffusion_tol", t.diffusion_tol),
            ("share_tol", t.share_tol),
            ("far_mass_limit", t.far_mass_limit),
            ("variance_ratio_limit", t.variance_ratio_limit),
            ("exact_tol", t.exact_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(VerifyError::Invalid {
                    field: name,
                    reason: format!("tolerance must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// `l_N = max(1, ⌊N^α⌋)`.
    pub fn splitting_length(&self, n: u32) -> u32 {
        ((n as f64).powf(self.alpha).floor() as u32).max(1)
    }

    pub(crate) fn environment(&self, sample: usize) -> SampledEnvironment {
        SampledEnvironment::new(self.params.dim, self.params.law, self.master_seed, sample as u64)
    }
}

/// Half the `L²` threshold for `(dim, law)`; [`UNBOUNDED_THRESHOLD_BETA`]
/// when every β satisfies the condition and 0 in recurrent dimensions.
pub fn default_beta(dim: usize, law: DisorderLaw, pi_t_max: u32) -> Result<f64, VerifyError> {
    let pi = collision_green_function(dim, pi_t_max)?;
    Ok(match l2_threshold(law, pi.pi_upper()) {
        Some(b) => 0.5 * b,
        None => UNBOUNDED_THRESHOLD_BETA,
    })
}

/// One row of the records table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub dim: usize,
    pub law: DisorderLaw,
    pub beta: f64,
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub u: Option<f64>,
    pub statistic: f64,
    pub std_error: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
    /// Diagnostic rows are reported but never decide the suite status.
    pub gating: bool,
    pub seconds: Option<f64>,
}

impl ExperimentRecord {
    pub fn new(experiment: impl Into<String>, params: &ModelParams, statistic: f64, pass: bool) -> Self {
        ExperimentRecord {
            experiment: experiment.into(),
            dim: params.dim,
            law: params.law,
            beta: params.beta,
            n: None,
            m: None,
            u: None,
            statistic,
            std_error: None,
            threshold: None,
            pass,
            gating: true,
            seconds: None,
        }
    }

    pub fn n(mut self, n: u32) -> Self {
        self.n = Some(n);
        self
    }

    pub fn m(mut self, m: u32) -> Self {
        self.m = Some(m);
        self
    }

    pub fn u(mut self, u: f64) -> Self {
        self.u = Some(u);
        self
    }

    pub fn se(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }

    pub fn threshold(mut self, t: f64) -> Self {
        self.threshold = Some(t);
        self
    }

    pub fn diagnostic(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuiteId {
    Pi,
    L2Check,
    Moments,
    Martingale,
    Concentration,
    Qn,
    Qnm,
    Llt,
    Diffusion,
}

impl SuiteId {
    /// Dependency order.
    pub const ALL: [SuiteId; 9] = [
        SuiteId::Pi,
        SuiteId::L2Check,
        SuiteId::Moments,
        SuiteId::Martingale,
        SuiteId::Concentration,
        SuiteId::Qn,
        SuiteId::Qnm,
        SuiteId::Llt,
        SuiteId::Diffusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Pi => "pi",
            SuiteId::L2Check => "l2check",
            SuiteId::Moments => "moments",
            SuiteId::Martingale => "martingale",
            SuiteId::Concentration => "conc",
            SuiteId::Qn => "qn",
            SuiteId::Qnm => "qnm",
            SuiteId::Llt => "llt",
            SuiteId::Diffusion => "diffusion",
        }
    }

    /// Suites whose statements assume the `L²` condition.
    pub fn needs_l2(self) -> bool {
        matches!(self, SuiteId::Qn | SuiteId::Qnm | SuiteId::Llt | SuiteId::Diffusion)
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SuiteStatus {
    Pass,
    Fail,
    /// Refused because a hypothesis of the tested statement does not hold.
    Skipped(String),
    /// Run outside the proven setting; reported, never counted as a failure.
    Exploratory { passed: bool },
    Error { message: String, capacity: bool },
}

impl SuiteStatus {
    /// Pass, legitimate skip, or exploratory.
    pub fn is_ok(&self) -> bool {
        matches!(self, SuiteStatus::Pass | SuiteStatus::Skipped(_) | SuiteStatus::Exploratory { .. })
    }

    pub fn label(&self) -> String {
        match self {
            SuiteStatus::Pass => "pass".into(),
            SuiteStatus::Fail => "fail".into(),
            SuiteStatus::Skipped(why) => format!("skipped: {why}"),
            SuiteStatus::Exploratory { passed } => {
                format!("exploratory ({})", if *passed { "pass" } else { "fail" })
            }
            SuiteStatus::Error { message, .. } => format!("error: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: SuiteId,
    pub status: SuiteStatus,
    pub records: Vec<ExperimentRecord>,
    pub seconds: f64,
}

impl SuiteReport {
    fn gated(suite: SuiteId, records: Vec<ExperimentRecord>) -> Self {
        let passed = records.iter().filter(|r| r.gating).all(|r| r.pass);
        SuiteReport {
            suite,
            status: if passed { SuiteStatus::Pass } else { SuiteStatus::Fail },
            records,
            seconds: 0.0,
        }
    }

    fn skipped(suite: SuiteId, why: &str) -> Self {
        SuiteReport {
            suite,
            status: SuiteStatus::Skipped(why.into()),
            records: Vec::new(),
            seconds: 0.0,
        }
    }

    fn error(suite: SuiteId, e: &VerifyError) -> Self {
        SuiteReport {
            suite,
            status: SuiteStatus::Error {
                message: e.to_string(),
                capacity: e.is_capacity(),
            },
            records: Vec::new(),
            seconds: 0.0,
        }
    }
}

/// Runtime switches that do not affect any statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Fill the `seconds` column of every record with its suite's wall time.
    pub record_timings: bool,
}

/// Results shared between suites of one run.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub collision: CollisionEstimate,
    pub l2_holds: bool,
}

impl RunContext {
    pub fn new(config: &ExperimentConfig) -> Result<Self, VerifyError> {
        let collision = collision_green_function(config.params.dim, config.pi_t_max)?;
        let l2_holds = collision::l2_margin(&config.params, &collision) > 0.0;
        Ok(RunContext { collision, l2_holds })
    }
}

pub const HYPOTHESIS_FAILED: &str = "hypothesis failed";

/// Runs the requested suites in dependency order.
pub fn run_suites(config: &ExperimentConfig, suites: &[SuiteId], options: RunOptions) -> Result<Vec<SuiteReport>, VerifyError> {
    config.validate()?;
    let context = RunContext::new(config)?;
    let mut ordered: Vec<SuiteId> = suites.to_vec();
    ordered.sort();
    ordered.dedup();
    Ok(ordered
        .into_iter()
        .map(|id| run_suite(id, config, &context, options))
        .collect())
}

pub fn run_suite(id: SuiteId, config: &ExperimentConfig, context: &RunContext, options: RunOptions) -> SuiteReport {
    let start = Instant::now();
    let mut report = if id.needs_l2() && !context.l2_holds {
        SuiteReport::skipped(id, HYPOTHESIS_FAILED)
    } else {
        let result = match id {
            SuiteId::Pi => collision::pi_suite(config, &context.collision),
            SuiteId::L2Check => Ok(SuiteReport::gated(id, vec![collision::check_l2_condition(&config.params, &context.collision)])),
            SuiteId::Moments => moments::second_moment_suite(config),
            SuiteId::Martingale => moments::martingale_suite(config),
            SuiteId::Concentration => concentration::concentration_suite(config),
            SuiteId::Qn => density::qn_convergence_suite(config),
            SuiteId::Qnm => density::qnm_convergence_suite(config),
            SuiteId::Llt => llt::llt_decay_suite(config),
            SuiteId::Diffusion => diffusion::diffusivity_suite(config),
        };
        result.unwrap_or_else(|e| SuiteReport::error(id, &e))
    };
    report.seconds = start.elapsed().as_secs_f64();
    if options.record_timings {
        for r in &mut report.records {
            r.seconds = Some(report.seconds);
        }
    }
    report
}

/// Evaluates `f` on samples `0..samples` in parallel, returning results in sample order.
pub(crate) fn per_sample<T, F>(samples: usize, f: F) -> Result<Vec<T>, VerifyError>
where
    T: Send,
    F: Fn(usize) -> Result<T, VerifyError> + Sync + Send,
{
    (0..samples).into_par_iter().map(f).collect()
}

/// Values this small are rounding noise around an exact zero.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// `a` decreased to `b` beyond `factor` standard errors of the paired difference,
/// or both vanish up to rounding.
pub(crate) fn decreased(a: &[f64], b: &[f64], factor: f64) -> (stats::Estimate, bool) {
    let diff = stats::Estimate::paired_difference(a, b);
    let zero = a.iter().chain(b).all(|v| v.abs() <= ROUNDING_FLOOR);
    (diff, zero || diff.mean > factor * diff.se)
}

/// `|mean − target| ≤ factor · se`, up to rounding.
pub(crate) fn within_se(est: stats::Estimate, target: f64, factor: f64) -> bool {
    (est.mean - target).abs() <= factor * est.se + ROUNDING_FLOOR
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::new(3, DisorderLaw::StandardGaussian, None).unwrap();
        let threshold = l2_threshold(DisorderLaw::StandardGaussian, collision_green_function(3, 2000).unwrap().pi_upper()).unwrap();
        assert!((c.params.beta - 0.5 * threshold).abs() < 1e-9);
        assert_eq!(c.splitting_length(24), 2);
        assert_eq!(c.splitting_length(1), 1);
    }

    #[test]
    fn invariants_are_enforced() {
        let mut c = ExperimentConfig::new(3, DisorderLaw::UniformBounded, Some(0.4)).unwrap();
        c.alpha = 0.6;
        assert!(matches!(c.validate(), Err(VerifyError::Invalid { field: "alpha", .. })));
        c.alpha = 0.3;
        c.u_grid = vec![1.0, 0.5];
        assert!(matches!(c.validate(), Err(VerifyError::Invalid { field: "u_grid", .. })));
        c.u_grid = vec![0.5];
        c.samples = 99;
        assert!(matches!(c.validate(), Err(VerifyError::Invalid { field: "samples", .. })));
    }

    #[test]
    fn recurrent_default_beta_is_zero() {
        assert_eq!(default_beta(1, DisorderLaw::StandardGaussian, 2000).unwrap(), 0.0);
        assert_eq!(default_beta(3, DisorderLaw::Rademacher, 2000).unwrap(), UNBOUNDED_THRESHOLD_BETA);
    }

    #[test]
    fn suite_names_round_trip() {
        for id in SuiteId::ALL {
            assert_eq!(id.name().parse::<SuiteId>().unwrap(), id);
        }
        assert!("nope".parse::<SuiteId>().is_err());
    }

    #[test]
    fn zero_trend_counts_as_decrease() {
        let (_, ok) = decreased(&[0.0; 4], &[0.0; 4], 2.0);
        assert!(ok);
        let (_, ok) = decreased(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], 2.0);
        assert!(!ok);
    }
}
