//! Verification experiments behind the `levysim` binary.
//!
//! Each experiment reads its section of a TOML [`config::ConfigFile`], runs on a
//! fixed seed and returns an [`report::ExperimentOutput`] whose checks decide the exit
//! status. Results depend only on the seed, never on the number of threads.

pub mod clt;
pub mod config;
pub mod cost;
pub mod increments;
pub mod paths;
pub mod refinement;
pub mod report;

use std::fmt;
use std::str::FromStr;

use crate::error::{LevyError, Result};
use crate::rng::{substream, tag};
use crate::stats::{bootstrap_mean_half_width, fit_loglog, mean, MIN_FIT_POINTS};
use crate::wasserstein::BootstrapConfig;

use config::ConfigFile;
use report::{Check, ExperimentOutput, RateReport};

/// Environment variable read when no explicit thread count is given.
pub const THREADS_ENV: &str = "LEVYSIM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    CltCheck,
    CltLowerBound,
    EulerBaseline,
    SchemeRate,
    NeglectVsGauss,
    BrownianApprox,
    CostAudit,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::CltCheck,
        Experiment::CltLowerBound,
        Experiment::EulerBaseline,
        Experiment::SchemeRate,
        Experiment::NeglectVsGauss,
        Experiment::BrownianApprox,
        Experiment::CostAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CltCheck => "clt-check",
            Experiment::CltLowerBound => "clt-lower-bound",
            Experiment::EulerBaseline => "euler-baseline",
            Experiment::SchemeRate => "scheme-rate",
            Experiment::NeglectVsGauss => "neglect-vs-gauss",
            Experiment::BrownianApprox => "brownian-approx",
            Experiment::CostAudit => "cost-audit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LevyError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                LevyError::InvalidParameter(format!(
                    "unknown experiment {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Run `exp` with its section of `cfg` on the current rayon pool.
pub fn run(exp: Experiment, cfg: &ConfigFile, seed: u64) -> Result<ExperimentOutput> {
    match exp {
        Experiment::CltCheck => clt::run_clt(exp.name(), &cfg.clt_check, seed),
        Experiment::CltLowerBound => clt::run_clt(exp.name(), &cfg.clt_lower_bound, seed),
        Experiment::EulerBaseline => paths::run_euler_baseline(&cfg.euler_baseline, seed),
        Experiment::SchemeRate => paths::run_scheme_rate(&cfg.scheme_rate, seed),
        Experiment::NeglectVsGauss => increments::run_neglect_vs_gauss(&cfg.neglect_vs_gauss, seed),
        Experiment::BrownianApprox => paths::run_brownian_approx(&cfg.brownian_approx, seed),
        Experiment::CostAudit => cost::run_cost_audit(&cfg.cost_audit, seed),
    }
}

/// Thread count from `threads`, else from [`THREADS_ENV`], else rayon's default.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let threads = match threads {
        Some(t) => t,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                LevyError::InvalidParameter(format!("{THREADS_ENV} must be a thread count, got {v:?}"))
            })?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LevyError::InvalidParameter(format!("thread pool: {e}")))
}

/// [`run`] inside a dedicated pool of `threads` workers.
pub fn run_with_threads(
    exp: Experiment,
    cfg: &ConfigFile,
    seed: u64,
    threads: Option<usize>,
) -> Result<ExperimentOutput> {
    thread_pool(threads)?.install(|| run(exp, cfg, seed))
}

/// Mean of `values` and its percentile-bootstrap half-width on the stream `(seed, BOOTSTRAP, key)`.
pub(crate) fn mean_with_ci(values: &[f64], seed: u64, key: &[u64]) -> (f64, f64) {
    let boot = BootstrapConfig::default();
    let mut tags = Vec::with_capacity(key.len() + 1);
    tags.push(tag::BOOTSTRAP);
    tags.extend_from_slice(key);
    let mut rng = substream(seed, &tags);
    (
        mean(values),
        bootstrap_mean_half_width(values, boot.resamples, boot.level, &mut rng),
    )
}

/// Fit `log error` against `log param` over the rows marked `in_fit`.
///
/// With slope bounds set, fewer than [`MIN_FIT_POINTS`] rows is a configuration error
/// and a failed fit is a failed check; otherwise the fit is informational.
pub(crate) fn fit_rows(report: &mut RateReport) -> Result<()> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = report
        .rows
        .iter()
        .filter(|r| r.in_fit)
        .map(|r| (r.param, r.error))
        .unzip();
    let bounded = report.slope_bounds.is_bounded();
    if xs.len() < MIN_FIT_POINTS {
        if bounded {
            return Err(LevyError::InvalidParameter(format!(
                "{}: a slope check needs at least {MIN_FIT_POINTS} grid points, got {}",
                report.name,
                xs.len()
            )));
        }
        report
            .notes
            .push(format!("no slope fit: {} points, {MIN_FIT_POINTS} needed", xs.len()));
        return Ok(());
    }
    match fit_loglog(&xs, &ys) {
        Ok(fit) => {
            report.fit = Some(fit);
            if bounded {
                report.checks.push(Check::new(
                    "slope",
                    report.slope_bounds.contains(fit.slope),
                    format!(
                        "fitted slope {:.4} +/- {:.4} against {}",
                        fit.slope,
                        fit.slope_se,
                        report.slope_bounds.describe()
                    ),
                ));
            }
        }
        Err(e) if bounded => report.checks.push(Check::new("slope", false, e.to_string())),
        Err(e) => report.notes.push(format!("no slope fit: {e}")),
    }
    Ok(())
}
