//! Gaussian approximation of the two-point compound Poisson law.
//!
//! `Y_t = eps0 (P_1 - P_2)` with independent `P_i ~ Poisson(t / (2 eps0^2))` is the
//! pure-jump Lévy process with measure `(2 eps0^2)^-1 (δ_{eps0} + δ_{-eps0})` at time
//! `t`. It lives on the lattice `eps0 Z`, so its W2 distance to `N(0, t)` is of order
//! `min(eps0^2, t)` from above and from below.

use rayon::prelude::*;

use crate::error::Result;
use crate::increment::PoissonCount;
use crate::rng::{derive_key, substream, tag};
use crate::wasserstein::{w2_to_gaussian_with, BootstrapConfig};

use super::config::CltConfig;
use super::report::{Check, ExperimentOutput, RateReport, ReportRow};
use super::fit_rows;

/// `M` draws of `Y_t` and the mean number of jumps per draw.
pub fn sample_two_point_process(eps0: f64, t: f64, samples: usize, seed: u64) -> Result<(Vec<f64>, f64)> {
    let lambda = PoissonCount::new(t / (2.0 * eps0 * eps0))?;
    let mut rng = substream(seed, &[tag::SAMPLES, eps0.to_bits(), t.to_bits()]);
    let mut values = Vec::with_capacity(samples);
    let mut jumps = 0u64;
    for _ in 0..samples {
        let p1 = lambda.sample(&mut rng);
        let p2 = lambda.sample(&mut rng);
        jumps += p1 + p2;
        values.push(eps0 * (p1 as f64 - p2 as f64));
    }
    Ok((values, jumps as f64 / samples as f64))
}

struct Point {
    eps0: f64,
    t: f64,
    in_fit: bool,
}

fn grid(cfg: &CltConfig) -> Vec<Point> {
    let mut points: Vec<Point> = Vec::new();
    let mut push = |eps0: f64, t: f64, in_fit: bool| {
        if let Some(p) = points.iter_mut().find(|p| p.eps0 == eps0 && p.t == t) {
            p.in_fit |= in_fit;
        } else {
            points.push(Point { eps0, t, in_fit });
        }
    };
    for &e in &cfg.eps0 {
        let mut ts: Vec<f64> = cfg.t_over_eps0_sq.iter().map(|f| f * e * e).collect();
        ts.extend(&cfg.t_absolute);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        for t in ts {
            push(e, t, false);
        }
    }
    for &e in &cfg.slope_eps0 {
        push(e, cfg.slope_time, true);
    }
    points
}

/// Shared by `clt-check` and `clt-lower-bound`; `cfg` selects which bounds are asserted.
pub fn run_clt(name: &str, cfg: &CltConfig, seed: u64) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let points = grid(cfg);
    let estimates = points
        .par_iter()
        .map(|p| {
            let (values, jumps) = sample_two_point_process(p.eps0, p.t, cfg.samples, seed)?;
            // m_2 = 1 for the two-point family, so the target variance is t.
            let boot = BootstrapConfig::with_seed(derive_key(seed, &[p.eps0.to_bits(), p.t.to_bits()]));
            let w = w2_to_gaussian_with(&values, 0.0, p.t, &boot)?;
            Ok((w, jumps))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = RateReport::new(name, "eps0", &["t", "bound", "ratio", "fit"]);
    for (p, (w, jumps)) in points.iter().zip(&estimates) {
        let bound = (p.eps0 * p.eps0).min(p.t);
        report.rows.push(ReportRow {
            param: p.eps0,
            error: w.value_squared,
            ci: w.bootstrap_ci_half_width,
            cost: *jumps,
            extras: vec![p.t, bound, w.value_squared / bound, if p.in_fit { 1.0 } else { 0.0 }],
            in_fit: p.in_fit,
        });
    }

    let mut worst_upper = 0.0f64;
    let mut worst_lower = f64::INFINITY;
    for r in &report.rows {
        let ratio = r.extras[2];
        worst_upper = worst_upper.max(ratio);
        worst_lower = worst_lower.min(ratio);
    }
    if cfg.check_upper {
        report.checks.push(Check::new(
            "upper bound",
            worst_upper <= cfg.upper_cap,
            format!(
                "max W2^2 / min(eps0^2, t) = {worst_upper:.4} against empirical ceiling {}",
                cfg.upper_cap
            ),
        ));
    }
    if cfg.check_lower {
        report.checks.push(Check::new(
            "lower bound",
            worst_lower >= cfg.lower_floor,
            format!(
                "min W2^2 / min(eps0^2, t) = {worst_lower:.4} against empirical floor {}",
                cfg.lower_floor
            ),
        ));
    }
    report.slope_bounds = cfg.slope;
    fit_rows(&mut report)?;
    report.notes.push(format!(
        "W2^2 against N(0, t) from {} draws per point, midpoint quantile estimator; ci is a 200-resample percentile bootstrap",
        cfg.samples
    ));
    report.notes.push(format!("slope fit over rows with t = {}", cfg.slope_time));
    Ok(ExperimentOutput {
        reports: vec![report],
    })
}
