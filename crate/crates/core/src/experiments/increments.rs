//! Increment-level comparisons: the coupling gap of the Gaussian-compensated increment
//! and its ordering against the neglect increment.

use rayon::prelude::*;

use crate::coupling::{sample_coupled_increment, CouplingPlan, SmallJumpModel};
use crate::error::Result;
use crate::increment::LevyTriplet;
use crate::levy_measure::LevyMeasure;
use crate::rng::{substream, tag};

use super::config::{IncrementGapConfig, NeglectConfig};
use super::report::{Check, ExperimentOutput, RateReport, ReportRow};
use super::{fit_rows, mean_with_ci};

fn squared_gaps(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect()
}

fn mean_jumps(counts: &[u64]) -> f64 {
    counts.iter().sum::<u64>() as f64 / counts.len() as f64
}

/// `E[(Δ^n - Δ^{n,eps})^2]` for two-point drivers against `δ_eps = eps0^2`.
pub fn run_increment_gap(name: &str, cfg: &IncrementGapConfig, seed: u64) -> Result<RateReport> {
    cfg.validate()?;
    let rows = cfg
        .eps0
        .par_iter()
        .enumerate()
        .map(|(i, &eps0)| {
            let triplet = LevyTriplet::new(cfg.drift, cfg.brownian, LevyMeasure::two_point(eps0)?)?;
            let plan = CouplingPlan::new(&triplet, cfg.n, cfg.eps, SmallJumpModel::Exact)?;
            let mut rng = substream(seed, &[tag::SAMPLES, 6, i as u64]);
            let batch = sample_coupled_increment(&plan, cfg.samples, None, &mut rng)?;
            let gaps = squared_gaps(&batch.delta_exact, &batch.delta_approx);
            let (gap, ci) = mean_with_ci(&gaps, seed, &[6, i as u64]);
            let delta = triplet.nu.delta_eps(cfg.eps)?;
            Ok(ReportRow {
                param: eps0,
                error: gap,
                ci,
                cost: mean_jumps(&batch.jump_counts),
                extras: vec![delta, gap / delta],
                in_fit: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = RateReport::new(name, "eps0", &["delta_eps", "ratio"]);
    report.rows = rows;
    let worst = report.rows.iter().map(|r| r.extras[1]).fold(0.0f64, f64::max);
    report.checks.push(Check::new(
        "gap bound",
        worst <= cfg.gap_cap,
        format!(
            "max gap / delta_eps = {worst:.4} against empirical ceiling {}",
            cfg.gap_cap
        ),
    ));
    report.slope_bounds = cfg.slope;
    fit_rows(&mut report)?;
    report.notes.push(format!(
        "n = {}, eps = {}, {} coupled draws per point; cost column is the mean number of large jumps",
        cfg.n, cfg.eps, cfg.samples
    ));
    Ok(report)
}

/// Neglect versus Gaussian compensation of the small jumps at `eps = eps_scale / n`.
pub fn run_neglect_vs_gauss(cfg: &NeglectConfig, seed: u64) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let triplet = cfg.driver.build()?;
    let model = if triplet.nu.is_finite_activity() {
        SmallJumpModel::Exact
    } else {
        SmallJumpModel::InnerTruncation {
            ratio: cfg.inner_ratio,
        }
    };
    let rows = cfg
        .n
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let eps = cfg.eps_scale / n as f64;
            let plan = CouplingPlan::new(&triplet, n, eps, model)?;
            let law = plan.small_jumps();
            let cdf = if cfg.cdf_samples > 0 && !law.has_lattice() && law.target_sd() > 0.0 {
                let mut rng = substream(seed, &[tag::CDF, 9, i as u64]);
                Some(law.empirical_cdf(cfg.cdf_samples, &mut rng)?)
            } else {
                None
            };
            let mut rng = substream(seed, &[tag::SAMPLES, 9, i as u64]);
            let batch = sample_coupled_increment(&plan, cfg.samples, cdf.as_ref(), &mut rng)?;
            let gauss = squared_gaps(&batch.delta_exact, &batch.delta_approx);
            let neglect = squared_gaps(&batch.delta_exact, &batch.delta_neglect);
            let (g, g_ci) = mean_with_ci(&gauss, seed, &[9, i as u64, 0]);
            let (ng, ng_ci) = mean_with_ci(&neglect, seed, &[9, i as u64, 1]);
            let delta = triplet.nu.delta_eps(eps).unwrap_or(0.0);
            let m2_over_n = triplet.nu.m2_eps(eps) / n as f64;
            let asserted = delta < m2_over_n;
            Ok(ReportRow {
                param: n as f64,
                error: g,
                ci: g_ci,
                cost: mean_jumps(&batch.jump_counts),
                extras: vec![eps, ng, ng_ci, delta, m2_over_n, if asserted { 1.0 } else { 0.0 }],
                in_fit: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = RateReport::new(
        "neglect-vs-gauss",
        "n",
        &["eps", "neglect_gap", "neglect_ci", "delta_eps", "m2eps_over_n", "asserted"],
    );
    report.rows = rows;
    let mut ok = true;
    let mut detail = Vec::new();
    for r in &report.rows {
        if r.extras[5] == 1.0 {
            let strict = r.error < r.extras[1];
            ok &= strict;
            detail.push(format!("n={}: {:.3e} {} {:.3e}", r.param, r.error, if strict { "<" } else { ">=" }, r.extras[1]));
        } else {
            detail.push(format!("n={}: not asserted (delta_eps >= m2_eps/n)", r.param));
        }
    }
    report.checks.push(Check::new(
        "gaussian gap below neglect gap",
        ok,
        detail.join("; "),
    ));
    fit_rows(&mut report)?;
    report.notes.push(format!(
        "{} coupled draws per n; both gaps share the drift, Brownian part and large jumps",
        cfg.samples
    ));
    if !triplet.nu.is_finite_activity() {
        report.notes.push(format!(
            "small jumps simulated exactly above eps/{} with the remainder below replaced by its Gaussian",
            cfg.inner_ratio
        ));
    }
    if cfg.cdf_samples == 0 {
        report.notes.push("small-jump cdf built from the coupled draws themselves".into());
    }
    Ok(ExperimentOutput {
        reports: vec![report],
    })
}
