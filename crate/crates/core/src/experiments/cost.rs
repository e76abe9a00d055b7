//! Simulation cost of the scheme for truncated stable-like drivers at `eps = eps_scale / n`.
//!
//! One unit of cost is one grid step or one simulated large jump, so a path over
//! `[0, T]` is expected to cost `T (n + F_eps)`.

use rayon::prelude::*;

use crate::error::Result;
use crate::euler::grid_steps;
use crate::increment::{make_params, LevyTriplet};
use crate::levy_measure::LevyMeasure;
use crate::rng::{substream, tag};

use super::config::{CostConfig, SlopeBounds};
use super::report::{Check, ExperimentOutput, RateReport, ReportRow};
use super::{fit_rows, mean_with_ci};

pub fn run_cost_audit(cfg: &CostConfig, seed: u64) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let sigma = cfg.sigma.build();
    let mut reports = Vec::with_capacity(cfg.regime.len());
    for (ri, regime) in cfg.regime.iter().enumerate() {
        let nu = LevyMeasure::stable_like(regime.alpha, cfg.scale, cfg.cutoff)?;
        let triplet = LevyTriplet::new(0.0, cfg.brownian, nu)?;
        let mut report = RateReport::new(
            &format!("alpha-{}", regime.alpha),
            "n",
            &["eps", "f_eps", "rel_dev"],
        );
        let mut worst = 0.0f64;
        for (gi, &n) in cfg.n.iter().enumerate() {
            let eps = cfg.eps_scale / n as f64;
            let params = make_params(&triplet, n, eps)?;
            let steps = grid_steps(n, cfg.horizon);
            let costs = (0..cfg.paths)
                .into_par_iter()
                .map(|p| {
                    let mut rng = substream(seed, &[tag::SAMPLES, 11, ri as u64, gi as u64, p as u64]);
                    let mut x = cfg.x0;
                    let mut jumps = 0u64;
                    for _ in 0..steps {
                        let (inc, c) = params.sample_gauss_compensated_one(&mut rng);
                        x += sigma.eval(x) * inc;
                        jumps += c;
                    }
                    debug_assert!(x.is_finite());
                    (steps as u64 + jumps) as f64
                })
                .collect::<Vec<f64>>();
            let (mean_cost, ci) = mean_with_ci(&costs, seed, &[11, ri as u64, gi as u64]);
            let f_eps = triplet.nu.tail_mass(eps);
            let predicted = cfg.horizon * (n as f64 + f_eps);
            let rel = (mean_cost - predicted) / predicted;
            worst = worst.max(rel.abs());
            report.rows.push(ReportRow {
                param: n as f64,
                error: mean_cost,
                ci,
                cost: predicted,
                extras: vec![eps, f_eps, rel],
                in_fit: true,
            });
        }
        report.checks.push(Check::new(
            "mean cost",
            worst <= cfg.cost_tol,
            format!(
                "max |mean - T(n + F_eps)| / T(n + F_eps) = {worst:.4} against {}",
                cfg.cost_tol
            ),
        ));
        report.slope_bounds = SlopeBounds::within(regime.alpha.max(1.0), regime.exponent_tol);
        fit_rows(&mut report)?;
        report.notes.push(format!(
            "error column is the mean simulated cost over {} paths (steps plus large jumps); cost column is T(n + F_eps)",
            cfg.paths
        ));
        reports.push(report);
    }
    Ok(ExperimentOutput { reports })
}
