//! Strong-error experiments on coupled paths: Euler baseline, the Gaussian-compensated
//! scheme, and the Brownian approximation of small-jump SDEs.

use crate::error::{LevyError, Result};
use crate::increment::LevyTriplet;
use crate::levy_measure::LevyMeasure;
use crate::stats::mean;

use super::config::{BrownianConfig, PathRateConfig, SlopeBounds};
use super::increments::run_increment_gap;
use super::refinement::{run_refinement, CoarseLaw, GridOutcome, RefinementSpec};
use super::report::{Check, ExperimentOutput, RateReport, ReportRow};
use super::{fit_rows, mean_with_ci};

fn reference_note(n_ref: u32) -> String {
    format!(
        "truth proxy: Euler with exact increments at n_ref = {n_ref} driven by the same noise; \
         the proxy itself carries an O(1/n_ref) strong error"
    )
}

fn refine(cfg: &PathRateConfig, triplet: &LevyTriplet, law: CoarseLaw, seed: u64) -> Result<(u32, Vec<GridOutcome>)> {
    let n_max = *cfg.n.iter().max().expect("validated nonempty");
    let n_ref = n_max
        .checked_mul(cfg.refine)
        .ok_or_else(|| LevyError::InvalidParameter("reference grid overflows".into()))?;
    let sigma = cfg.sigma.build();
    let spec = RefinementSpec {
        triplet,
        sigma: &sigma,
        x0: cfg.x0,
        horizon: cfg.horizon,
        grids: &cfg.n,
        n_ref,
        law,
        paths: cfg.paths,
        seed,
        cdf_samples: cfg.cdf_samples,
    };
    Ok((n_ref, run_refinement(&spec)?))
}

fn euler_report(name: &str, cfg: &PathRateConfig, triplet: &LevyTriplet, seed: u64) -> Result<RateReport> {
    let (n_ref, outcomes) = refine(cfg, triplet, CoarseLaw::Exact, seed)?;
    let mut report = RateReport::new(name, "n", &["inv_n", "jumps"]);
    for (gi, o) in outcomes.iter().enumerate() {
        let (err, ci) = mean_with_ci(&o.sq_sup_errors, seed, &[gi as u64]);
        let jumps = mean(&o.large_jumps.iter().map(|&j| j as f64).collect::<Vec<_>>());
        report.rows.push(ReportRow {
            param: o.n as f64,
            error: err,
            ci,
            cost: o.coarse_steps as f64 + jumps,
            extras: vec![1.0 / o.n as f64, jumps],
            in_fit: true,
        });
    }
    report.notes.push(reference_note(n_ref));
    Ok(report)
}

pub fn run_euler_baseline(cfg: &PathRateConfig, seed: u64) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let triplet = cfg.driver.build()?;
    let mut report = euler_report("euler-baseline", cfg, &triplet, seed)?;
    report.slope_bounds = cfg.slope;
    fit_rows(&mut report)?;
    Ok(ExperimentOutput {
        reports: vec![report],
    })
}

fn scheme_report(name: &str, cfg: &PathRateConfig, triplet: &LevyTriplet, seed: u64) -> Result<RateReport> {
    let law = CoarseLaw::Scheme {
        eps_scale: cfg.eps_scale,
    };
    let (n_ref, outcomes) = match refine(cfg, triplet, law, seed) {
        Err(LevyError::InfiniteActivity) => {
            return Err(LevyError::NeedsFiniteSmallActivity {
                eps: cfg.eps_scale / *cfg.n.iter().max().unwrap_or(&1) as f64,
            })
        }
        other => other?,
    };
    let nu = &triplet.nu;
    let mut report = RateReport::new(
        name,
        "n",
        &["eps", "euler_error", "euler_ci", "inv_n", "n_delta", "tail_mass"],
    );
    for (gi, o) in outcomes.iter().enumerate() {
        let (err, ci) = mean_with_ci(&o.sq_sup_errors, seed, &[gi as u64, 0]);
        let (eerr, eci) = mean_with_ci(&o.exact_sq_sup_errors, seed, &[gi as u64, 1]);
        let jumps = mean(&o.large_jumps.iter().map(|&j| j as f64).collect::<Vec<_>>());
        let n = o.n as f64;
        let n_delta = nu.delta_eps(o.eps).map_or(0.0, |d| n * d);
        report.rows.push(ReportRow {
            param: n,
            error: err,
            ci,
            cost: o.coarse_steps as f64 + jumps,
            extras: vec![o.eps, eerr, eci, 1.0 / n, n_delta, nu.tail_mass(o.eps)],
            in_fit: true,
        });
    }
    report.notes.push(reference_note(n_ref));
    report.notes.push(
        "euler_error is the plain Euler scheme with exact increments on the same noise; \
         inv_n and n_delta are the two predicted error terms 1/n and n delta_eps"
            .into(),
    );
    Ok(report)
}

pub fn run_scheme_rate(cfg: &PathRateConfig, seed: u64) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let triplet = cfg.driver.build()?;
    let mut main = scheme_report("scheme-rate", cfg, &triplet, seed)?;
    main.slope_bounds = cfg.slope;
    fit_rows(&mut main)?;
    let mut reports = vec![main];

    if cfg.degenerate_check {
        reports.push(degenerate_report(cfg, &triplet, seed)?);
    }
    if cfg.increment_gap.enabled {
        reports.push(run_increment_gap("increment-gap", &cfg.increment_gap, seed)?);
    }
    Ok(ExperimentOutput { reports })
}

/// With `ν = 0` the scheme must reproduce the Euler baseline on the same grids and seed.
fn degenerate_report(cfg: &PathRateConfig, triplet: &LevyTriplet, seed: u64) -> Result<RateReport> {
    let bare = LevyTriplet::new(triplet.drift, triplet.brownian, LevyMeasure::zero())?;
    let scheme = scheme_report("degenerate", cfg, &bare, seed)?;
    let euler = euler_report("degenerate-euler", cfg, &bare, seed)?;
    let mut report = RateReport::new("degenerate", "n", &["euler_error", "euler_ci", "abs_diff"]);
    let mut worst = 0.0f64;
    let mut all_within = true;
    for (s, e) in scheme.rows.iter().zip(&euler.rows) {
        let diff = (s.error - e.error).abs();
        let tol = s.ci.max(e.ci);
        all_within &= diff <= tol;
        worst = worst.max(diff);
        report.rows.push(ReportRow {
            param: s.param,
            error: s.error,
            ci: s.ci,
            cost: s.cost,
            extras: vec![e.error, e.ci, diff],
            in_fit: true,
        });
    }
    report.checks.push(Check::new(
        "nu = 0 matches euler-baseline",
        all_within,
        format!("max |scheme - euler| = {worst:e}, each within the larger bootstrap ci"),
    ));
    report.slope_bounds = SlopeBounds::default();
    fit_rows(&mut report)?;
    report.notes.push(
        "scheme-rate and euler-baseline rerun with the jump part removed, same grids and seed".into(),
    );
    Ok(report)
}

/// `n(eps) = ceil(eps^(-p/(p-1)))`.
pub fn internal_grid(eps: f64, p: f64) -> u32 {
    eps.powf(-p / (p - 1.0)).ceil() as u32
}

pub fn run_brownian_approx(cfg: &BrownianConfig, seed: u64) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let sigma = cfg.sigma.build();
    let mut report = RateReport::new(
        "brownian-approx",
        "eps",
        &["n", "floor", "floor_ci", "diffusion", "n_m4"],
    );
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let nu = LevyMeasure::two_point(cfg.eps0_over_eps * eps)?;
        if nu.tail_mass(eps) > 0.0 {
            return Err(LevyError::HypothesisViolation(format!(
                "the Lévy measure charges |z| > eps = {eps}"
            )));
        }
        let triplet = LevyTriplet::new(cfg.drift, cfg.brownian, nu)?;
        let n = internal_grid(eps, cfg.p);
        let n_ref = n
            .checked_mul(cfg.refine)
            .ok_or_else(|| LevyError::InvalidParameter("reference grid overflows".into()))?;
        let grids = [n];
        let spec = RefinementSpec {
            triplet: &triplet,
            sigma: &sigma,
            x0: cfg.x0,
            horizon: cfg.horizon,
            grids: &grids,
            n_ref,
            law: CoarseLaw::Brownian,
            paths: cfg.paths,
            seed,
            cdf_samples: 0,
        };
        let o = &run_refinement(&spec)?[0];
        let (err, ci) = mean_with_ci(&o.sq_sup_errors, seed, &[i as u64, 0]);
        let diffusion = triplet.variance_rate().sqrt();

        let (floor, floor_ci) = if cfg.floor {
            let bare = LevyTriplet::new(cfg.drift, diffusion, LevyMeasure::zero())?;
            let spec = RefinementSpec {
                triplet: &bare,
                law: CoarseLaw::Exact,
                ..spec
            };
            let f = &run_refinement(&spec)?[0];
            mean_with_ci(&f.sq_sup_errors, seed, &[i as u64, 1])
        } else {
            (f64::NAN, f64::NAN)
        };
        let m4 = triplet.nu.moment(crate::levy_measure::MomentQuery::full(4.0))?;
        report.rows.push(ReportRow {
            param: eps,
            error: err,
            ci,
            cost: o.coarse_steps as f64,
            extras: vec![n as f64, floor, floor_ci, diffusion, n as f64 * m4],
            in_fit: true,
        });
    }
    report.slope_bounds = cfg.slope;
    fit_rows(&mut report)?;
    report.notes.push(format!(
        "X is an exact-increment Euler path on a grid {}x finer than the internal grid n(eps) = ceil(eps^(-{p}/({p}-1))); \
         the Brownian SDE is discretised on n(eps) with increments quantile-coupled to the jump increments",
        cfg.refine,
        p = cfg.p
    ));
    report.notes.push(
        "floor: same comparison with the jumps removed and diffusion sqrt(b^2 + m_2), i.e. pure time discretisation"
            .into(),
    );
    Ok(ExperimentOutput {
        reports: vec![report],
    })
}
