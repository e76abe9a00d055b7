//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs as a plain binary (`harness = false`) so the lines show up in `cargo test` output.

mod support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use levysim::coupling::{quantile_couple_to_gaussian, EmpiricalCdf};
use levysim::experiments::config::{
    CltConfig, ConfigFile, IncrementGapConfig, PathRateConfig, DEFAULT_SEED,
};
use levysim::experiments::report::ExperimentOutput;
use levysim::experiments::{clt, increments, run, run_with_threads, Experiment};
use levysim::increment::{make_params, sample_gauss_compensated, LevyTriplet};
use levysim::levy_measure::{Atom, LevyMeasure, MomentQuery};
use levysim::rng::substream;
use levysim::wasserstein::{w2_empirical, w2_to_gaussian};
use support::{brute_force_w2_squared, mean, sample_variance, tanh_sinh};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn checks_of(out: &ExperimentOutput) -> Outcome {
    let mut parts = Vec::new();
    for r in &out.reports {
        for c in &r.checks {
            parts.push(format!(
                "{}/{} {}: {}",
                r.name,
                c.name,
                if c.pass { "ok" } else { "FAILED" },
                c.detail
            ));
        }
    }
    outcome(out.pass(), parts.join(" | "))
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    outcome(false, format!("error: {e}"))
}

struct Gate {
    failures: usize,
}

impl Gate {
    fn criterion(&mut self, id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= budget;
        let pass = o.pass && in_budget;
        if !pass {
            self.failures += 1;
        }
        let budget_note = if in_budget {
            String::new()
        } else {
            format!(" [over budget {:.0}s]", budget.as_secs_f64())
        };
        println!(
            "{} #{id:<2} {name} ({:.2}s){budget_note}: {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            o.detail
        );
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn moment_identities() -> Outcome {
    let mut exact = true;
    for eps0 in [0.2, 0.1, 0.05, 0.025, 0.3, 1.0, 2.0] {
        let nu = LevyMeasure::two_point(eps0).unwrap();
        exact &= nu.m2() == 1.0;
        exact &= nu.moment(MomentQuery::full(4.0)).unwrap() == eps0 * eps0;
    }
    let mut worst = 0.0f64;
    let mut points = 0;
    for alpha in [0.3, 0.8, 1.2, 1.5, 1.9] {
        for eps in [0.03f64, 0.2, 0.7, 1.5] {
            points += 1;
            let (scale, cutoff) = (0.8, 1.0);
            let nu = LevyMeasure::stable_like(alpha, scale, cutoff).unwrap();
            for p in [2.0, 4.0] {
                let oracle = 2.0 * scale * tanh_sinh(|z: f64| z.powf(p - 1.0 - alpha), 0.0, eps.min(cutoff));
                let got = nu.moment(MomentQuery::truncated(p, eps)).unwrap();
                worst = worst.max((got - oracle).abs() / oracle);
            }
        }
    }
    outcome(
        exact && worst < 1e-8,
        format!("two-point m2 = 1, m4 = eps0^2 exact: {exact}; max rel err vs quadrature over {points} points = {worst:.2e}"),
    )
}

fn universal_inequalities() -> Outcome {
    let mut count = 0;
    let mut violations = 0;
    let families: Vec<LevyMeasure> = vec![
        LevyMeasure::two_point(0.1).unwrap(),
        LevyMeasure::two_point(0.7).unwrap(),
        LevyMeasure::stable_like(0.5, 1.0, 1.0).unwrap(),
        LevyMeasure::stable_like(1.5, 2.0, 1.0).unwrap(),
        LevyMeasure::stable_like(1.9, 0.5, 3.0).unwrap(),
        LevyMeasure::atoms(vec![Atom::new(0.5, 1.0), Atom::new(-0.3, 2.0), Atom::new(0.01, 100.0)]).unwrap(),
        LevyMeasure::atoms(vec![Atom::new(2.0, 0.1), Atom::new(-0.05, 7.0)]).unwrap(),
        LevyMeasure::atoms(vec![Atom::new(1.0 / 256.0, 32768.0), Atom::new(0.5, 1.0)]).unwrap(),
        LevyMeasure::atoms(vec![Atom::new(-1.0, 3.0)]).unwrap(),
        LevyMeasure::stable_like(1.0, 1.0, 0.2).unwrap(),
    ];
    for nu in &families {
        for k in 0..10 {
            let eps = 0.005 * 2f64.powf(k as f64 * 0.9);
            count += 1;
            if let Ok(d) = nu.delta_eps(eps) {
                violations += usize::from(d > eps * eps);
            }
            violations += usize::from(nu.tail_mass(eps) > nu.m2() / (eps * eps));
        }
    }
    outcome(violations == 0, format!("{count} (family, eps) points, {violations} violations"))
}

fn increment_law() -> Outcome {
    const M: usize = 100_000;
    let cases: Vec<(&str, LevyTriplet, u32, f64)> = vec![
        (
            "stable a=1.5",
            LevyTriplet::new(0.3, 0.5, LevyMeasure::stable_like(1.5, 1.0, 1.0).unwrap()).unwrap(),
            16,
            1.0 / 16.0,
        ),
        (
            "atoms",
            LevyTriplet::new(0.2, 0.5, LevyMeasure::atoms(vec![Atom::new(0.5, 1.0), Atom::new(-0.3, 2.0)]).unwrap()).unwrap(),
            8,
            0.4,
        ),
        (
            "two-point",
            LevyTriplet::new(-0.1, 0.0, LevyMeasure::two_point(0.1).unwrap()).unwrap(),
            4,
            0.5,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, t, n, eps)) in cases.iter().enumerate() {
        let nf = *n as f64;
        // second and fourth moments of ν from quadrature or direct sums, not from the library
        let (m2, tail_m4) = match name {
            &"stable a=1.5" => (
                2.0 * tanh_sinh(|z: f64| z.powf(0.5 - 1.0), 0.0, 1.0),
                2.0 * tanh_sinh(|z: f64| z.powf(4.0 - 2.5), *eps, 1.0),
            ),
            &"atoms" => (0.25 + 2.0 * 0.09, 0.5f64.powi(4)),
            _ => (1.0, 0.0),
        };
        let var = (t.brownian * t.brownian + m2) / nf;
        let mu4 = 3.0 * var * var + tail_m4 / nf;
        let p = make_params(t, *n, *eps).unwrap();
        let mut rng = substream(DEFAULT_SEED, &[3, i as u64]);
        let b = sample_gauss_compensated(&p, M, &mut rng).unwrap();
        let zm = (mean(&b.values) - t.drift / nf) / (var / M as f64).sqrt();
        let zv = (sample_variance(&b.values) - var) / ((mu4 - var * var) / M as f64).sqrt();
        pass &= zm.abs() <= 4.0 && zv.abs() <= 4.0;
        parts.push(format!("{name}: z_mean {zm:+.2}, z_var {zv:+.2}"));
    }
    outcome(pass, parts.join("; "))
}

fn clt_bounds(cfg: &ConfigFile) -> Option<ExperimentOutput> {
    let both = CltConfig {
        check_lower: true,
        lower_floor: cfg.clt_lower_bound.lower_floor,
        ..cfg.clt_check.clone()
    };
    clt::run_clt("clt", &both, cfg.seed()).ok()
}

fn named_check(out: &Option<ExperimentOutput>, names: &[&str]) -> Outcome {
    let Some(out) = out else {
        return failed("clt run failed");
    };
    let r = out.main();
    let picked: Vec<_> = r.checks.iter().filter(|c| names.contains(&c.name.as_str())).collect();
    if picked.len() != names.len() {
        return failed("missing checks");
    }
    outcome(
        picked.iter().all(|c| c.pass),
        picked.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; "),
    )
}

fn coupling_instrument() -> Outcome {
    // exhaustive 2- and 3-point instances over a value set with ties
    let values = [-1.5, 0.0, 0.25, 0.25, 2.0];
    let mut instances = 0;
    let mut worst = 0.0f64;
    for len in [2usize, 3] {
        let total = values.len().pow(len as u32);
        for ia in 0..total {
            for ib in 0..total {
                let pick = |mut i: usize| -> Vec<f64> {
                    (0..len)
                        .map(|_| {
                            let v = values[i % values.len()];
                            i /= values.len();
                            v
                        })
                        .collect()
                };
                let (a, b) = (pick(ia), pick(ib));
                let got = w2_empirical(&a, &b).unwrap().value_squared;
                worst = worst.max((got - brute_force_w2_squared(&a, &b)).abs());
                instances += 1;
            }
        }
    }

    // quantile coupling of lattice sums to a Gaussian at M = 1e5
    let (eps0, t) = (0.1, 0.01);
    let (s, _) = clt::sample_two_point_process(eps0, t, 100_000, DEFAULT_SEED).unwrap();
    let cdf = EmpiricalCdf::new(&s).unwrap();
    let mut rng = substream(DEFAULT_SEED, &[12]);
    let g = quantile_couple_to_gaussian(&s, 0.0, t.sqrt(), &cdf, &mut rng).unwrap();
    let gap = s.iter().zip(&g).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / s.len() as f64;
    let sorted_w2 = w2_empirical(&s, &g).unwrap().value_squared;
    let rel = (gap - sorted_w2).abs() / sorted_w2;
    let target = w2_to_gaussian(&s, 0.0, t).unwrap().value_squared;
    outcome(
        worst < 1e-12 && rel <= 0.02,
        format!(
            "{instances} instances, max |w2 - brute force| = {worst:.1e}; coupling gap {gap:.5e} vs sorted matching {sorted_w2:.5e} (rel {rel:.2e}); W2^2 to N(0, t) = {target:.5e}"
        ),
    )
}

fn quick_scheme() -> ConfigFile {
    let mut cfg = ConfigFile::default();
    cfg.scheme_rate = PathRateConfig {
        n: vec![4, 8, 16, 32, 64],
        refine: 4,
        paths: 2000,
        cdf_samples: 1000,
        increment_gap: IncrementGapConfig {
            samples: 2000,
            ..IncrementGapConfig::default()
        },
        ..PathRateConfig::scheme()
    };
    cfg.clt_check.samples = 5000;
    cfg
}

fn determinism() -> Outcome {
    let cfg = quick_scheme();
    let mut same = true;
    let mut compared = 0;
    for exp in [Experiment::SchemeRate, Experiment::CltCheck] {
        let csvs = |threads: usize| -> Vec<String> {
            run_with_threads(exp, &cfg, 99, Some(threads))
                .map(|o| o.reports.iter().map(|r| r.csv()).collect())
                .unwrap_or_default()
        };
        let (a, b, c) = (csvs(1), csvs(4), csvs(4));
        same &= !a.is_empty() && a == b && b == c;
        compared += a.len();
    }
    outcome(same, format!("{compared} report.csv files byte-identical for 1, 4 and 4 threads"))
}

fn main() -> ExitCode {
    let cfg = ConfigFile::default();
    let seed = cfg.seed();
    let mut gate = Gate { failures: 0 };

    gate.criterion(1, "moment identities", secs(1), moment_identities);
    gate.criterion(2, "universal inequalities", secs(1), universal_inequalities);
    gate.criterion(3, "increment law contract", secs(10), increment_law);

    let mut clt = None;
    gate.criterion(4, "clt upper bound shape", secs(120), || {
        clt = clt_bounds(&cfg);
        named_check(&clt, &["upper bound", "slope"])
    });
    gate.criterion(5, "clt lower bound", secs(1), || named_check(&clt, &["lower bound"]));

    gate.criterion(6, "coupling gap", secs(60), || {
        match increments::run_increment_gap("increment-gap", &cfg.scheme_rate.increment_gap, seed) {
            Ok(r) => checks_of(&ExperimentOutput { reports: vec![r] }),
            Err(e) => failed(e),
        }
    });
    gate.criterion(7, "euler baseline rate", secs(180), || {
        run(Experiment::EulerBaseline, &cfg, seed).map_or_else(failed, |o| checks_of(&o))
    });
    gate.criterion(8, "scheme strong-error rate", secs(300), || {
        // the increment gap is criterion 6
        let mut c = cfg.clone();
        c.scheme_rate.increment_gap.enabled = false;
        run(Experiment::SchemeRate, &c, seed).map_or_else(failed, |o| checks_of(&o))
    });
    gate.criterion(9, "neglect vs gaussian ordering", secs(120), || {
        run(Experiment::NeglectVsGauss, &cfg, seed).map_or_else(failed, |o| checks_of(&o))
    });
    gate.criterion(10, "brownian approximation rate", secs(300), || {
        run(Experiment::BrownianApprox, &cfg, seed).map_or_else(failed, |o| checks_of(&o))
    });
    gate.criterion(11, "cost audit", secs(60), || {
        run(Experiment::CostAudit, &cfg, seed).map_or_else(failed, |o| checks_of(&o))
    });
    gate.criterion(12, "instrument validity", secs(30), coupling_instrument);
    gate.criterion(13, "determinism across thread counts", secs(60), determinism);

    if gate.failures == 0 {
        println!("acceptance: all 13 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 13 criteria failed", gate.failures);
        ExitCode::FAILURE
    }
}
