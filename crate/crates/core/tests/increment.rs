mod support;

use levysim::increment::{
    make_params, sample_exact, sample_gauss_compensated, sample_neglect, ExactIncrement,
    LevyTriplet, PoissonCount,
};
use levysim::levy_measure::{Atom, LevyMeasure, MomentQuery};
use levysim::rng::substream;
use levysim::LevyError;
use proptest::prelude::*;
use support::{mean, poisson_pmf, sample_variance};

const M: usize = 100_000;

/// `|x̄ - mu| <= 4 sd/sqrt(M)` and `|s^2 - var| <= 4 sqrt((mu4 - var^2)/M)`.
fn assert_moments(values: &[f64], mu: f64, var: f64, mu4: f64) {
    let m = values.len() as f64;
    let xbar = mean(values);
    let s2 = sample_variance(values);
    assert!((xbar - mu).abs() <= 4.0 * (var / m).sqrt(), "mean {xbar} vs {mu}");
    assert!(
        (s2 - var).abs() <= 4.0 * ((mu4 - var * var) / m).sqrt(),
        "variance {s2} vs {var}"
    );
}

#[test]
fn gauss_compensated_moments() {
    let nu = LevyMeasure::atoms(vec![Atom::new(0.8, 2.0), Atom::new(-0.05, 30.0), Atom::new(0.03, 50.0)]).unwrap();
    let t = LevyTriplet::new(0.4, 0.6, nu).unwrap();
    let n = 8;
    let p = make_params(&t, n, 0.1).unwrap();
    let mut rng = substream(11, &[1]);
    let b = sample_gauss_compensated(&p, M, &mut rng).unwrap();
    let nf = n as f64;
    let var = t.variance_rate() / nf;
    // fourth central moment: 3 var^2 plus the fourth cumulant of the large jumps
    let l4 = 2.0 * 0.8f64.powi(4) / nf;
    assert_moments(&b.values, 0.4 / nf, var, 3.0 * var * var + l4);
}

#[test]
fn exact_increment_moments() {
    let eps0 = 0.1;
    let t = LevyTriplet::new(0.0, 0.0, LevyMeasure::two_point(eps0).unwrap()).unwrap();
    let n = 4;
    let mut rng = substream(12, &[]);
    let b = sample_exact(&t, n, M, &mut rng).unwrap();
    // every value lies on the lattice eps0 Z
    assert!(b.values.iter().all(|v| ((v / eps0) - (v / eps0).round()).abs() < 1e-9));
    let nf = n as f64;
    let var = 1.0 / nf;
    let mu4 = 3.0 * var * var + eps0 * eps0 / nf;
    assert_moments(&b.values, 0.0, var, mu4);
    let expected_jumps = 1.0 / (eps0 * eps0 * nf);
    assert!((b.mean_jump_count() - expected_jumps).abs() < 4.0 * (expected_jumps / M as f64).sqrt());
}

#[test]
fn neglect_keeps_drift_and_brownian_only() {
    let t = LevyTriplet::new(1.0, 0.5, LevyMeasure::stable_like(1.2, 1.0, 1.0).unwrap()).unwrap();
    let (n, eps) = (16, 1.0 / 16.0);
    let p = make_params(&t, n, eps).unwrap();
    let mut rng = substream(13, &[]);
    let b = sample_neglect(&p, M, &mut rng).unwrap();
    let nf = n as f64;
    let tail_var = t.nu.m2() - t.nu.m2_eps(eps);
    let tail_m4 = t.nu.moment(MomentQuery::full(4.0)).unwrap() - t.nu.moment(MomentQuery::truncated(4.0, eps)).unwrap();
    let var = (0.25 + tail_var) / nf;
    assert_moments(&b.values, 1.0 / nf, var, 3.0 * var * var + tail_m4 / nf);
}

#[test]
fn exact_increments_need_finite_activity() {
    let t = LevyTriplet::new(0.0, 1.0, LevyMeasure::stable_like(0.5, 1.0, 1.0).unwrap()).unwrap();
    assert_eq!(ExactIncrement::new(&t, 4).unwrap_err(), LevyError::InfiniteActivity);
    assert!(LevyTriplet::new(0.0, -1.0, LevyMeasure::zero()).is_err());
}

#[test]
fn poisson_counts_match_pmf() {
    let lambda = 3.5;
    let pc = PoissonCount::new(lambda).unwrap();
    let mut rng = substream(14, &[]);
    let mut freq = [0usize; 40];
    for _ in 0..M {
        freq[(pc.sample(&mut rng) as usize).min(39)] += 1;
    }
    let pmf = poisson_pmf(lambda, 39);
    for k in 0..15 {
        let expected = pmf[k] * M as f64;
        let sd = (expected * (1.0 - pmf[k])).sqrt();
        assert!((freq[k] as f64 - expected).abs() <= 5.0 * sd + 1.0, "k = {k}");
    }
    let zero = PoissonCount::new(0.0).unwrap();
    assert_eq!(zero.sample(&mut rng), 0);
    assert!(PoissonCount::new(-1.0).is_err());
}

#[test]
fn batch_csv_has_header() {
    let t = LevyTriplet::new(0.0, 1.0, LevyMeasure::two_point(0.5).unwrap()).unwrap();
    let p = make_params(&t, 2, 0.25).unwrap();
    let mut rng = substream(15, &[]);
    let b = sample_gauss_compensated(&p, 3, &mut rng).unwrap();
    let mut out = Vec::new();
    b.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("value,jumps\n"));
    assert_eq!(text.lines().count(), 4);
}

proptest! {
    #[test]
    fn params_follow_the_triplet(
        drift in -2.0..2.0f64,
        b in 0.0..2.0f64,
        alpha in 0.1..1.9f64,
        n in 1u32..2000,
        scale in 0.1..10.0f64,
    ) {
        let nu = LevyMeasure::stable_like(alpha, 1.0, 1.0).unwrap();
        let t = LevyTriplet::new(drift, b, nu).unwrap();
        let eps = scale / n as f64;
        let p = make_params(&t, n, eps).unwrap();
        let nf = n as f64;
        prop_assert!((p.drift() - drift / nf).abs() <= 1e-12 * (1.0 + drift.abs()));
        let want = (b * b + t.nu.m2_eps(eps)) / nf;
        prop_assert!((p.gauss_sd().powi(2) - want).abs() <= 1e-12 * want.max(1e-300));
        prop_assert!((p.poisson_mean() - t.nu.tail_mass(eps) / nf).abs() <= 1e-12 * p.poisson_mean().max(1e-300));
        prop_assert!((p.brownian_sd() - b / nf.sqrt()).abs() <= 1e-15);
    }
}
