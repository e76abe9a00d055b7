//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Double-exponential (tanh-sinh) quadrature of `f` over `[a, b]`.
///
/// Nodes are placed by their distance to the nearest endpoint, so integrable endpoint
/// singularities such as `z^-0.9` near 0 are resolved without cancellation.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mut h = 1.0;
    let mut prev = f64::NAN;
    for level in 0..12 {
        let mut sum = 0.0;
        let step = if level == 0 { 1 } else { 2 };
        let start = if level == 0 { 0 } else { 1 };
        let mut k = start;
        loop {
            let t = k as f64 * h;
            let u = 0.5 * PI * t.sinh();
            // distance of the node from the endpoint, (b - a) / (1 + e^{2u})
            let d = (b - a) / (1.0 + (2.0 * u).exp());
            let w = half * 0.5 * PI * t.cosh() / (u.cosh() * u.cosh());
            if d <= 0.0 || w < 1e-300 {
                break;
            }
            let term = if k == 0 {
                w * f(a + half)
            } else {
                w * (f(a + d) + f(b - d))
            };
            sum += term;
            k += step;
            if t > 6.0 {
                break;
            }
        }
        let estimate = if level == 0 { sum * h } else { 0.5 * prev + sum * h };
        if level > 3 && (estimate - prev).abs() <= 1e-14 * estimate.abs().max(1e-300) {
            return estimate;
        }
        prev = estimate;
        h *= 0.5;
    }
    prev
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `Φ(x)` as the integral of the density, mapped to a finite interval.
pub fn normal_cdf(x: f64) -> f64 {
    // Φ(-|x|) = ∫_0^∞ φ(|x| + s) ds with s = u / (1 - u)
    let tail = tanh_sinh(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let s = u / (1.0 - u);
            normal_pdf(x.abs() + s) / ((1.0 - u) * (1.0 - u))
        },
        0.0,
        1.0,
    );
    if x <= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Minimum over all pairings of `mean (a_i - b_σ(i))^2`.
pub fn brute_force_w2_squared(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut idx: Vec<usize> = (0..b.len()).collect();
    let mut best = f64::INFINITY;
    permute(&mut idx, 0, &mut |p| {
        let c = a
            .iter()
            .zip(p)
            .map(|(x, &j)| (x - b[j]) * (x - b[j]))
            .sum::<f64>()
            / a.len() as f64;
        best = best.min(c);
    });
    best
}

fn permute(idx: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

/// Sup distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS critical value at level 0.001.
pub fn ks_critical(m: usize) -> f64 {
    1.95 / (m as f64).sqrt()
}

/// Poisson pmf by the recurrence `p_k = p_{k-1} λ / k`.
pub fn poisson_pmf(lambda: f64, kmax: usize) -> Vec<f64> {
    let mut p = vec![(-lambda).exp()];
    for k in 1..=kmax {
        let last = p[k - 1];
        p.push(last * lambda / k as f64);
    }
    p
}
