//! One-dimensional quadratic Wasserstein distance between empirical laws, and
//! between an empirical law and a Gaussian.

use crate::error::{LevyError, Result};
use crate::normal;
use crate::rng::{substream, tag};
use crate::stats::{percentile_half_width, resample_counts};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W2Estimate {
    pub value_squared: f64,
    pub sample_count: usize,
    /// Percentile-bootstrap half-width on `value_squared`.
    pub bootstrap_ci_half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 200,
            level: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.resamples < 200 {
            return Err(LevyError::InvalidParameter(format!(
                "bootstrap needs at least 200 resamples, got {}",
                self.resamples
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(LevyError::InvalidParameter(format!(
                "bootstrap level must lie in (0, 1), got {}",
                self.level
            )));
        }
        Ok(())
    }
}

fn sorted_copy(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(LevyError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LevyError::InvalidParameter("samples must be finite".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `∫_0^1 (F_a^{-1}(u) - F_b^{-1}(u))^2 du` for two ascending atomic laws with
/// integer weights (`None` means unit weights).
///
/// Breakpoints are tracked in integer units of `1 / (W_a W_b)`, so the merge is exact;
/// equal lengths with unit weights reduce to sorted matching.
pub fn w2_squared_sorted_weighted(
    a: &[f64],
    wa: Option<&[u32]>,
    b: &[f64],
    wb: Option<&[u32]>,
) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "W2 of an empty law");
    let weight = |w: Option<&[u32]>, i: usize| w.map_or(1u128, |w| w[i] as u128);
    let total_a: u128 = wa.map_or(a.len() as u128, |w| w.iter().map(|&x| x as u128).sum());
    let total_b: u128 = wb.map_or(b.len() as u128, |w| w.iter().map(|&x| x as u128).sum());
    let scale = (total_a * total_b) as f64;

    let (mut i, mut j) = (0usize, 0usize);
    // Skip zero-weight atoms.
    while i < a.len() && weight(wa, i) == 0 {
        i += 1;
    }
    while j < b.len() && weight(wb, j) == 0 {
        j += 1;
    }
    let mut end_a = weight(wa, i.min(a.len() - 1)) * total_b;
    let mut end_b = weight(wb, j.min(b.len() - 1)) * total_a;
    let mut pos: u128 = 0;
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        let next = end_a.min(end_b);
        let d = a[i] - b[j];
        acc += d * d * (next - pos) as f64;
        pos = next;
        if end_a == next {
            i += 1;
            while i < a.len() && weight(wa, i) == 0 {
                i += 1;
            }
            if i < a.len() {
                end_a += weight(wa, i) * total_b;
            }
        }
        if end_b == next {
            j += 1;
            while j < b.len() && weight(wb, j) == 0 {
                j += 1;
            }
            if j < b.len() {
                end_b += weight(wb, j) * total_a;
            }
        }
    }
    acc / scale
}

/// Sorted matching `(1/M) Σ (a_(i) - b_(i))^2` for ascending equal-length slices.
pub fn w2_squared_sorted(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == b.len() {
        let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        s / a.len() as f64
    } else {
        w2_squared_sorted_weighted(a, None, b, None)
    }
}

pub fn w2_empirical(a: &[f64], b: &[f64]) -> Result<W2Estimate> {
    w2_empirical_with(a, b, &BootstrapConfig::default())
}

/// Empirical W2² with a percentile bootstrap that resamples both inputs independently.
///
/// Inputs of different lengths are compared through their exact quantile functions.
pub fn w2_empirical_with(a: &[f64], b: &[f64], boot: &BootstrapConfig) -> Result<W2Estimate> {
    boot.validate()?;
    let sa = sorted_copy(a)?;
    let sb = sorted_copy(b)?;
    let value = w2_squared_sorted(&sa, &sb);

    let mut rng = substream(boot.seed, &[tag::BOOTSTRAP]);
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    let reps = (0..boot.resamples)
        .map(|_| {
            resample_counts(sa.len(), &mut ca, &mut rng);
            resample_counts(sb.len(), &mut cb, &mut rng);
            w2_squared_sorted_weighted(&sa, Some(&ca), &sb, Some(&cb))
        })
        .collect();
    Ok(W2Estimate {
        value_squared: value,
        sample_count: sa.len().min(sb.len()),
        bootstrap_ci_half_width: percentile_half_width(reps, boot.level),
    })
}

/// `Φ^{-1}((i - 0.5) / M)` for `i = 1..=M`.
pub fn gaussian_midpoint_quantiles(m: usize) -> Vec<f64> {
    (1..=m)
        .map(|i| normal::inv_cdf((i as f64 - 0.5) / m as f64))
        .collect()
}

pub fn w2_to_gaussian(samples: &[f64], mean: f64, var: f64) -> Result<W2Estimate> {
    w2_to_gaussian_with(samples, mean, var, &BootstrapConfig::default())
}

/// `(1/M) Σ (s_(i) - mean - sqrt(var) Φ^{-1}((i - 0.5)/M))^2` with a percentile bootstrap.
pub fn w2_to_gaussian_with(
    samples: &[f64],
    mean: f64,
    var: f64,
    boot: &BootstrapConfig,
) -> Result<W2Estimate> {
    if !(var.is_finite() && var >= 0.0) || !mean.is_finite() {
        return Err(LevyError::InvalidParameter(format!(
            "Gaussian target needs finite mean and nonnegative variance, got ({mean}, {var})"
        )));
    }
    boot.validate()?;
    let s = sorted_copy(samples)?;
    let m = s.len();
    let sd = var.sqrt();
    let target: Vec<f64> = gaussian_midpoint_quantiles(m)
        .into_iter()
        .map(|q| mean + sd * q)
        .collect();
    let value = w2_squared_sorted(&s, &target);

    let mut rng = substream(boot.seed, &[tag::BOOTSTRAP]);
    let mut counts = Vec::new();
    let reps = (0..boot.resamples)
        .map(|_| {
            resample_counts(m, &mut counts, &mut rng);
            let mut acc = 0.0;
            let mut pos = 0;
            for (x, &c) in s.iter().zip(&counts) {
                for t in &target[pos..pos + c as usize] {
                    acc += (x - t) * (x - t);
                }
                pos += c as usize;
            }
            acc / m as f64
        })
        .collect();
    Ok(W2Estimate {
        value_squared: value,
        sample_count: m,
        bootstrap_ci_half_width: percentile_half_width(reps, boot.level),
    })
}
