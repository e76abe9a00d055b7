//! Small statistical helpers: percentile bootstrap and log-log slope regression.

use rand::Rng;

use crate::error::{LevyError, Result};

/// Minimum number of points accepted by [`fit_loglog`].
pub const MIN_FIT_POINTS: usize = 5;

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Linear-interpolated percentile of an ascending slice, `p` in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Half-width of the central `level` percentile interval of bootstrap replicates.
pub fn percentile_half_width(mut replicates: Vec<f64>, level: f64) -> f64 {
    replicates.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    0.5 * (percentile_sorted(&replicates, 1.0 - tail) - percentile_sorted(&replicates, tail))
}

/// Multinomial resample counts: `counts[i]` is how often index `i` was drawn in `len` draws.
pub fn resample_counts<R: Rng + ?Sized>(len: usize, counts: &mut Vec<u32>, rng: &mut R) {
    counts.clear();
    counts.resize(len, 0);
    for _ in 0..len {
        counts[rng.random_range(0..len)] += 1;
    }
}

/// Percentile-bootstrap half-width for the mean of `values`.
pub fn bootstrap_mean_half_width<R: Rng + ?Sized>(
    values: &[f64],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> f64 {
    if values.len() < 2 || resamples == 0 {
        return 0.0;
    }
    let mut counts = Vec::new();
    let reps = (0..resamples)
        .map(|_| {
            resample_counts(values.len(), &mut counts, rng);
            let s: f64 = values
                .iter()
                .zip(&counts)
                .map(|(v, &c)| v * c as f64)
                .sum();
            s / values.len() as f64
        })
        .collect();
    percentile_half_width(reps, level)
}

/// Ordinary least squares of `log y` on `log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Regression standard error of the slope.
    pub slope_se: f64,
    pub points: usize,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(LevyError::InvalidParameter(format!(
            "fit needs paired data, got {} x and {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(LevyError::InvalidParameter(format!(
            "slope fits need at least {MIN_FIT_POINTS} points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(LevyError::InvalidParameter(
            "log-log fit needs positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = mean(&lx);
    let my = mean(&ly);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LevyError::InvalidParameter(
            "log-log fit needs distinct x values".into(),
        ));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_se = (rss / (k - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        slope_se,
        points: xs.len(),
    })
}
