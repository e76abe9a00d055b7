//! Increment laws over one step of length `1/n`.
//!
//! * exact `Δ^n` (finite-activity measures only),
//! * jump-neglecting `Δ̂^{n,ε}`: jumps below `eps` are dropped, their compensator kept,
//! * Gaussian-compensated `Δ^{n,ε} = a_{n,ε} + b_{n,ε} G + Σ_{i ≤ N} Y_i`.
//!
//! All compensation of the large jumps sits in `a_{n,ε}`; the tail jumps `Y_i`
//! themselves are added uncompensated.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{LevyError, Result};
use crate::levy_measure::{Atom, LevyMeasure};

/// Drift `a`, Brownian coefficient `b >= 0` and Lévy measure `ν` of the driver.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet {
    pub drift: f64,
    pub brownian: f64,
    pub nu: LevyMeasure,
}

impl LevyTriplet {
    pub fn new(drift: f64, brownian: f64, nu: LevyMeasure) -> Result<Self> {
        if !drift.is_finite() {
            return Err(LevyError::InvalidParameter(format!(
                "drift must be finite, got {drift}"
            )));
        }
        if !(brownian.is_finite() && brownian >= 0.0) {
            return Err(LevyError::InvalidParameter(format!(
                "Brownian coefficient must be nonnegative, got {brownian}"
            )));
        }
        Ok(Self {
            drift,
            brownian,
            nu,
        })
    }

    /// Total variance rate `b^2 + m_2(ν)`.
    pub fn variance_rate(&self) -> f64 {
        self.brownian * self.brownian + self.nu.m2()
    }
}

/// Poisson sampler accepting a zero mean.
#[derive(Debug, Clone, Copy)]
pub struct PoissonCount {
    dist: Option<Poisson<f64>>,
}

impl PoissonCount {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(LevyError::InvalidParameter(format!(
                "Poisson mean must be finite and nonnegative, got {mean}"
            )));
        }
        let dist = if mean > 0.0 {
            Some(Poisson::new(mean).map_err(|e| LevyError::InvalidParameter(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { dist })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.dist {
            Some(d) => d.sample(rng) as u64,
            None => 0,
        }
    }
}

/// Per-step parameters of the approximate increment laws for a given `(n, eps)`.
///
/// Derived quantities are computed once at construction and the struct is immutable.
#[derive(Debug, Clone)]
pub struct IncrementParams {
    triplet: LevyTriplet,
    n: u32,
    eps: f64,
    drift: f64,
    gauss_sd: f64,
    poisson_mean: f64,
    tail_count: PoissonCount,
}

/// Build [`IncrementParams`]. `eps >= 1` is accepted and handled by the same formulas.
pub fn make_params(triplet: &LevyTriplet, n: u32, eps: f64) -> Result<IncrementParams> {
    if n == 0 {
        return Err(LevyError::InvalidParameter("n must be at least 1".into()));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(LevyError::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let nf = n as f64;
    let nu = &triplet.nu;
    let drift = (triplet.drift - nu.tail_first_moment(eps)) / nf;
    // m_{2,eps} = 0 leaves b^2 / n, which is the degenerate-small-jump fallback.
    let gauss_var = (triplet.brownian * triplet.brownian + nu.m2_eps(eps)) / nf;
    let poisson_mean = nu.tail_mass(eps) / nf;
    Ok(IncrementParams {
        triplet: triplet.clone(),
        n,
        eps,
        drift,
        gauss_sd: gauss_var.sqrt(),
        poisson_mean,
        tail_count: PoissonCount::new(poisson_mean)?,
    })
}

impl IncrementParams {
    pub fn triplet(&self) -> &LevyTriplet {
        &self.triplet
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `a_{n,ε} = (a - ∫_{|z|>ε} z ν(dz)) / n`.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// `b_{n,ε} = sqrt((b^2 + m_{2,ε}(ν)) / n)`.
    pub fn gauss_sd(&self) -> f64 {
        self.gauss_sd
    }

    /// `F_ε(ν) / n`, the mean number of simulated tail jumps per step.
    pub fn poisson_mean(&self) -> f64 {
        self.poisson_mean
    }

    /// Standard deviation of the Brownian part alone, `b / sqrt(n)`.
    pub fn brownian_sd(&self) -> f64 {
        self.triplet.brownian / (self.n as f64).sqrt()
    }

    /// Draw the tail-jump count and the uncompensated sum of the tail jumps.
    #[inline]
    pub fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, f64) {
        let count = self.tail_count.sample(rng);
        let mut sum = 0.0;
        for _ in 0..count {
            sum += self.triplet.nu.sample_large_jump_unchecked(self.eps, rng);
        }
        (count, sum)
    }

    /// One Gaussian-compensated increment and its tail-jump count.
    #[inline]
    pub fn sample_gauss_compensated_one<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u64) {
        let g: f64 = StandardNormal.sample(rng);
        let (count, jumps) = self.sample_tail(rng);
        (self.drift + self.gauss_sd * g + jumps, count)
    }

    /// One jump-neglecting increment and its tail-jump count.
    #[inline]
    pub fn sample_neglect_one<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u64) {
        let g: f64 = StandardNormal.sample(rng);
        let (count, jumps) = self.sample_tail(rng);
        (self.drift + self.brownian_sd() * g + jumps, count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncrementKind {
    Exact,
    Neglect,
    GaussCompensated,
}

/// I.i.d. increments of one law together with the number of simulated jumps per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBatch {
    pub kind: IncrementKind,
    pub values: Vec<f64>,
    pub jump_counts: Vec<u64>,
}

impl IncrementBatch {
    fn with_capacity(kind: IncrementKind, count: usize) -> Self {
        Self {
            kind,
            values: Vec::with_capacity(count),
            jump_counts: Vec::with_capacity(count),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean_jump_count(&self) -> f64 {
        if self.jump_counts.is_empty() {
            return 0.0;
        }
        self.jump_counts.iter().sum::<u64>() as f64 / self.jump_counts.len() as f64
    }

    /// Debug dump: header `value,jumps`, one row per draw.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "value,jumps")?;
        for (v, c) in self.values.iter().zip(&self.jump_counts) {
            writeln!(out, "{v},{c}")?;
        }
        Ok(())
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        Err(LevyError::InvalidParameter("count must be at least 1".into()))
    } else {
        Ok(())
    }
}

pub fn sample_gauss_compensated<R: Rng + ?Sized>(
    params: &IncrementParams,
    count: usize,
    rng: &mut R,
) -> Result<IncrementBatch> {
    check_count(count)?;
    let mut batch = IncrementBatch::with_capacity(IncrementKind::GaussCompensated, count);
    for _ in 0..count {
        let (v, c) = params.sample_gauss_compensated_one(rng);
        batch.values.push(v);
        batch.jump_counts.push(c);
    }
    Ok(batch)
}

pub fn sample_neglect<R: Rng + ?Sized>(
    params: &IncrementParams,
    count: usize,
    rng: &mut R,
) -> Result<IncrementBatch> {
    check_count(count)?;
    let mut batch = IncrementBatch::with_capacity(IncrementKind::Neglect, count);
    for _ in 0..count {
        let (v, c) = params.sample_neglect_one(rng);
        batch.values.push(v);
        batch.jump_counts.push(c);
    }
    Ok(batch)
}

/// Exact increments of a finite-activity driver over `[0, 1/n]`.
#[derive(Debug, Clone)]
pub struct ExactIncrement {
    drift: f64,
    brownian_sd: f64,
    atoms: Vec<Atom>,
    counts: Vec<PoissonCount>,
}

impl ExactIncrement {
    pub fn new(triplet: &LevyTriplet, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(LevyError::InvalidParameter("n must be at least 1".into()));
        }
        let atoms = triplet.nu.finite_atoms().ok_or(LevyError::InfiniteActivity)?;
        let nf = n as f64;
        let compensator: f64 = atoms.iter().map(|a| a.rate * a.location).sum();
        let counts = atoms
            .iter()
            .map(|a| PoissonCount::new(a.rate / nf))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            drift: (triplet.drift - compensator) / nf,
            brownian_sd: triplet.brownian / nf.sqrt(),
            atoms,
            counts,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u64) {
        let g: f64 = StandardNormal.sample(rng);
        let mut value = self.drift + self.brownian_sd * g;
        let mut total = 0;
        for (atom, count) in self.atoms.iter().zip(&self.counts) {
            let c = count.sample(rng);
            value += atom.location * c as f64;
            total += c;
        }
        (value, total)
    }
}

pub fn sample_exact<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    n: u32,
    count: usize,
    rng: &mut R,
) -> Result<IncrementBatch> {
    check_count(count)?;
    let law = ExactIncrement::new(triplet, n)?;
    let mut batch = IncrementBatch::with_capacity(IncrementKind::Exact, count);
    for _ in 0..count {
        let (v, c) = law.sample(rng);
        batch.values.push(v);
        batch.jump_counts.push(c);
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var)
    }

    #[test]
    fn params_two_point_all_small() {
        let t = LevyTriplet::new(0.0, 0.0, LevyMeasure::two_point(0.1).unwrap()).unwrap();
        let p = make_params(&t, 100, 0.5).unwrap();
        assert_eq!(p.drift(), 0.0);
        assert!((p.gauss_sd().powi(2) - 0.01).abs() < 1e-16);
        assert_eq!(p.poisson_mean(), 0.0);
    }

    #[test]
    fn params_null_measure() {
        let t = LevyTriplet::new(1.0, 1.0, LevyMeasure::zero()).unwrap();
        let p = make_params(&t, 4, 0.5).unwrap();
        assert_eq!(p.drift(), 0.25);
        assert_eq!(p.gauss_sd().powi(2), 0.25);
        assert_eq!(p.poisson_mean(), 0.0);
    }

    #[test]
    fn params_stable_like_poisson_mean() {
        let t = LevyTriplet::new(0.0, 0.0, LevyMeasure::stable_like(1.5, 1.0, 1.0).unwrap())
            .unwrap();
        let p = make_params(&t, 16, 1.0 / 16.0).unwrap();
        let expected = 2.0 * (16f64.powf(1.5) - 1.0) / (1.5 * 16.0);
        assert!((p.poisson_mean() - expected).abs() < 1e-12);
        assert!((p.poisson_mean() - 5.25).abs() < 1e-12);
    }

    #[test]
    fn degenerate_small_jumps_fall_back_to_brownian_variance() {
        // eps below the atom: no small-jump mass, so b_{n,eps}^2 = b^2 / n.
        let t = LevyTriplet::new(0.0, 2.0, LevyMeasure::two_point(0.1).unwrap()).unwrap();
        assert!(t.nu.delta_eps(0.05).is_err());
        let p = make_params(&t, 4, 0.05).unwrap();
        assert_eq!(p.gauss_sd(), 1.0);
        assert!((p.poisson_mean() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = LevyTriplet::new(0.0, 1.0, LevyMeasure::zero()).unwrap();
        assert!(make_params(&t, 0, 0.5).is_err());
        assert!(make_params(&t, 1, 0.0).is_err());
        assert!(LevyTriplet::new(0.0, -1.0, LevyMeasure::zero()).is_err());
        let p = make_params(&t, 1, 0.5).unwrap();
        let mut rng = substream(0, &[]);
        assert!(sample_gauss_compensated(&p, 0, &mut rng).is_err());
    }

    #[test]
    fn gaussian_only_case() {
        let t = LevyTriplet::new(1.0, 1.0, LevyMeasure::zero()).unwrap();
        let p = make_params(&t, 4, 0.5).unwrap();
        let mut rng = substream(11, &[]);
        let m = 100_000;
        let b = sample_gauss_compensated(&p, m, &mut rng).unwrap();
        let (mean, var) = mean_var(&b.values);
        assert!((mean - 0.25).abs() < 4.0 * (0.25 / m as f64).sqrt());
        // Var of the sample variance of a Gaussian is 2 σ^4 / (m - 1).
        assert!((var - 0.25).abs() < 4.0 * (2.0 * 0.0625 / m as f64).sqrt());
        assert!(b.jump_counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn neglect_is_deterministic_without_noise() {
        let t = LevyTriplet::new(0.3, 0.0, LevyMeasure::two_point(0.1).unwrap()).unwrap();
        let p = make_params(&t, 10, 0.5).unwrap();
        let mut rng = substream(12, &[]);
        let b = sample_neglect(&p, 1000, &mut rng).unwrap();
        assert!(b.values.iter().all(|&v| v == p.drift()));
    }

    #[test]
    fn exact_compensated_poisson() {
        let nu = LevyMeasure::atoms(vec![Atom::new(1.0, 2.0)]).unwrap();
        let t = LevyTriplet::new(0.0, 0.0, nu).unwrap();
        let mut rng = substream(13, &[]);
        let m = 100_000;
        let b = sample_exact(&t, 1, m, &mut rng).unwrap();
        for (v, c) in b.values.iter().zip(&b.jump_counts) {
            assert_eq!(*v, *c as f64 - 2.0);
        }
        let (mean, _) = mean_var(&b.values);
        assert!(mean.abs() < 4.0 * (2.0 / m as f64).sqrt());
    }

    #[test]
    fn exact_rejects_infinite_activity() {
        let t = LevyTriplet::new(0.0, 0.0, LevyMeasure::stable_like(1.5, 1.0, 1.0).unwrap())
            .unwrap();
        let mut rng = substream(14, &[]);
        assert_eq!(
            sample_exact(&t, 4, 10, &mut rng).unwrap_err(),
            LevyError::InfiniteActivity
        );
    }

    #[test]
    fn exact_without_jumps_is_brownian() {
        let t = LevyTriplet::new(2.0, 3.0, LevyMeasure::zero()).unwrap();
        let mut a = substream(15, &[]);
        let mut b = substream(15, &[]);
        let batch = sample_exact(&t, 9, 100, &mut a).unwrap();
        for v in batch.values {
            let g: f64 = StandardNormal.sample(&mut b);
            assert!((v - (2.0 / 9.0 + 1.0 * g)).abs() < 1e-15);
        }
    }

    #[test]
    fn same_seed_same_batch() {
        let t = LevyTriplet::new(0.1, 0.4, LevyMeasure::stable_like(1.2, 1.0, 1.0).unwrap())
            .unwrap();
        let p = make_params(&t, 8, 0.1).unwrap();
        let a = sample_gauss_compensated(&p, 500, &mut substream(3, &[9])).unwrap();
        let b = sample_gauss_compensated(&p, 500, &mut substream(3, &[9])).unwrap();
        assert_eq!(a, b);
        let bits_a: Vec<u64> = a.values.iter().map(|v| v.to_bits()).collect();
        let bits_b: Vec<u64> = b.values.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits_a, bits_b);
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let batch = IncrementBatch {
            kind: IncrementKind::Neglect,
            values: vec![0.5, -1.0],
            jump_counts: vec![0, 2],
        };
        let mut buf = Vec::new();
        batch.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "value,jumps\n0.5,0\n-1,2\n");
    }
}
