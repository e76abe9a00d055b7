//! Quantile couplings between small-jump sums and Gaussians, and the coupled
//! increment pairs built on them.
//!
//! The exact increment and the Gaussian-compensated increment share the drift,
//! the Brownian part and the large jumps. Only the compensated small-jump sum `S`
//! is swapped for a Gaussian `G` with the same variance, and `G` is chosen as the
//! comonotone (quantile) image of `S`, which is the W2-optimal pairing in one
//! dimension. Atomic laws are handled with a randomized probability integral
//! transform so that `G` is exactly Gaussian.

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use crate::error::{LevyError, Result};
use crate::euler::{grid_steps, simulate_path, CoupledRunningSup, PathGrid, SigmaFn};
use crate::increment::{make_params, IncrementParams, LevyTriplet, PoissonCount};
use crate::levy_measure::{stable_band_inverse_cdf, Atom, Family, LevyMeasure};
use crate::normal;

/// Gaussian score `Φ^{-1}(u)` from the split `u = lower`, `1 - u = upper`,
/// evaluated on whichever side keeps full precision.
#[inline]
fn score_from_split(lower: f64, upper: f64) -> f64 {
    if lower <= upper {
        normal::inv_cdf(lower)
    } else {
        -normal::inv_cdf(upper)
    }
}

/// Empirical distribution function of a sample, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(LevyError::EmptyCdf);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(LevyError::InvalidParameter(
                "empirical CDF samples must be finite".into(),
            ));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{x_i <= x} / M`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// Counts of samples strictly below and equal to `x`.
    pub fn rank_counts(&self, x: f64) -> (usize, usize) {
        let below = self.sorted.partition_point(|&s| s < x);
        let upto = self.sorted.partition_point(|&s| s <= x);
        (below, upto - below)
    }

    /// Randomized rank of `x` in `(0, 1)`.
    ///
    /// A value tied with `E` samples after `L` smaller ones maps to `(L + vE)/M`, so ties
    /// spread uniformly over their block. A value absent from the sample maps to
    /// `(L + 1/2)/(M + 1)`.
    pub fn pit(&self, x: f64, v: f64) -> f64 {
        let (lower, _) = self.pit_split(x, v);
        lower
    }

    fn pit_split(&self, x: f64, v: f64) -> (f64, f64) {
        let m = self.len() as f64;
        let (below, equal) = self.rank_counts(x);
        let above = self.len() - below - equal;
        if equal > 0 {
            let e = equal as f64;
            ((below as f64 + v * e) / m, (above as f64 + (1.0 - v) * e) / m)
        } else {
            ((below as f64 + 0.5) / (m + 1.0), (above as f64 + 0.5) / (m + 1.0))
        }
    }

    /// `Φ^{-1}` of the randomized rank of `x`.
    pub fn gaussian_score(&self, x: f64, v: f64) -> f64 {
        let (lower, upper) = self.pit_split(x, v);
        score_from_split(lower, upper)
    }
}

/// Exact law of `K = P_+ - P_-` for independent Poisson counts (a Skellam law).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCdf {
    kmin: i64,
    pmf: Vec<f64>,
    below: Vec<f64>,
    above: Vec<f64>,
}

/// Poisson pmf on the range where it exceeds `1e-18` of its mode value, renormalised.
fn poisson_table(lambda: f64) -> (i64, Vec<f64>) {
    if lambda == 0.0 {
        return (0, vec![1.0]);
    }
    let mode = lambda.floor();
    let log_peak = -lambda + mode * lambda.ln() - libm::lgamma(mode + 1.0);
    let peak = log_peak.exp();
    let floor = peak * 1e-18;
    let mode = mode as i64;

    let mut down = Vec::new();
    let mut p = peak;
    let mut k = mode;
    while k > 0 {
        p *= k as f64 / lambda;
        k -= 1;
        if p < floor {
            break;
        }
        down.push(p);
    }
    let lo = mode - down.len() as i64;
    let mut table: Vec<f64> = down.into_iter().rev().collect();
    table.push(peak);
    let mut p = peak;
    let mut k = mode;
    loop {
        k += 1;
        p *= lambda / k as f64;
        if p < floor {
            break;
        }
        table.push(p);
    }
    let total: f64 = table.iter().sum();
    table.iter_mut().for_each(|x| *x /= total);
    (lo, table)
}

impl LatticeCdf {
    pub fn skellam(lambda_plus: f64, lambda_minus: f64) -> Result<Self> {
        for (name, l) in [("lambda_plus", lambda_plus), ("lambda_minus", lambda_minus)] {
            if !(l.is_finite() && l >= 0.0) {
                return Err(LevyError::InvalidParameter(format!(
                    "{name} must be finite and nonnegative, got {l}"
                )));
            }
        }
        let (lo_p, tp) = poisson_table(lambda_plus);
        let (lo_m, tm) = poisson_table(lambda_minus);
        let kmin = lo_p - (lo_m + tm.len() as i64 - 1);
        let width = tp.len() + tm.len() - 1;
        let mut pmf = vec![0.0; width];
        // k = (lo_p + i) - (lo_m + j), offset from kmin = i + (tm.len() - 1 - j).
        for (i, &pi) in tp.iter().enumerate() {
            let row = &mut pmf[i..i + tm.len()];
            for (slot, &pj) in row.iter_mut().zip(tm.iter().rev()) {
                *slot += pi * pj;
            }
        }
        let total: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|x| *x /= total);

        let mut below = vec![0.0; width];
        for i in 1..width {
            below[i] = below[i - 1] + pmf[i - 1];
        }
        let mut above = vec![0.0; width];
        for i in (0..width - 1).rev() {
            above[i] = above[i + 1] + pmf[i + 1];
        }
        Ok(Self {
            kmin,
            pmf,
            below,
            above,
        })
    }

    pub fn support(&self) -> (i64, i64) {
        (self.kmin, self.kmin + self.pmf.len() as i64 - 1)
    }

    pub fn pmf(&self, k: i64) -> f64 {
        self.index(k).map_or(0.0, |i| self.pmf[i])
    }

    /// `P(K <= k)`.
    pub fn cdf(&self, k: i64) -> f64 {
        let (lo, hi) = self.support();
        if k < lo {
            0.0
        } else if k >= hi {
            1.0
        } else {
            let i = (k - lo) as usize;
            (self.below[i] + self.pmf[i]).min(1.0)
        }
    }

    fn index(&self, k: i64) -> Option<usize> {
        let (lo, hi) = self.support();
        (lo..=hi).contains(&k).then(|| (k - lo) as usize)
    }

    /// Randomized PIT `P(K < k) + v P(K = k)`.
    pub fn pit(&self, k: i64, v: f64) -> f64 {
        self.pit_split(k, v).0
    }

    fn pit_split(&self, k: i64, v: f64) -> (f64, f64) {
        match self.index(k) {
            // Rounding in the cumulative sums may step a few ulps outside [0, 1].
            Some(i) => (
                (self.below[i] + v * self.pmf[i]).min(1.0),
                (self.above[i] + (1.0 - v) * self.pmf[i]).min(1.0),
            ),
            None if k < self.kmin => (0.0, 1.0),
            None => (1.0, 0.0),
        }
    }

    pub fn gaussian_score(&self, k: i64, v: f64) -> f64 {
        let (lower, upper) = self.pit_split(k, v);
        score_from_split(lower, upper)
    }
}

/// Comonotone image of `samples` in `N(target_mean, target_std^2)`.
///
/// Each sample is sent to `target_mean + target_std Φ^{-1}(u)` where `u` is its
/// randomized rank in `cdf`; the jitter `v` comes from `rng`.
pub fn quantile_couple_to_gaussian<R: Rng + ?Sized>(
    samples: &[f64],
    target_mean: f64,
    target_std: f64,
    cdf: &EmpiricalCdf,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if cdf.is_empty() {
        return Err(LevyError::EmptyCdf);
    }
    if !(target_std.is_finite() && target_std >= 0.0) {
        return Err(LevyError::InvalidParameter(format!(
            "target standard deviation must be nonnegative, got {target_std}"
        )));
    }
    Ok(samples
        .iter()
        .map(|&s| {
            let v: f64 = Open01.sample(rng);
            target_mean + target_std * cdf.gaussian_score(s, v)
        })
        .collect())
}

/// How the compensated small-jump sum `S` over one step is simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmallJumpModel {
    /// Exact simulation; needs finitely many small jumps per unit time.
    Exact,
    /// Infinite-activity small jumps: the jumps in `(eps/ratio, eps]` are simulated and
    /// those below `eps/ratio` are replaced by a Gaussian of the same variance.
    /// This is an approximation layer. Finite-activity measures ignore it.
    InnerTruncation { ratio: f64 },
}

/// One draw of the small-jump sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallJumpDraw {
    pub value: f64,
    /// Lattice coordinate `Σ sign_j c_j` when the small atoms share one magnitude.
    pub lattice_index: i64,
    /// Number of small jumps simulated.
    pub jumps: u64,
}

#[derive(Debug, Clone)]
struct LatticeShape {
    /// `+1` / `-1` per small atom.
    signs: Vec<i64>,
    cdf: LatticeCdf,
}

#[derive(Debug, Clone)]
enum SmallSource {
    Atoms {
        /// Indices into the atom list of ν.
        small: Vec<usize>,
        locations: Vec<f64>,
        counts: Vec<PoissonCount>,
        /// `Σ_small λ_j z_j / n`.
        compensator: f64,
        lattice: Option<LatticeShape>,
    },
    Band {
        alpha: f64,
        lo: f64,
        hi: f64,
        count: PoissonCount,
        gauss_sd: f64,
    },
}

/// Law of `S = ∫_0^{1/n} ∫_{|z| <= eps} z Ñ(ds, dz)`.
#[derive(Debug, Clone)]
pub struct SmallJumpLaw {
    eps: f64,
    target_sd: f64,
    exact: bool,
    source: SmallSource,
}

impl SmallJumpLaw {
    pub fn new(nu: &LevyMeasure, n: u32, eps: f64, model: SmallJumpModel) -> Result<Self> {
        if n == 0 {
            return Err(LevyError::InvalidParameter("n must be at least 1".into()));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(LevyError::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let nf = n as f64;
        let target_sd = (nu.m2_eps(eps) / nf).sqrt();
        if let Some(atoms) = nu.finite_atoms() {
            return Ok(Self {
                eps,
                target_sd,
                exact: true,
                source: Self::atom_source(&atoms, nf, eps)?,
            });
        }
        let Family::TruncatedStableLike {
            alpha,
            scale,
            cutoff,
        } = *nu.family()
        else {
            unreachable!("only the stable-like family has infinite activity");
        };
        let SmallJumpModel::InnerTruncation { ratio } = model else {
            return Err(LevyError::NeedsFiniteSmallActivity { eps });
        };
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(LevyError::InvalidParameter(format!(
                "inner truncation ratio must exceed 1, got {ratio}"
            )));
        }
        let hi = eps.min(cutoff);
        let lo = eps / ratio;
        let (band_mass, inner_m2) = if lo < hi {
            (
                2.0 * scale * (lo.powf(-alpha) - hi.powf(-alpha)) / alpha,
                nu.m2_eps(lo),
            )
        } else {
            (0.0, nu.m2_eps(eps))
        };
        Ok(Self {
            eps,
            target_sd,
            exact: false,
            source: SmallSource::Band {
                alpha,
                lo,
                hi,
                count: PoissonCount::new(band_mass / nf)?,
                gauss_sd: (inner_m2 / nf).sqrt(),
            },
        })
    }

    fn atom_source(atoms: &[Atom], nf: f64, eps: f64) -> Result<SmallSource> {
        let small: Vec<usize> = (0..atoms.len())
            .filter(|&j| atoms[j].location.abs() <= eps)
            .collect();
        let locations: Vec<f64> = small.iter().map(|&j| atoms[j].location).collect();
        let counts = small
            .iter()
            .map(|&j| PoissonCount::new(atoms[j].rate / nf))
            .collect::<Result<Vec<_>>>()?;
        let compensator = small
            .iter()
            .map(|&j| atoms[j].rate * atoms[j].location)
            .sum::<f64>()
            / nf;
        let magnitude = locations.first().map_or(0.0, |z| z.abs());
        let lattice = if locations.iter().all(|z| z.abs() == magnitude) {
            let signs: Vec<i64> = locations.iter().map(|&z| if z > 0.0 { 1 } else { -1 }).collect();
            let (mut lp, mut lm) = (0.0, 0.0);
            for (&j, &s) in small.iter().zip(&signs) {
                if s > 0 {
                    lp += atoms[j].rate / nf;
                } else {
                    lm += atoms[j].rate / nf;
                }
            }
            Some(LatticeShape {
                signs,
                cdf: LatticeCdf::skellam(lp, lm)?,
            })
        } else {
            None
        };
        Ok(SmallSource::Atoms {
            small,
            locations,
            counts,
            compensator,
            lattice,
        })
    }

    /// `sqrt(m_{2,eps}(ν) / n)`, the standard deviation of the compensating Gaussian.
    pub fn target_sd(&self) -> f64 {
        self.target_sd
    }

    /// False when the inner-truncation approximation is in use.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Whether the exact lattice CDF is available, so no empirical CDF is needed.
    pub fn has_lattice(&self) -> bool {
        matches!(
            &self.source,
            SmallSource::Atoms {
                lattice: Some(_),
                ..
            }
        )
    }

    /// Indices of the atoms of ν counted as small, for finite-activity measures.
    pub fn small_atoms(&self) -> Option<&[usize]> {
        match &self.source {
            SmallSource::Atoms { small, .. } => Some(small),
            SmallSource::Band { .. } => None,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SmallJumpDraw {
        match &self.source {
            SmallSource::Atoms {
                locations,
                counts,
                compensator,
                lattice,
                ..
            } => {
                let mut value = 0.0;
                let mut index = 0;
                let mut jumps = 0;
                for (k, (z, c)) in locations.iter().zip(counts).enumerate() {
                    let c = c.sample(rng);
                    value += z * c as f64;
                    jumps += c;
                    if let Some(l) = lattice {
                        index += l.signs[k] * c as i64;
                    }
                }
                SmallJumpDraw {
                    value: value - compensator,
                    lattice_index: index,
                    jumps,
                }
            }
            SmallSource::Band {
                alpha,
                lo,
                hi,
                count,
                gauss_sd,
            } => {
                let g: f64 = StandardNormal.sample(rng);
                let mut value = gauss_sd * g;
                let jumps = count.sample(rng);
                for _ in 0..jumps {
                    let m = stable_band_inverse_cdf(*alpha, *lo, *hi, Open01.sample(rng));
                    value += if rng.random::<bool>() { m } else { -m };
                }
                SmallJumpDraw {
                    value,
                    lattice_index: 0,
                    jumps,
                }
            }
        }
    }

    /// `S` from given per-atom jump counts (indexed like the atom list of ν).
    pub fn from_counts(&self, counts: &[u64]) -> Result<SmallJumpDraw> {
        let SmallSource::Atoms {
            small,
            locations,
            compensator,
            lattice,
            ..
        } = &self.source
        else {
            return Err(LevyError::NeedsFiniteSmallActivity { eps: self.eps });
        };
        let mut value = 0.0;
        let mut index = 0;
        let mut jumps = 0;
        for (k, (&j, z)) in small.iter().zip(locations).enumerate() {
            let c = counts[j];
            value += z * c as f64;
            jumps += c;
            if let Some(l) = lattice {
                index += l.signs[k] * c as i64;
            }
        }
        Ok(SmallJumpDraw {
            value: value - compensator,
            lattice_index: index,
            jumps,
        })
    }

    /// Independent draws of `S` for an empirical CDF.
    pub fn empirical_cdf<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<EmpiricalCdf> {
        let values: Vec<f64> = (0..samples).map(|_| self.sample(rng).value).collect();
        EmpiricalCdf::new(&values)
    }

    /// Gaussian partner `G` of a draw: exact lattice PIT when available, otherwise the
    /// randomized rank in `cdf`.
    #[inline]
    pub fn coupled_gaussian(
        &self,
        draw: &SmallJumpDraw,
        v: f64,
        cdf: Option<&EmpiricalCdf>,
    ) -> Result<f64> {
        if self.target_sd == 0.0 {
            return Ok(0.0);
        }
        let score = match (&self.source, cdf) {
            (
                SmallSource::Atoms {
                    lattice: Some(l), ..
                },
                _,
            ) => l.cdf.gaussian_score(draw.lattice_index, v),
            (_, Some(cdf)) => cdf.gaussian_score(draw.value, v),
            (_, None) => return Err(LevyError::EmptyCdf),
        };
        Ok(self.target_sd * score)
    }
}

/// Everything needed to draw coupled `(Δ^n, Δ^{n,eps})` pairs.
#[derive(Debug, Clone)]
pub struct CouplingPlan {
    params: IncrementParams,
    small: SmallJumpLaw,
}

impl CouplingPlan {
    pub fn new(triplet: &LevyTriplet, n: u32, eps: f64, model: SmallJumpModel) -> Result<Self> {
        Ok(Self {
            params: make_params(triplet, n, eps)?,
            small: SmallJumpLaw::new(&triplet.nu, n, eps, model)?,
        })
    }

    /// Every jump counts as small, so the approximate increment is
    /// `a/n + sqrt(b^2 + m_2(ν)) W_{1/n}`.
    pub fn brownian(triplet: &LevyTriplet, n: u32, model: SmallJumpModel) -> Result<Self> {
        let eps = triplet.nu.max_jump();
        let eps = if eps > 0.0 { eps } else { 1.0 };
        Self::new(triplet, n, eps, model)
    }

    pub fn params(&self) -> &IncrementParams {
        &self.params
    }

    pub fn small_jumps(&self) -> &SmallJumpLaw {
        &self.small
    }
}

/// Coupled increments sharing drift, Brownian part and large jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledIncrementBatch {
    /// Law of `Δ^n` (exact small jumps).
    pub delta_exact: Vec<f64>,
    /// Law of `Δ^{n,eps}` (small jumps replaced by the coupled Gaussian).
    pub delta_approx: Vec<f64>,
    /// Law of `Δ̂^{n,eps}` (small jumps dropped), sharing everything else.
    pub delta_neglect: Vec<f64>,
    /// Number of large jumps per draw, common to all three.
    pub jump_counts: Vec<u64>,
}

impl CoupledIncrementBatch {
    pub fn len(&self) -> usize {
        self.delta_exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_exact.is_empty()
    }

    pub fn mean_square_gap(&self) -> f64 {
        mean_square_diff(&self.delta_exact, &self.delta_approx)
    }

    pub fn mean_square_neglect_gap(&self) -> f64 {
        mean_square_diff(&self.delta_exact, &self.delta_neglect)
    }
}

fn mean_square_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Draw `count` coupled increments.
///
/// `small_jump_cdf` is used only when the small-jump law has no exact lattice CDF; if it
/// is `None` in that case the CDF is built from the drawn `S` values themselves.
pub fn sample_coupled_increment<R: Rng + ?Sized>(
    plan: &CouplingPlan,
    count: usize,
    small_jump_cdf: Option<&EmpiricalCdf>,
    rng: &mut R,
) -> Result<CoupledIncrementBatch> {
    if count == 0 {
        return Err(LevyError::InvalidParameter("count must be at least 1".into()));
    }
    let p = &plan.params;
    let law = &plan.small;
    let mut shared = Vec::with_capacity(count);
    let mut draws = Vec::with_capacity(count);
    let mut jump_counts = Vec::with_capacity(count);
    for _ in 0..count {
        let g: f64 = StandardNormal.sample(rng);
        let (c, tail) = p.sample_tail(rng);
        shared.push(p.drift() + p.brownian_sd() * g + tail);
        jump_counts.push(c);
        draws.push(law.sample(rng));
    }
    let own_cdf;
    let cdf = match small_jump_cdf {
        Some(c) => Some(c),
        None if law.has_lattice() || law.target_sd() == 0.0 => None,
        None => {
            let values: Vec<f64> = draws.iter().map(|d| d.value).collect();
            own_cdf = EmpiricalCdf::new(&values)?;
            Some(&own_cdf)
        }
    };
    let mut delta_exact = Vec::with_capacity(count);
    let mut delta_approx = Vec::with_capacity(count);
    for (base, d) in shared.iter().zip(&draws) {
        let v: f64 = Open01.sample(rng);
        let g = law.coupled_gaussian(d, v, cdf)?;
        delta_exact.push(base + d.value);
        delta_approx.push(base + g);
    }
    Ok(CoupledIncrementBatch {
        delta_exact,
        delta_approx,
        delta_neglect: shared,
        jump_counts,
    })
}

/// Couple full increments `Δ^n` with Brownian increments `a/n + sqrt(b^2 + m_2) W_{1/n}`.
pub fn sample_coupled_brownian_increment<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    n: u32,
    count: usize,
    increment_cdf: Option<&EmpiricalCdf>,
    rng: &mut R,
) -> Result<CoupledIncrementBatch> {
    let plan = CouplingPlan::brownian(triplet, n, SmallJumpModel::Exact)?;
    sample_coupled_increment(&plan, count, increment_cdf, rng)
}

fn check_stream(coupled: &CoupledIncrementBatch, n: u32, horizon: f64) -> Result<()> {
    let needed = grid_steps(n, horizon);
    if coupled.len() < needed {
        return Err(LevyError::StreamExhausted {
            needed,
            available: coupled.len(),
        });
    }
    Ok(())
}

/// Euler paths driven by `delta_exact` and `delta_approx` respectively.
pub fn simulate_coupled_paths(
    x0: f64,
    sigma: &SigmaFn,
    coupled: &CoupledIncrementBatch,
    n: u32,
    horizon: f64,
) -> Result<(PathGrid, PathGrid)> {
    check_stream(coupled, n, horizon)?;
    Ok((
        simulate_path(x0, sigma, &coupled.delta_exact, n, horizon)?,
        simulate_path(x0, sigma, &coupled.delta_approx, n, horizon)?,
    ))
}

/// Streaming form of [`simulate_coupled_paths`]: only the grid sup of the gap is kept.
pub fn coupled_sup_gap(
    x0: f64,
    sigma: &SigmaFn,
    coupled: &CoupledIncrementBatch,
    n: u32,
    horizon: f64,
) -> Result<f64> {
    check_stream(coupled, n, horizon)?;
    let steps = grid_steps(n, horizon);
    let mut run = CoupledRunningSup::new(x0, x0);
    for (a, b) in coupled.delta_exact[..steps]
        .iter()
        .zip(&coupled.delta_approx[..steps])
    {
        run.step(sigma, *a, *b);
    }
    Ok(run.sup_gap)
}
