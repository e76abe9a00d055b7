//! Shared-noise grid refinement.
//!
//! A reference Euler path is run on a fine grid `n_ref` with exact finite-activity
//! increments. Every coarse grid `n` (dividing `n_ref`) is driven by the same Brownian
//! increments and jump counts, aggregated over its steps, so the coarse paths are
//! coupled to the reference pathwise.
//!
//! Per coarse step the jump counts are split at `eps` into large atoms, which enter
//! both coarse increments as they are, and small atoms, whose compensated sum `S`
//! enters the exact increment while its quantile-coupled Gaussian enters the
//! approximate one.
//!
//! Driver noise comes from the stream `(seed, DRIVER, path)` and coupling jitter from
//! `(seed, COUPLING, path)`, so runs that differ only in the coarse increment law see
//! identical driver noise.

use rand_distr::{Distribution, Open01, StandardNormal};
use rayon::prelude::*;

use crate::coupling::{EmpiricalCdf, SmallJumpLaw, SmallJumpModel};
use crate::error::{LevyError, Result};
use crate::euler::{grid_steps, SigmaFn};
use crate::increment::{LevyTriplet, PoissonCount};
use crate::levy_measure::Atom;
use crate::rng::{substream, tag};

/// Law of the coarse increment compared with the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoarseLaw {
    /// Exact increments (plain Euler).
    Exact,
    /// Gaussian-compensated increments with `eps = eps_scale / n`.
    Scheme { eps_scale: f64 },
    /// Every jump is small: `a/n + sqrt(b^2 + m_2) W_{1/n}`.
    Brownian,
}

#[derive(Debug, Clone)]
pub struct RefinementSpec<'a> {
    pub triplet: &'a LevyTriplet,
    pub sigma: &'a SigmaFn,
    pub x0: f64,
    pub horizon: f64,
    pub grids: &'a [u32],
    pub n_ref: u32,
    pub law: CoarseLaw,
    pub paths: usize,
    pub seed: u64,
    /// Sample size of the empirical small-jump CDF when no lattice CDF exists.
    pub cdf_samples: usize,
}

/// Per-path results for one coarse grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub n: u32,
    /// Truncation level used for the split (0 for exact, `inf`-like for Brownian).
    pub eps: f64,
    /// `max_i |X_ref(i/n) - X_coarse(i/n)|^2` for the requested law.
    pub sq_sup_errors: Vec<f64>,
    /// Same for the exact-increment coarse Euler path driven by the same noise.
    pub exact_sq_sup_errors: Vec<f64>,
    /// Large jumps simulated on the coarse grid, per path.
    pub large_jumps: Vec<u64>,
    pub coarse_steps: usize,
}

struct GridPlan {
    n: u32,
    ratio: usize,
    eps: f64,
    drift: f64,
    large: Vec<bool>,
    small: Option<SmallJumpLaw>,
    cdf: Option<EmpiricalCdf>,
}

struct GridState {
    x_main: f64,
    x_exact: f64,
    bsum: f64,
    acc: Vec<u64>,
    sup_main: f64,
    sup_exact: f64,
    large_jumps: u64,
}

pub fn run_refinement(spec: &RefinementSpec<'_>) -> Result<Vec<GridOutcome>> {
    if spec.grids.is_empty() {
        return Err(LevyError::InvalidParameter("no coarse grids".into()));
    }
    if spec.paths == 0 {
        return Err(LevyError::InvalidParameter("paths must be at least 1".into()));
    }
    let atoms = spec.triplet.nu.finite_atoms().ok_or(LevyError::InfiniteActivity)?;
    let nf_ref = spec.n_ref as f64;
    let plans = spec
        .grids
        .iter()
        .enumerate()
        .map(|(gi, &n)| grid_plan(spec, &atoms, gi, n))
        .collect::<Result<Vec<_>>>()?;

    let compensator: f64 = atoms.iter().map(|a| a.rate * a.location).sum();
    let fine = FineStep {
        drift: (spec.triplet.drift - compensator) / nf_ref,
        bm_sd: spec.triplet.brownian / nf_ref.sqrt(),
        locations: atoms.iter().map(|a| a.location).collect(),
        counts: atoms
            .iter()
            .map(|a| PoissonCount::new(a.rate / nf_ref))
            .collect::<Result<Vec<_>>>()?,
    };
    let steps = grid_steps(spec.n_ref, spec.horizon);

    let per_path: Vec<Vec<(f64, f64, u64)>> = (0..spec.paths)
        .into_par_iter()
        .map(|p| simulate_one(spec, &fine, &plans, steps, p as u64))
        .collect::<Result<Vec<_>>>()?;

    Ok(plans
        .iter()
        .enumerate()
        .map(|(gi, plan)| GridOutcome {
            n: plan.n,
            eps: plan.eps,
            sq_sup_errors: per_path.iter().map(|r| r[gi].0).collect(),
            exact_sq_sup_errors: per_path.iter().map(|r| r[gi].1).collect(),
            large_jumps: per_path.iter().map(|r| r[gi].2).collect(),
            coarse_steps: steps / plan.ratio,
        })
        .collect())
}

fn grid_plan(spec: &RefinementSpec<'_>, atoms: &[Atom], gi: usize, n: u32) -> Result<GridPlan> {
    if n == 0 || spec.n_ref % n != 0 {
        return Err(LevyError::InvalidParameter(format!(
            "coarse grid n = {n} must divide the reference grid n_ref = {}",
            spec.n_ref
        )));
    }
    let nu = &spec.triplet.nu;
    let eps = match spec.law {
        CoarseLaw::Exact => 0.0,
        CoarseLaw::Scheme { eps_scale } => eps_scale / n as f64,
        CoarseLaw::Brownian => {
            let m = nu.max_jump();
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    };
    let large: Vec<bool> = atoms.iter().map(|a| a.location.abs() > eps).collect();
    let large_first: f64 = atoms
        .iter()
        .zip(&large)
        .filter(|(_, &l)| l)
        .map(|(a, _)| a.rate * a.location)
        .sum();
    let drift = (spec.triplet.drift - large_first) / n as f64;
    let small = if eps > 0.0 {
        Some(SmallJumpLaw::new(nu, n, eps, SmallJumpModel::Exact)?)
    } else {
        None
    };
    let cdf = match &small {
        Some(law) if !law.has_lattice() && law.target_sd() > 0.0 => {
            if spec.cdf_samples == 0 {
                return Err(LevyError::EmptyCdf);
            }
            let mut rng = substream(spec.seed, &[tag::CDF, gi as u64]);
            Some(law.empirical_cdf(spec.cdf_samples, &mut rng)?)
        }
        _ => None,
    };
    Ok(GridPlan {
        n,
        ratio: (spec.n_ref / n) as usize,
        eps,
        drift,
        large,
        small,
        cdf,
    })
}

struct FineStep {
    drift: f64,
    bm_sd: f64,
    locations: Vec<f64>,
    counts: Vec<PoissonCount>,
}

fn simulate_one(
    spec: &RefinementSpec<'_>,
    fine: &FineStep,
    plans: &[GridPlan],
    steps: usize,
    path: u64,
) -> Result<Vec<(f64, f64, u64)>> {
    let mut drv = substream(spec.seed, &[tag::DRIVER, path]);
    let mut cpl = substream(spec.seed, &[tag::COUPLING, path]);
    let sigma = spec.sigma;
    let na = fine.locations.len();
    let mut c = vec![0u64; na];
    let mut states: Vec<GridState> = plans
        .iter()
        .map(|_| GridState {
            x_main: spec.x0,
            x_exact: spec.x0,
            bsum: 0.0,
            acc: vec![0; na],
            sup_main: 0.0,
            sup_exact: 0.0,
            large_jumps: 0,
        })
        .collect();
    let exact_only = spec.law == CoarseLaw::Exact;

    let mut x_ref = spec.x0;
    for step in 1..=steps {
        let g: f64 = StandardNormal.sample(&mut drv);
        let bm = fine.bm_sd * g;
        let mut jumps = 0.0;
        for j in 0..na {
            c[j] = fine.counts[j].sample(&mut drv);
            jumps += fine.locations[j] * c[j] as f64;
        }
        x_ref += sigma.eval(x_ref) * (fine.drift + bm + jumps);

        for (plan, st) in plans.iter().zip(states.iter_mut()) {
            st.bsum += bm;
            for j in 0..na {
                st.acc[j] += c[j];
            }
            if step % plan.ratio != 0 {
                continue;
            }
            let mut large_sum = 0.0;
            for j in 0..na {
                if plan.large[j] {
                    large_sum += fine.locations[j] * st.acc[j] as f64;
                    st.large_jumps += st.acc[j];
                }
            }
            let base = plan.drift + st.bsum + large_sum;
            let (s, g) = match &plan.small {
                Some(law) => {
                    let draw = law.from_counts(&st.acc)?;
                    let v: f64 = Open01.sample(&mut cpl);
                    (draw.value, law.coupled_gaussian(&draw, v, plan.cdf.as_ref())?)
                }
                None => (0.0, 0.0),
            };
            let inc_exact = base + s;
            st.x_exact += sigma.eval(st.x_exact) * inc_exact;
            let gap_exact = x_ref - st.x_exact;
            st.sup_exact = st.sup_exact.max(gap_exact * gap_exact);
            if exact_only {
                st.x_main = st.x_exact;
                st.sup_main = st.sup_exact;
            } else {
                st.x_main += sigma.eval(st.x_main) * (base + g);
                let gap = x_ref - st.x_main;
                st.sup_main = st.sup_main.max(gap * gap);
            }
            st.bsum = 0.0;
            st.acc.iter_mut().for_each(|a| *a = 0);
        }
    }
    Ok(states
        .iter()
        .map(|s| (s.sup_main, s.sup_exact, s.large_jumps))
        .collect())
}
