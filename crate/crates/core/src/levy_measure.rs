//! Parametric Lévy measures with closed-form moment functionals.
//!
//! Three families are supported:
//!
//! * `TwoPointSymmetric { eps0 }`: `(2 eps0^2)^-1 (δ_{eps0} + δ_{-eps0})`, total mass
//!   `eps0^-2`, second moment 1 and fourth moment `eps0^2`.
//! * `TruncatedStableLike { alpha, scale, cutoff }`: density `scale |z|^(-1-alpha)` on
//!   `0 < |z| <= cutoff`. Infinite activity, finite moments of every order `p > alpha`.
//! * `CompoundPoissonAtoms`: finitely many atoms `z_j != 0` with rates `λ_j > 0`.
//!
//! Jumps with `|z| <= eps` count as small and `|z| > eps` as large, for every family.

use rand::Rng;
use rand_distr::{Distribution, Open01};

use crate::error::{LevyError, Result};

/// One atom of a finite-activity Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub rate: f64,
}

impl Atom {
    pub fn new(location: f64, rate: f64) -> Self {
        Self { location, rate }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    TwoPointSymmetric { eps0: f64 },
    TruncatedStableLike { alpha: f64, scale: f64, cutoff: f64 },
    CompoundPoissonAtoms(Vec<Atom>),
}

/// A validated Lévy measure. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    family: Family,
}

/// Which moment to compute: `m_k` when `eps` is `None`, `m_{k,eps}` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentQuery {
    pub order: f64,
    pub eps: Option<f64>,
}

impl MomentQuery {
    pub fn full(order: f64) -> Self {
        Self { order, eps: None }
    }

    pub fn truncated(order: f64, eps: f64) -> Self {
        Self {
            order,
            eps: Some(eps),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(LevyError::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl LevyMeasure {
    pub fn two_point(eps0: f64) -> Result<Self> {
        check_positive("eps0", eps0)?;
        Ok(Self {
            family: Family::TwoPointSymmetric { eps0 },
        })
    }

    pub fn stable_like(alpha: f64, scale: f64, cutoff: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(LevyError::InvalidParameter(format!(
                "alpha must lie in (0, 2), got {alpha}"
            )));
        }
        check_positive("scale", scale)?;
        check_positive("cutoff", cutoff)?;
        Ok(Self {
            family: Family::TruncatedStableLike {
                alpha,
                scale,
                cutoff,
            },
        })
    }

    pub fn atoms(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !a.location.is_finite() || a.location == 0.0 {
                return Err(LevyError::InvalidParameter(format!(
                    "atom location must be finite and nonzero, got {}",
                    a.location
                )));
            }
            check_positive("atom rate", a.rate)?;
        }
        Ok(Self {
            family: Family::CompoundPoissonAtoms(atoms),
        })
    }

    /// The null measure (no jumps).
    pub fn zero() -> Self {
        Self {
            family: Family::CompoundPoissonAtoms(Vec::new()),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.family, Family::CompoundPoissonAtoms(a) if a.is_empty())
    }

    /// Finite-activity measures as an explicit atom list; `None` for the stable-like family.
    pub fn finite_atoms(&self) -> Option<Vec<Atom>> {
        match &self.family {
            Family::TwoPointSymmetric { eps0 } => {
                let rate = 0.5 / (eps0 * eps0);
                Some(vec![Atom::new(*eps0, rate), Atom::new(-*eps0, rate)])
            }
            Family::TruncatedStableLike { .. } => None,
            Family::CompoundPoissonAtoms(atoms) => Some(atoms.clone()),
        }
    }

    pub fn total_mass(&self) -> f64 {
        match &self.family {
            Family::TwoPointSymmetric { eps0 } => 1.0 / (eps0 * eps0),
            Family::TruncatedStableLike { .. } => f64::INFINITY,
            Family::CompoundPoissonAtoms(atoms) => atoms.iter().map(|a| a.rate).sum(),
        }
    }

    pub fn is_finite_activity(&self) -> bool {
        self.total_mass().is_finite()
    }

    /// Largest jump magnitude in the support.
    pub fn max_jump(&self) -> f64 {
        match &self.family {
            Family::TwoPointSymmetric { eps0 } => *eps0,
            Family::TruncatedStableLike { cutoff, .. } => *cutoff,
            Family::CompoundPoissonAtoms(atoms) => atoms
                .iter()
                .map(|a| a.location.abs())
                .fold(0.0, f64::max),
        }
    }

    /// `F_eps(ν) = ν(|z| > eps)`.
    pub fn tail_mass(&self, eps: f64) -> f64 {
        match &self.family {
            Family::TwoPointSymmetric { eps0 } => {
                if *eps0 > eps {
                    1.0 / (eps0 * eps0)
                } else {
                    0.0
                }
            }
            Family::TruncatedStableLike {
                alpha,
                scale,
                cutoff,
            } => {
                if eps >= *cutoff {
                    0.0
                } else {
                    2.0 * scale * (eps.powf(-alpha) - cutoff.powf(-alpha)) / alpha
                }
            }
            Family::CompoundPoissonAtoms(atoms) => atoms
                .iter()
                .filter(|a| a.location.abs() > eps)
                .map(|a| a.rate)
                .sum(),
        }
    }

    /// `∫_{|z| > eps} z ν(dz)`; zero for the symmetric families.
    pub fn tail_first_moment(&self, eps: f64) -> f64 {
        match &self.family {
            Family::TwoPointSymmetric { .. } | Family::TruncatedStableLike { .. } => 0.0,
            Family::CompoundPoissonAtoms(atoms) => atoms
                .iter()
                .filter(|a| a.location.abs() > eps)
                .map(|a| a.rate * a.location)
                .sum(),
        }
    }

    /// `∫ z ν(dz)` over the whole support.
    pub fn first_moment(&self) -> f64 {
        self.tail_first_moment(0.0)
    }

    /// `m_p(ν)` or `m_{p,eps}(ν)`.
    pub fn moment(&self, q: MomentQuery) -> Result<f64> {
        let p = q.order;
        if !(p.is_finite() && p > 0.0) {
            return Err(LevyError::InvalidParameter(format!(
                "moment order must be positive, got {p}"
            )));
        }
        if let Some(eps) = q.eps {
            check_positive("eps", eps)?;
        }
        let eps = q.eps.unwrap_or(f64::INFINITY);
        match &self.family {
            Family::TwoPointSymmetric { eps0 } => {
                if *eps0 <= eps {
                    // 2 atoms × (2 eps0^2)^-1 × eps0^p
                    Ok(abs_pow(*eps0, p - 2.0))
                } else {
                    Ok(0.0)
                }
            }
            Family::TruncatedStableLike {
                alpha,
                scale,
                cutoff,
            } => {
                if p <= *alpha {
                    return Err(LevyError::InfiniteMoment { order: p });
                }
                let upper = eps.min(*cutoff);
                Ok(2.0 * scale * upper.powf(p - alpha) / (p - alpha))
            }
            Family::CompoundPoissonAtoms(atoms) => Ok(atoms
                .iter()
                .filter(|a| a.location.abs() <= eps)
                .map(|a| a.rate * abs_pow(a.location, p))
                .sum()),
        }
    }

    /// `m_2(ν)`; finite for every supported family.
    pub fn m2(&self) -> f64 {
        self.moment(MomentQuery::full(2.0))
            .expect("second moment is finite for every family")
    }

    /// `m_{2,eps}(ν)`.
    pub fn m2_eps(&self, eps: f64) -> f64 {
        self.moment(MomentQuery::truncated(2.0, eps))
            .expect("truncated second moment is finite for every family")
    }

    /// `δ_eps(ν) = m_{4,eps} / m_{2,eps}`, never larger than `eps^2`.
    pub fn delta_eps(&self, eps: f64) -> Result<f64> {
        check_positive("eps", eps)?;
        let m2 = self.moment(MomentQuery::truncated(2.0, eps))?;
        if m2 <= 0.0 {
            return Err(LevyError::DegenerateSmallJumps { eps });
        }
        match &self.family {
            Family::TwoPointSymmetric { eps0 } => Ok(eps0 * eps0),
            Family::TruncatedStableLike { alpha, cutoff, .. } => {
                let upper = eps.min(*cutoff);
                Ok(upper * upper * (2.0 - alpha) / (4.0 - alpha))
            }
            Family::CompoundPoissonAtoms(atoms) => {
                let m4 = self.moment(MomentQuery::truncated(4.0, eps))?;
                // A weighted mean of z^2 over the small atoms; rounding may push it
                // a few ulps past the largest z^2, so cap it there.
                let max_sq = atoms
                    .iter()
                    .map(|a| a.location.abs())
                    .filter(|&z| z <= eps)
                    .fold(0.0, f64::max)
                    .powi(2);
                Ok((m4 / m2).min(max_sq))
            }
        }
    }

    /// One draw from `ν(dz) 1_{|z| > eps} / F_eps(ν)`.
    pub fn sample_large_jump<R: Rng + ?Sized>(&self, eps: f64, rng: &mut R) -> Result<f64> {
        if self.tail_mass(eps) <= 0.0 {
            return Err(LevyError::EmptyTail { eps });
        }
        Ok(self.sample_large_jump_unchecked(eps, rng))
    }

    /// As [`sample_large_jump`](Self::sample_large_jump) without the emptiness check.
    pub(crate) fn sample_large_jump_unchecked<R: Rng + ?Sized>(&self, eps: f64, rng: &mut R) -> f64 {
        match &self.family {
            Family::TwoPointSymmetric { eps0 } => {
                if rng.random::<bool>() {
                    *eps0
                } else {
                    -*eps0
                }
            }
            Family::TruncatedStableLike { alpha, cutoff, .. } => {
                let magnitude = stable_band_inverse_cdf(*alpha, eps, *cutoff, Open01.sample(rng));
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            Family::CompoundPoissonAtoms(atoms) => {
                let total: f64 = atoms
                    .iter()
                    .filter(|a| a.location.abs() > eps)
                    .map(|a| a.rate)
                    .sum();
                let mut target = rng.random::<f64>() * total;
                let mut last = 0.0;
                for a in atoms.iter().filter(|a| a.location.abs() > eps) {
                    last = a.location;
                    if target < a.rate {
                        return a.location;
                    }
                    target -= a.rate;
                }
                last
            }
        }
    }
}

/// `|x|^p`, exact for small integer orders.
fn abs_pow(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 16.0 {
        x.abs().powi(p as i32)
    } else {
        x.abs().powf(p)
    }
}

/// Inverse CDF of the magnitude law `∝ z^(-1-alpha)` on `(lo, hi]`.
pub(crate) fn stable_band_inverse_cdf(alpha: f64, lo: f64, hi: f64, u: f64) -> f64 {
    let a = lo.powf(-alpha);
    let b = hi.powf(-alpha);
    (a - u * (a - b)).powf(-1.0 / alpha).min(hi)
}
