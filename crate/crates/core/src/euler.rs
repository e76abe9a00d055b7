//! Euler recursion `X_{(i+1)/n} = X_{i/n} + σ(X_{i/n}) Δ_{i+1}` on the grid `ρ_n(t) = ⌊nt⌋/n`.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{LevyError, Result};

/// Bounded Lipschitz coefficient of the SDE.
///
/// The bounds are declared by the constructor and only spot-checked in tests.
#[derive(Clone)]
pub struct SigmaFn {
    name: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lipschitz_bound: f64,
    sup_bound: Option<f64>,
}

impl fmt::Debug for SigmaFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigmaFn")
            .field("name", &self.name)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl SigmaFn {
    pub fn new<F>(name: &str, eval: F, lipschitz_bound: f64, sup_bound: Option<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lipschitz_bound.is_finite() && lipschitz_bound > 0.0) {
            return Err(LevyError::InvalidParameter(format!(
                "Lipschitz bound must be positive, got {lipschitz_bound}"
            )));
        }
        if let Some(s) = sup_bound {
            if !(s.is_finite() && s > 0.0) {
                return Err(LevyError::InvalidParameter(format!(
                    "sup bound must be positive, got {s}"
                )));
            }
        }
        Ok(Self {
            name: name.to_string(),
            eval: Arc::new(eval),
            lipschitz_bound,
            sup_bound,
        })
    }

    /// `σ ≡ c`. The Lipschitz bound is reported as the smallest positive float.
    pub fn constant(c: f64) -> Self {
        Self {
            name: format!("constant({c})"),
            eval: Arc::new(move |_| c),
            lipschitz_bound: f64::MIN_POSITIVE,
            sup_bound: Some(c.abs().max(f64::MIN_POSITIVE)),
        }
    }

    /// `σ(x) = sin(x)`: Lipschitz constant 1 and bounded by 1.
    pub fn clipped_sine() -> Self {
        Self {
            name: "clipped-sine".into(),
            eval: Arc::new(f64::sin),
            lipschitz_bound: 1.0,
            sup_bound: Some(1.0),
        }
    }

    /// `σ(x) = scale / (1 + x^2)`, Lipschitz constant `3√3/8 · |scale|`.
    pub fn inverse_quadratic(scale: f64) -> Self {
        Self {
            name: format!("inverse-quadratic({scale})"),
            eval: Arc::new(move |x| scale / (1.0 + x * x)),
            lipschitz_bound: (3.0 * 3f64.sqrt() / 8.0 * scale.abs()).max(f64::MIN_POSITIVE),
            sup_bound: Some(scale.abs().max(f64::MIN_POSITIVE)),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }
}

/// `⌊nt⌋ / n`.
pub fn rho_n(n: u32, t: f64) -> f64 {
    (n as f64 * t).floor() / n as f64
}

/// Number of Euler steps `⌊nT⌋` on `[0, T]`.
///
/// A relative slack of a few ulps absorbs products such as `10 * 0.3` landing just below an integer.
pub fn grid_steps(n: u32, horizon: f64) -> usize {
    let x = n as f64 * horizon;
    (x * (1.0 + 4.0 * f64::EPSILON)).floor() as usize
}

fn check_grid(n: u32, horizon: f64) -> Result<()> {
    if n == 0 {
        return Err(LevyError::InvalidParameter("n must be at least 1".into()));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(LevyError::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    Ok(())
}

/// One trajectory on `{i/n : 0 <= i <= ⌊nT⌋}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    n: u32,
    horizon: f64,
    values: Vec<f64>,
}

impl PathGrid {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    /// Header `t,value`, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{v}", self.time(i))?;
        }
        Ok(())
    }
}

/// Run the Euler recursion over the first `⌊nT⌋` increments.
pub fn simulate_path(
    x0: f64,
    sigma: &SigmaFn,
    increments: &[f64],
    n: u32,
    horizon: f64,
) -> Result<PathGrid> {
    check_grid(n, horizon)?;
    let steps = grid_steps(n, horizon);
    if increments.len() < steps {
        return Err(LevyError::InsufficientIncrements {
            needed: steps,
            got: increments.len(),
        });
    }
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = x0;
    values.push(x);
    for &d in &increments[..steps] {
        x += sigma.eval(x) * d;
        values.push(x);
    }
    Ok(PathGrid {
        n,
        horizon,
        values,
    })
}

/// `max_i |pa_i - pb_i|` over the common grid.
pub fn sup_error(pa: &PathGrid, pb: &PathGrid) -> Result<f64> {
    if pa.n != pb.n || pa.horizon != pb.horizon || pa.values.len() != pb.values.len() {
        return Err(LevyError::GridMismatch(format!(
            "(n = {}, T = {}, {} points) vs (n = {}, T = {}, {} points)",
            pa.n,
            pa.horizon,
            pa.values.len(),
            pb.n,
            pb.horizon,
            pb.values.len()
        )));
    }
    Ok(pa
        .values
        .iter()
        .zip(&pb.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Two Euler recursions advanced in lockstep, keeping only the running sup of their gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledRunningSup {
    pub a: f64,
    pub b: f64,
    pub sup_gap: f64,
    pub steps: usize,
}

impl CoupledRunningSup {
    pub fn new(xa: f64, xb: f64) -> Self {
        Self {
            a: xa,
            b: xb,
            sup_gap: (xa - xb).abs(),
            steps: 0,
        }
    }

    #[inline]
    pub fn step(&mut self, sigma: &SigmaFn, da: f64, db: f64) {
        self.a += sigma.eval(self.a) * da;
        self.b += sigma.eval(self.b) * db;
        self.steps += 1;
        self.sup_gap = self.sup_gap.max((self.a - self.b).abs());
    }
}
