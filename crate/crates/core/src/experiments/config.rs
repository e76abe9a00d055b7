//! TOML experiment configuration. One table per experiment; every key has a default
//! and unknown keys are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::euler::SigmaFn;
use crate::increment::LevyTriplet;
use crate::levy_measure::{Atom, LevyMeasure};

/// Smallest sample size accepted behind a statistical assertion.
pub const MIN_STATISTICAL_SAMPLES: usize = 1000;

pub const DEFAULT_SEED: u64 = 20_240_917;

/// All experiment sections, each already merged over its preset.
///
/// Keys given in a section replace the preset value for that key; nested tables such as
/// `driver` or `slope` are replaced as a whole.
#[derive(Debug, Clone)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub clt_check: CltConfig,
    pub clt_lower_bound: CltConfig,
    pub euler_baseline: PathRateConfig,
    pub scheme_rate: PathRateConfig,
    pub neglect_vs_gauss: NeglectConfig,
    pub brownian_approx: BrownianConfig,
    pub cost_audit: CostConfig,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            seed: None,
            clt_check: CltConfig::default(),
            clt_lower_bound: CltConfig::lower_bound(),
            euler_baseline: PathRateConfig::default(),
            scheme_rate: PathRateConfig::scheme(),
            neglect_vs_gauss: NeglectConfig::default(),
            brownian_approx: BrownianConfig::default(),
            cost_audit: CostConfig::default(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawConfig {
    seed: Option<u64>,
    clt_check: Option<toml::Table>,
    clt_lower_bound: Option<toml::Table>,
    euler_baseline: Option<toml::Table>,
    scheme_rate: Option<toml::Table>,
    neglect_vs_gauss: Option<toml::Table>,
    brownian_approx: Option<toml::Table>,
    cost_audit: Option<toml::Table>,
}

fn merge_section<T: Serialize + DeserializeOwned>(
    name: &str,
    preset: T,
    user: Option<toml::Table>,
) -> Result<T> {
    let Some(user) = user else {
        return Ok(preset);
    };
    let mut table = toml::Table::try_from(&preset)
        .map_err(|e| config_error(&format!("[{name}] preset: {e}")))?;
    table.extend(user);
    table
        .try_into()
        .map_err(|e| config_error(&format!("[{name}] {e}")))
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_error(&e.to_string()))?;
        let d = Self::default();
        Ok(Self {
            seed: raw.seed,
            clt_check: merge_section("clt-check", d.clt_check, raw.clt_check)?,
            clt_lower_bound: merge_section(
                "clt-lower-bound",
                d.clt_lower_bound,
                raw.clt_lower_bound,
            )?,
            euler_baseline: merge_section("euler-baseline", d.euler_baseline, raw.euler_baseline)?,
            scheme_rate: merge_section("scheme-rate", d.scheme_rate, raw.scheme_rate)?,
            neglect_vs_gauss: merge_section(
                "neglect-vs-gauss",
                d.neglect_vs_gauss,
                raw.neglect_vs_gauss,
            )?,
            brownian_approx: merge_section(
                "brownian-approx",
                d.brownian_approx,
                raw.brownian_approx,
            )?,
            cost_audit: merge_section("cost-audit", d.cost_audit, raw.cost_audit)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            LevyError::InvalidParameter(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureConfig {
    TwoPoint {
        eps0: f64,
    },
    StableLike {
        alpha: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        cutoff: f64,
    },
    /// `[location, rate]` pairs.
    Atoms {
        atoms: Vec<[f64; 2]>,
    },
    Zero {},
}

fn one() -> f64 {
    1.0
}

impl MeasureConfig {
    pub fn build(&self) -> Result<LevyMeasure> {
        match self {
            MeasureConfig::TwoPoint { eps0 } => LevyMeasure::two_point(*eps0),
            MeasureConfig::StableLike {
                alpha,
                scale,
                cutoff,
            } => LevyMeasure::stable_like(*alpha, *scale, *cutoff),
            MeasureConfig::Atoms { atoms } => {
                LevyMeasure::atoms(atoms.iter().map(|[z, r]| Atom::new(*z, *r)).collect())
            }
            MeasureConfig::Zero {} => Ok(LevyMeasure::zero()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverConfig {
    #[serde(default)]
    pub drift: f64,
    #[serde(default)]
    pub brownian: f64,
    pub nu: MeasureConfig,
}

impl DriverConfig {
    pub fn build(&self) -> Result<LevyTriplet> {
        LevyTriplet::new(self.drift, self.brownian, self.nu.build()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaKind {
    Constant,
    ClippedSine,
    InverseQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    pub kind: SigmaKind,
    #[serde(default = "one")]
    pub scale: f64,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        Self {
            kind: SigmaKind::ClippedSine,
            scale: 1.0,
        }
    }
}

impl SigmaConfig {
    pub fn build(&self) -> SigmaFn {
        match self.kind {
            SigmaKind::Constant => SigmaFn::constant(self.scale),
            SigmaKind::ClippedSine => SigmaFn::clipped_sine(),
            SigmaKind::InverseQuadratic => SigmaFn::inverse_quadratic(self.scale),
        }
    }
}

/// Optional bounds on a fitted slope.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeBounds {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl SlopeBounds {
    pub fn within(target: f64, tol: f64) -> Self {
        Self {
            min: Some(target - tol),
            max: Some(target + tol),
        }
    }

    pub fn at_most(max: f64) -> Self {
        Self {
            min: None,
            max: Some(max),
        }
    }

    pub fn at_least(min: f64) -> Self {
        Self {
            min: Some(min),
            max: None,
        }
    }

    pub fn contains(&self, slope: f64) -> bool {
        self.min.is_none_or(|m| slope >= m) && self.max.is_none_or(|m| slope <= m)
    }

    pub fn is_bounded(&self) -> bool {
        self.min.is_some() || self.max.is_some()
    }

    pub fn describe(&self) -> String {
        match (self.min, self.max) {
            (Some(a), Some(b)) => format!("{a} <= slope <= {b}"),
            (Some(a), None) => format!("slope >= {a}"),
            (None, Some(b)) => format!("slope <= {b}"),
            (None, None) => "none".into(),
        }
    }
}

/// CLT experiments on the two-point family: `Y_t = eps0 (P_1 - P_2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct CltConfig {
    pub eps0: Vec<f64>,
    /// Times as multiples of `eps0^2`.
    pub t_over_eps0_sq: Vec<f64>,
    /// Absolute times added to every `eps0`.
    pub t_absolute: Vec<f64>,
    /// `eps0` grid for the slope fit at time `slope_time`.
    pub slope_eps0: Vec<f64>,
    pub slope_time: f64,
    pub samples: usize,
    /// Empirical ceiling `C` in `W2^2 <= C min(eps0^2, t)`.
    pub upper_cap: f64,
    /// Empirical floor `c` in `W2^2 >= c min(eps0^2, t)`.
    pub lower_floor: f64,
    pub slope: SlopeBounds,
    pub check_upper: bool,
    pub check_lower: bool,
}

impl Default for CltConfig {
    fn default() -> Self {
        Self {
            eps0: vec![0.2, 0.1, 0.05],
            t_over_eps0_sq: vec![0.25, 1.0, 4.0],
            t_absolute: vec![1.0],
            slope_eps0: vec![0.2, 0.1414, 0.1, 0.0707, 0.05],
            slope_time: 1.0,
            samples: 100_000,
            upper_cap: 5.0,
            lower_floor: 0.01,
            slope: SlopeBounds::within(2.0, 0.3),
            check_upper: true,
            check_lower: false,
        }
    }
}

impl CltConfig {
    pub fn lower_bound() -> Self {
        Self {
            check_upper: false,
            check_lower: true,
            slope: SlopeBounds::default(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid("eps0", &self.eps0)?;
        check_grid("t-over-eps0-sq", &self.t_over_eps0_sq)?;
        if !self.t_absolute.is_empty() {
            check_grid("t-absolute", &self.t_absolute)?;
        }
        check_grid("slope-eps0", &self.slope_eps0)?;
        check_positive("slope-time", self.slope_time)?;
        check_samples("samples", self.samples)?;
        check_positive("upper-cap", self.upper_cap)?;
        check_positive("lower-floor", self.lower_floor)
    }
}

/// Strong-error experiments on a fine reference grid (euler-baseline and scheme-rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct PathRateConfig {
    pub driver: DriverConfig,
    pub sigma: SigmaConfig,
    pub x0: f64,
    pub horizon: f64,
    pub n: Vec<u32>,
    /// Reference grid is `refine * max(n)`.
    pub refine: u32,
    pub paths: usize,
    /// Truncation level `eps = eps_scale / n` (scheme-rate only).
    pub eps_scale: f64,
    /// Sample size of the empirical small-jump CDF when no exact lattice CDF exists.
    pub cdf_samples: usize,
    pub slope: SlopeBounds,
    /// scheme-rate only: rerun with `ν = 0` in both scheme and exact-Euler modes and compare.
    pub degenerate_check: bool,
    /// scheme-rate only: increment-level coupling gap over a family of two-point drivers.
    pub increment_gap: IncrementGapConfig,
}

impl Default for PathRateConfig {
    fn default() -> Self {
        Self {
            driver: DriverConfig {
                drift: 0.2,
                brownian: 0.5,
                nu: MeasureConfig::Atoms {
                    atoms: vec![[0.5, 1.0], [-0.3, 2.0]],
                },
            },
            sigma: SigmaConfig::default(),
            x0: 1.0,
            horizon: 1.0,
            n: vec![16, 32, 64, 128, 256, 512],
            refine: 64,
            paths: 10_000,
            eps_scale: 1.0,
            cdf_samples: 100_000,
            slope: SlopeBounds::within(-1.0, 0.3),
            degenerate_check: false,
            increment_gap: IncrementGapConfig {
                enabled: false,
                ..IncrementGapConfig::default()
            },
        }
    }
}

impl PathRateConfig {
    pub fn scheme() -> Self {
        Self {
            driver: DriverConfig {
                drift: 0.2,
                brownian: 0.5,
                nu: MeasureConfig::Atoms {
                    atoms: vec![
                        [1.0 / 256.0, 32768.0],
                        [-1.0 / 256.0, 32768.0],
                        [0.5, 1.0],
                        [-0.5, 1.0],
                    ],
                },
            },
            n: vec![16, 32, 64, 128, 256],
            slope: SlopeBounds::at_most(-0.65),
            degenerate_check: true,
            increment_gap: IncrementGapConfig::default(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.driver.build()?;
        check_grid_u32("n", &self.n)?;
        if self.refine == 0 {
            return Err(config_error("refine must be at least 1"));
        }
        check_positive("horizon", self.horizon)?;
        check_positive("eps-scale", self.eps_scale)?;
        check_samples("paths", self.paths)?;
        if self.increment_gap.enabled {
            self.increment_gap.validate()?;
        }
        Ok(())
    }
}

/// Increment-level gap `E[(Δ^n - Δ^{n,eps})^2]` against `δ_eps` for two-point drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct IncrementGapConfig {
    pub enabled: bool,
    pub drift: f64,
    pub brownian: f64,
    pub n: u32,
    pub eps: f64,
    pub eps0: Vec<f64>,
    pub samples: usize,
    /// Empirical ceiling `C` in `gap <= C δ_eps`.
    pub gap_cap: f64,
    pub slope: SlopeBounds,
}

impl Default for IncrementGapConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            drift: 0.0,
            brownian: 0.0,
            n: 4,
            eps: 0.5,
            eps0: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            samples: 100_000,
            gap_cap: 5.0,
            slope: SlopeBounds::within(2.0, 0.3),
        }
    }
}

impl IncrementGapConfig {
    pub fn validate(&self) -> Result<()> {
        check_grid("increment-gap.eps0", &self.eps0)?;
        if self.n == 0 {
            return Err(config_error("increment-gap.n must be at least 1"));
        }
        check_positive("increment-gap.eps", self.eps)?;
        check_samples("increment-gap.samples", self.samples)?;
        check_positive("increment-gap.gap-cap", self.gap_cap)
    }
}

/// Increment-level comparison of the neglect and Gaussian-compensated laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct NeglectConfig {
    pub driver: DriverConfig,
    pub n: Vec<u32>,
    pub eps_scale: f64,
    pub samples: usize,
    /// Inner truncation `eps' = eps / inner_ratio` for infinite-activity small jumps.
    pub inner_ratio: f64,
    /// Independent samples for the empirical CDF of `S`; 0 means the coupled samples themselves.
    pub cdf_samples: usize,
}

impl Default for NeglectConfig {
    fn default() -> Self {
        Self {
            driver: DriverConfig {
                drift: 0.0,
                brownian: 0.0,
                nu: MeasureConfig::StableLike {
                    alpha: 1.8,
                    scale: 1.0,
                    cutoff: 1.0,
                },
            },
            n: vec![16, 32, 64, 128, 256],
            eps_scale: 1.0,
            samples: 1000,
            inner_ratio: 64.0,
            cdf_samples: 0,
        }
    }
}

impl NeglectConfig {
    pub fn validate(&self) -> Result<()> {
        self.driver.build()?;
        check_grid_u32("n", &self.n)?;
        check_positive("eps-scale", self.eps_scale)?;
        check_samples("samples", self.samples)?;
        if !(self.inner_ratio.is_finite() && self.inner_ratio > 1.0) {
            return Err(config_error("inner-ratio must exceed 1"));
        }
        Ok(())
    }
}

/// Coupling of the jump SDE with its Brownian counterpart for `ν` supported in `[-eps, eps]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct BrownianConfig {
    pub drift: f64,
    pub brownian: f64,
    pub eps: Vec<f64>,
    /// Two-point atoms at `± eps0_over_eps * eps`; values above 1 violate the hypothesis.
    pub eps0_over_eps: f64,
    /// Moment order `p`; the internal grid is `n = ceil(eps^(-p/(p-1)))`.
    pub p: f64,
    pub refine: u32,
    pub paths: usize,
    pub sigma: SigmaConfig,
    pub x0: f64,
    pub horizon: f64,
    pub slope: SlopeBounds,
    /// Also report the `ν = 0` time-discretisation floor.
    pub floor: bool,
}

impl Default for BrownianConfig {
    fn default() -> Self {
        Self {
            drift: 0.2,
            brownian: 0.5,
            eps: vec![0.2, 0.1414, 0.1, 0.0707, 0.05, 0.0354, 0.025],
            eps0_over_eps: 1.0,
            p: 8.0,
            refine: 64,
            paths: 10_000,
            sigma: SigmaConfig::default(),
            x0: 1.0,
            horizon: 1.0,
            slope: SlopeBounds::at_least(0.75),
            floor: true,
        }
    }
}

impl BrownianConfig {
    pub fn validate(&self) -> Result<()> {
        check_grid("eps", &self.eps)?;
        check_positive("eps0-over-eps", self.eps0_over_eps)?;
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(config_error("p must exceed 1"));
        }
        if self.refine == 0 {
            return Err(config_error("refine must be at least 1"));
        }
        check_samples("paths", self.paths)?;
        check_positive("horizon", self.horizon)?;
        if !(self.brownian.is_finite() && self.brownian >= 0.0) {
            return Err(config_error("brownian must be nonnegative"));
        }
        Ok(())
    }
}

/// One stable-like regime of the cost audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CostRegime {
    pub alpha: f64,
    /// Accepted deviation of the fitted exponent from `max(1, alpha)`.
    #[serde(default = "default_exponent_tol")]
    pub exponent_tol: f64,
}

fn default_exponent_tol() -> f64 {
    0.15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct CostConfig {
    pub regime: Vec<CostRegime>,
    pub scale: f64,
    pub cutoff: f64,
    pub brownian: f64,
    pub n: Vec<u32>,
    pub eps_scale: f64,
    pub paths: usize,
    pub horizon: f64,
    pub x0: f64,
    pub sigma: SigmaConfig,
    /// Relative tolerance of the mean cost against `T (n + F_eps)`.
    pub cost_tol: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            regime: vec![
                CostRegime {
                    alpha: 1.5,
                    exponent_tol: 0.15,
                },
                CostRegime {
                    alpha: 0.5,
                    exponent_tol: 0.15,
                },
            ],
            scale: 1.0,
            cutoff: 1.0,
            brownian: 0.5,
            n: vec![64, 128, 256, 512, 1024, 2048],
            eps_scale: 1.0,
            paths: 1000,
            horizon: 1.0,
            x0: 1.0,
            sigma: SigmaConfig::default(),
            cost_tol: 0.05,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.regime.is_empty() {
            return Err(config_error("cost-audit needs at least one regime"));
        }
        for r in &self.regime {
            LevyMeasure::stable_like(r.alpha, self.scale, self.cutoff)?;
            check_positive("exponent-tol", r.exponent_tol)?;
        }
        check_grid_u32("n", &self.n)?;
        check_positive("eps-scale", self.eps_scale)?;
        check_samples("paths", self.paths)?;
        check_positive("horizon", self.horizon)?;
        check_positive("cost-tol", self.cost_tol)
    }
}

fn config_error(msg: &str) -> LevyError {
    LevyError::InvalidParameter(format!("config: {msg}"))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_error(&format!("{name} must be positive, got {v}")))
    }
}

fn check_samples(name: &str, m: usize) -> Result<()> {
    if m < MIN_STATISTICAL_SAMPLES {
        Err(config_error(&format!(
            "{name} must be at least {MIN_STATISTICAL_SAMPLES}, got {m}"
        )))
    } else {
        Ok(())
    }
}

/// Nonempty, positive and strictly monotone in either direction.
pub fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(config_error(&format!("{name} grid is empty")));
    }
    for &v in grid {
        check_positive(name, v)?;
    }
    let up = grid.windows(2).all(|w| w[0] < w[1]);
    let down = grid.windows(2).all(|w| w[0] > w[1]);
    if !(up || down) {
        return Err(config_error(&format!("{name} grid must be strictly monotone")));
    }
    Ok(())
}

fn check_grid_u32(name: &str, grid: &[u32]) -> Result<()> {
    let as_f: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    check_grid(name, &as_f)
}
