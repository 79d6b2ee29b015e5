//! Jump kernels: model class, tail functionals, and tail-regularity
//! constants.
//!
//! A model is an inward drift `a(x)` plus a symmetric jump kernel
//! `ν(x, du)` with density `c(x) |u|^{-1-α(x)}` (stable-like) optionally
//! damped by `exp(-θ |u|^{1+ζ})` (tempered). State dependence enters
//! through the coefficient tables; the constant-coefficient case is the
//! primary one and every constant below is exact there.
//!
//! Densities are always stored one-sided: `ν(x, A) = ∫_{A ∩ (0,∞)} dens +
//! ∫_{-A ∩ (0,∞)} dens` by symmetry, and the tail `N(x, u) = ν(x, [u, ∞))`
//! is one-sided as well.

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{self, QuadConfig, QuadError};

#[derive(Debug, Clone, Error)]
pub enum KernelError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("tail integral diverges at x={x}, threshold u={u}: {detail}")]
    DivergentTail { x: f64, u: f64, detail: String },
    #[error("small-jump moment diverges at x={x}: alpha(x)={alpha} >= 2")]
    DivergentSmallJumps { x: f64, alpha: f64 },
    #[error("kernel declares no tail indices (sigma, delta); declare them or use a stable-like constructor")]
    NoDeclaredIndices,
    #[error(
        "tail-index mismatch: declared sigma={sigma}, delta={delta}, but N(x,{lambda}u)/N(x,u) = {ratio:e} at x={x}, u={u} (allowed [{lo:e}, {hi:e}])"
    )]
    TailIndexMismatch { sigma: f64, delta: f64, x: f64, u: f64, lambda: f64, ratio: f64, lo: f64, hi: f64 },
    #[error("kernel quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
}

/// Piecewise-linear table on a strictly increasing grid, clamped outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl LinearTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, KernelError> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(KernelError::InvalidParameter(format!(
                "table needs matching lengths >= 2, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if !xs.iter().chain(ys.iter()).all(|v| v.is_finite()) {
            return Err(KernelError::InvalidParameter("table entries must be finite".into()));
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(KernelError::InvalidParameter(
                "table abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn min_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A kernel coefficient: constant or tabulated in the state.
#[derive(Debug, Clone, PartialEq)]
pub enum Coef {
    Const(f64),
    Table(LinearTable),
}

impl Coef {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coef::Const(v) => *v,
            Coef::Table(t) => t.eval(x),
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Coef::Const(v) => *v,
            Coef::Table(t) => t.min_value(),
        }
    }

    pub fn max_value(&self) -> f64 {
        match self {
            Coef::Const(v) => *v,
            Coef::Table(t) => t.max_value(),
        }
    }
}

/// Drift field `a(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    /// `a(x) = -strength * sign(x) * |x|^exponent`; inward when strength > 0.
    Power { strength: f64, exponent: f64 },
    Tabulated(LinearTable),
}

impl Drift {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Drift::Power { strength, exponent } => {
                if x == 0.0 {
                    0.0
                } else {
                    -strength * x.signum() * x.abs().powf(*exponent)
                }
            }
            Drift::Tabulated(t) => t.eval(x),
        }
    }
}

/// Declared lower/upper tail indices of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailIndices {
    pub sigma: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// Density `c(x) |u|^{-1-alpha(x)}`.
    StableLike { intensity: Coef, alpha: Coef },
    /// Density `c(x) |u|^{-1-alpha(x)} exp(-theta |u|^{1+zeta})`.
    Tempered { intensity: Coef, alpha: Coef, theta: f64, zeta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Tail indices the kernel claims to satisfy; verified empirically by
    /// [`tail_constants`]. Tempered kernels have none (their tails decay
    /// faster than any power).
    pub declared: Option<TailIndices>,
}

impl KernelSpec {
    pub fn stable(intensity: f64, alpha: f64) -> Self {
        Self {
            family: KernelFamily::StableLike {
                intensity: Coef::Const(intensity),
                alpha: Coef::Const(alpha),
            },
            declared: Some(TailIndices { sigma: alpha, delta: alpha }),
        }
    }

    pub fn stable_varying(intensity: Coef, alpha: Coef) -> Self {
        let declared = Some(TailIndices { sigma: alpha.min_value(), delta: alpha.max_value() });
        Self { family: KernelFamily::StableLike { intensity, alpha }, declared }
    }

    pub fn tempered(intensity: f64, alpha: f64, theta: f64, zeta: f64) -> Self {
        Self {
            family: KernelFamily::Tempered {
                intensity: Coef::Const(intensity),
                alpha: Coef::Const(alpha),
                theta,
                zeta,
            },
            declared: None,
        }
    }

    /// Override the declared indices (primarily to express claims that
    /// [`tail_constants`] is expected to falsify).
    pub fn with_declared_indices(mut self, sigma: f64, delta: f64) -> Self {
        self.declared = Some(TailIndices { sigma, delta });
        self
    }

    pub fn alpha(&self, x: f64) -> f64 {
        match &self.family {
            KernelFamily::StableLike { alpha, .. } | KernelFamily::Tempered { alpha, .. } => {
                alpha.eval(x)
            }
        }
    }

    pub fn intensity(&self, x: f64) -> f64 {
        match &self.family {
            KernelFamily::StableLike { intensity, .. }
            | KernelFamily::Tempered { intensity, .. } => intensity.eval(x),
        }
    }

    /// Exponential damping factor at jump size `|u|`; 1 for stable-like.
    pub fn tempering(&self, u: f64) -> f64 {
        match &self.family {
            KernelFamily::StableLike { .. } => 1.0,
            KernelFamily::Tempered { theta, zeta, .. } => {
                (-theta * u.abs().powf(1.0 + zeta)).exp()
            }
        }
    }

    /// One-sided density at jump size `u != 0`.
    pub fn density(&self, x: f64, u: f64) -> f64 {
        let au = u.abs();
        self.intensity(x) * au.powf(-1.0 - self.alpha(x)) * self.tempering(au)
    }

    /// `density(x, u) * |u|^{1+alpha(x)}`: the bounded slowly-varying part,
    /// used by singularity-removing substitutions.
    pub fn density_prefactor(&self, x: f64, u: f64) -> f64 {
        self.intensity(x) * self.tempering(u.abs())
    }

    /// `ln density(x, u)`: lets callers combine the kernel with
    /// exponentially growing factors before exponentiating.
    pub fn log_density(&self, x: f64, u: f64) -> f64 {
        let au = u.abs();
        let damp = match &self.family {
            KernelFamily::StableLike { .. } => 0.0,
            KernelFamily::Tempered { theta, zeta, .. } => -theta * au.powf(1.0 + zeta),
        };
        self.intensity(x).ln() - (1.0 + self.alpha(x)) * au.ln() + damp
    }

    /// True when the intensity vanishes identically (no jumps at all).
    pub fn intensity_is_zero(&self) -> bool {
        match &self.family {
            KernelFamily::StableLike { intensity, .. }
            | KernelFamily::Tempered { intensity, .. } => intensity.max_value() == 0.0,
        }
    }

    /// The `(theta, zeta)` of the tempering factor, if any: the boundary
    /// of finite exponential moments.
    pub fn exp_envelope(&self) -> Option<(f64, f64)> {
        match &self.family {
            KernelFamily::StableLike { .. } => None,
            KernelFamily::Tempered { theta, zeta, .. } => Some((*theta, *zeta)),
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let (intensity, alpha) = match &self.family {
            KernelFamily::StableLike { intensity, alpha } => (intensity, alpha),
            KernelFamily::Tempered { intensity, alpha, theta, zeta } => {
                if !(*theta > 0.0 && theta.is_finite()) {
                    return Err(KernelError::InvalidParameter(format!(
                        "tempering theta must be positive and finite, got {theta}"
                    )));
                }
                if !(*zeta > -1.0 && *zeta <= 1.0) {
                    return Err(KernelError::InvalidParameter(format!(
                        "tempering zeta must lie in (-1, 1], got {zeta}"
                    )));
                }
                (intensity, alpha)
            }
        };
        if intensity.min_value() < 0.0 {
            return Err(KernelError::InvalidParameter("intensity must be nonnegative".into()));
        }
        if !(alpha.min_value() > 0.0 && alpha.max_value() < 2.0) {
            return Err(KernelError::InvalidParameter(format!(
                "alpha must stay inside (0, 2), got range [{}, {}]",
                alpha.min_value(),
                alpha.max_value()
            )));
        }
        if let Some(TailIndices { sigma, delta }) = self.declared {
            if !(sigma > 0.0 && sigma <= delta && delta.is_finite()) {
                return Err(KernelError::InvalidParameter(format!(
                    "declared indices need 0 < sigma <= delta < inf, got sigma={sigma}, delta={delta}"
                )));
            }
        }
        Ok(())
    }
}

/// Drift plus jump kernel: the full model.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTypeModel {
    pub drift: Drift,
    pub kernel: KernelSpec,
}

impl LevyTypeModel {
    pub fn new(drift: Drift, kernel: KernelSpec) -> Result<Self, KernelError> {
        kernel.validate()?;
        Ok(Self { drift, kernel })
    }

    pub fn drift_at(&self, x: f64) -> f64 {
        self.drift.eval(x)
    }

    /// One-sided tail `N(x, u) = ν(x, [u, ∞))`, `u > 0`.
    pub fn tail(&self, x: f64, u: f64) -> Result<f64, KernelError> {
        assert!(u > 0.0, "tail threshold must be positive, got {u}");
        let alpha = self.kernel.alpha(x);
        let c = self.kernel.intensity(x);
        if c == 0.0 {
            return Ok(0.0);
        }
        match &self.kernel.family {
            KernelFamily::StableLike { .. } => {
                if alpha <= 0.0 {
                    return Err(KernelError::DivergentTail {
                        x,
                        u,
                        detail: format!("alpha(x) = {alpha} <= 0"),
                    });
                }
                Ok(c * u.powf(-alpha) / alpha)
            }
            KernelFamily::Tempered { .. } => {
                let q = quad::integrate_to_inf(
                    |r| self.kernel.density(x, r),
                    u,
                    &QuadConfig::default(),
                )?;
                Ok(q.value)
            }
        }
    }

    /// Mass of `ν(x, ·)` on an interval `[lo, hi]` not containing 0.
    pub fn interval_mass(&self, x: f64, lo: f64, hi: f64) -> Result<f64, KernelError> {
        if !(lo <= hi && lo * hi > 0.0) {
            return Err(KernelError::InvalidParameter(format!(
                "interval [{lo}, {hi}] must avoid 0"
            )));
        }
        let q = quad::integrate(|u| self.kernel.density(x, u), lo, hi, &QuadConfig::default())?;
        Ok(q.value)
    }

    /// `ν_small(x) = ∫_{|u|<=1} u² ν(x, du)`.
    pub fn small_jump_moment(&self, x: f64) -> Result<f64, KernelError> {
        self.small_jump_moment_below(x, 1.0)
    }

    /// `∫_{|u|<=eps} u² ν(x, du)`, the variance rate of jumps below `eps`.
    pub fn small_jump_moment_below(&self, x: f64, eps: f64) -> Result<f64, KernelError> {
        assert!(eps > 0.0 && eps.is_finite());
        let alpha = self.kernel.alpha(x);
        if alpha >= 2.0 {
            return Err(KernelError::DivergentSmallJumps { x, alpha });
        }
        let c = self.kernel.intensity(x);
        if c == 0.0 {
            return Ok(0.0);
        }
        match &self.kernel.family {
            KernelFamily::StableLike { .. } => Ok(2.0 * c * eps.powf(2.0 - alpha) / (2.0 - alpha)),
            KernelFamily::Tempered { .. } => {
                let q = quad::integrate_power_singular(
                    |u| self.kernel.density_prefactor(x, u),
                    alpha,
                    eps,
                    &QuadConfig::default(),
                )?;
                Ok(2.0 * q.value)
            }
        }
    }

    /// Total jump rate beyond `eps`: `ν(x, {|u| >= eps}) = 2 N(x, eps)`.
    pub fn jump_rate_above(&self, x: f64, eps: f64) -> Result<f64, KernelError> {
        Ok(2.0 * self.tail(x, eps)?)
    }

    /// `∫_{|u|>=1} exp(alpha_e |u|^{1+zeta_e}) ν(x, du)`, or the divergence
    /// flag when the geometric panel sums keep growing.
    pub fn exp_moment(&self, x: f64, alpha_e: f64, zeta_e: f64) -> Result<ExpMoment, KernelError> {
        assert!(alpha_e > 0.0, "exponential moment needs alpha_e > 0, got {alpha_e}");
        assert!(zeta_e > -1.0 && zeta_e <= 1.0, "zeta_e must lie in (-1, 1], got {zeta_e}");
        if self.kernel.intensity(x) == 0.0 {
            return Ok(ExpMoment::Finite(0.0));
        }
        let integrand =
            |u: f64| (alpha_e * u.powf(1.0 + zeta_e)).exp() * self.kernel.density(x, u);
        match quad::integrate_to_inf(integrand, 1.0, &QuadConfig::default()) {
            Ok(q) => Ok(ExpMoment::Finite(2.0 * q.value)),
            Err(QuadError::DivergentTail { .. }) | Err(QuadError::NonFinite { .. }) => {
                Ok(ExpMoment::Divergent)
            }
            Err(e) => Err(e.into()),
        }
    }

    /// `sup_x ∫ (1 ∧ u²) ν(x, du)` over the grid: the bounded-activity
    /// diagnostic. Errors if any grid point diverges.
    pub fn jump_activity_bound(&self, grid: &[f64]) -> Result<f64, KernelError> {
        let mut sup = 0.0f64;
        for &x in grid {
            let m = self.small_jump_moment(x)? + self.jump_rate_above(x, 1.0)?;
            if !m.is_finite() {
                return Err(KernelError::DivergentTail {
                    x,
                    u: 1.0,
                    detail: "non-finite jump activity".into(),
                });
            }
            sup = sup.max(m);
        }
        Ok(sup)
    }
}

/// Whether an exponential moment is finite or the quadrature flagged
/// divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpMoment {
    Finite(f64),
    Divergent,
}

impl ExpMoment {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExpMoment::Finite(v) => Some(v),
            ExpMoment::Divergent => None,
        }
    }
}

/// Grids over which the tail constants and the index sandwich are taken.
#[derive(Debug, Clone)]
pub struct TailGrids {
    /// States; must reach at least |x| = 10³.
    pub x: Vec<f64>,
    /// Base of the geometric threshold grid `u0 * 2^j`.
    pub u0: f64,
    /// Number of doublings `j = 0..=doublings`.
    pub doublings: u32,
    /// Ratios λ >= 1 probed in the sandwich.
    pub lambda: Vec<f64>,
    /// Multiplicative tolerance on the sandwich bounds.
    pub tol: f64,
}

impl Default for TailGrids {
    fn default() -> Self {
        Self {
            x: crate::grid::symmetric_geomspace(1.0, 10.0f64.powf(3.5), 8),
            u0: 10.0,
            doublings: 10,
            lambda: vec![2.0, 4.0, 8.0, 16.0],
            tol: 0.02,
        }
    }
}

/// Empirical tail-regularity constants of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    /// `max x^sigma N(x, x)` over the grid.
    pub n_sigma: f64,
    /// `min x^delta N(x, x)` over the grid.
    pub n_delta: f64,
    /// `max N(x, 1)` over the grid.
    pub n_max: f64,
    /// `sup ν_small(x)` over the grid.
    pub nu_small: f64,
    /// Smallest |x| of the grid the bounds were taken over.
    pub x_cutoff: f64,
}

/// Compute the tail constants and verify the declared index sandwich
/// `λ^{-δ} <= N(x, λu)/N(x, u) <= λ^{-σ}` on the grids.
pub fn tail_constants(model: &LevyTypeModel, grids: &TailGrids) -> Result<TailConstants, KernelError> {
    let TailIndices { sigma, delta } = model.kernel.declared.ok_or(KernelError::NoDeclaredIndices)?;
    assert!(
        grids.x.iter().any(|x| x.abs() >= 1e3),
        "tail grid must extend to |x| >= 1e3"
    );

    let mut n_sigma = 0.0f64;
    let mut n_delta = f64::INFINITY;
    let mut n_max = 0.0f64;
    let mut nu_small = 0.0f64;
    let mut x_cutoff = f64::INFINITY;

    for &x in &grids.x {
        let ax = x.abs();
        assert!(ax >= 1.0, "tail grid must stay in |x| >= 1, got {x}");
        x_cutoff = x_cutoff.min(ax);
        let n_xx = model.tail(x, ax)?;
        n_sigma = n_sigma.max(n_xx * ax.powf(sigma));
        n_delta = n_delta.min(n_xx * ax.powf(delta));
        n_max = n_max.max(model.tail(x, 1.0)?);
        nu_small = nu_small.max(model.small_jump_moment(x)?);

        for j in 0..=grids.doublings {
            let u = grids.u0 * 2.0f64.powi(j as i32);
            let n_u = model.tail(x, u)?;
            for &lambda in &grids.lambda {
                let n_lu = model.tail(x, lambda * u)?;
                let ratio = n_lu / n_u;
                let lo = lambda.powf(-delta) / (1.0 + grids.tol);
                let hi = lambda.powf(-sigma) * (1.0 + grids.tol);
                if !(ratio >= lo && ratio <= hi) {
                    return Err(KernelError::TailIndexMismatch {
                        sigma,
                        delta,
                        x,
                        u,
                        lambda,
                        ratio,
                        lo,
                        hi,
                    });
                }
            }
        }
    }

    Ok(TailConstants { n_sigma, n_delta, n_max, nu_small, x_cutoff })
}
