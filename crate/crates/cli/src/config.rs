//! Run configuration: one JSON document drives an entire run.
//!
//! Parsing is strict (unknown keys are rejected) and re-serializing a
//! parsed config is idempotent, so the resolved config embedded in every
//! output artifact re-parses to the exact run that produced it.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ergodicity_core::certificates::{
    self, drift_growth, exp_constant, CertGrids, Certificate,
};
use ergodicity_core::grid;
use ergodicity_core::kernel::{Coef, Drift, KernelSpec, LevyTypeModel, LinearTable};
use ergodicity_core::rates::{RateFn, RatePlan};
use ergodicity_core::simulator::SimConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateBlockCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))
    }

    pub fn model(&self) -> Result<LevyTypeModel> {
        self.model.build()
    }

    pub fn simulation(&self) -> Result<&SimConfig> {
        self.simulation.as_ref().context("config is missing the \"simulation\" block")
    }

    pub fn certificate(&self) -> Result<&CertificateCfg> {
        self.certificate.as_ref().context("config is missing the \"certificate\" block")
    }

    pub fn convergence(&self) -> Result<&ConvergenceCfg> {
        self.convergence.as_ref().context("config is missing the \"convergence\" block")
    }

    /// Seed of the stochastic stages, when the config has any.
    pub fn seed(&self) -> Option<u64> {
        self.simulation.as_ref().map(|s| s.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCfg {
    pub drift: DriftCfg,
    pub kernel: KernelCfg,
    /// Overrides the kernel's default declared tail indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_indices: Option<IndicesCfg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicesCfg {
    pub sigma: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftCfg {
    /// `a(x) = -strength * sign(x) * |x|^exponent`.
    Power { strength: f64, exponent: f64 },
    /// Piecewise-linear `a(x)` through `(x[i], a[i])`, clamped outside.
    Table { x: Vec<f64>, a: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefCfg {
    Const(f64),
    Table { x: Vec<f64>, value: Vec<f64> },
}

impl CoefCfg {
    fn build(&self) -> Result<Coef> {
        Ok(match self {
            CoefCfg::Const(v) => Coef::Const(*v),
            CoefCfg::Table { x, value } => {
                Coef::Table(LinearTable::new(x.clone(), value.clone())?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelCfg {
    /// Jump density `intensity(x) |u|^{-1-alpha(x)}`.
    Stable { intensity: CoefCfg, alpha: CoefCfg },
    /// Jump density `intensity |u|^{-1-alpha} exp(-theta |u|^{1+zeta})`.
    Tempered { intensity: f64, alpha: f64, theta: f64, zeta: f64 },
}

impl ModelCfg {
    pub fn build(&self) -> Result<LevyTypeModel> {
        let drift = match &self.drift {
            DriftCfg::Power { strength, exponent } => {
                Drift::Power { strength: *strength, exponent: *exponent }
            }
            DriftCfg::Table { x, a } => Drift::Tabulated(LinearTable::new(x.clone(), a.clone())?),
        };
        let mut kernel = match &self.kernel {
            KernelCfg::Stable { intensity, alpha } => {
                KernelSpec::stable_varying(intensity.build()?, alpha.build()?)
            }
            KernelCfg::Tempered { intensity, alpha, theta, zeta } => {
                KernelSpec::tempered(*intensity, *alpha, *theta, *zeta)
            }
        };
        if let Some(idx) = self.declared_indices {
            kernel = kernel.with_declared_indices(idx.sigma, idx.delta);
        }
        Ok(LevyTypeModel::new(drift, kernel)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pathway", rename_all = "snake_case")]
pub enum CertificateCfg {
    /// Drift condition on `V = |x|^p` (smoothed near the origin).
    Polynomial {
        p: f64,
        rate: RateCfg,
        #[serde(default = "default_series_tol")]
        series_tol: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grids: Option<GridCfg>,
    },
    /// Drift condition on `V = exp(beta |x|^{1+zeta})`.
    Exponential {
        beta: f64,
        zeta: f64,
        /// Growth exponent of the inward drift, `|a(x)| ~ |x|^kappa`.
        kappa: f64,
        rate: RateCfg,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grids: Option<GridCfg>,
    },
}

fn default_series_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateCfg {
    Linear {
        c: f64,
    },
    Power {
        c: f64,
        q: f64,
    },
    LogPower {
        c: f64,
        beta: f64,
        eta: f64,
    },
    /// Derive shape and coefficient from the drift-growth corollary,
    /// taking `fraction` of the largest admissible coefficient.
    FromDrift {
        #[serde(default = "default_fraction")]
        fraction: f64,
    },
}

fn default_fraction() -> f64 {
    0.5
}

impl RateCfg {
    /// The rate function this block states outright; `None` when it asks
    /// for derivation from the drift corollary.
    pub fn explicit(&self) -> Option<RateFn> {
        match self {
            RateCfg::Linear { c } => Some(RateFn::Linear { c: *c }),
            RateCfg::Power { c, q } => Some(RateFn::Power { c: *c, q: *q }),
            RateCfg::LogPower { c, beta, eta } => {
                Some(RateFn::LogPower { c: *c, beta: *beta, eta: *eta })
            }
            RateCfg::FromDrift { .. } => None,
        }
    }
}

/// Overrides for the certificate evidence grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<GeomGridCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_frac: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeomGridCfg {
    pub start: f64,
    pub stop: f64,
    pub points_per_side: usize,
}

impl GridCfg {
    pub fn resolve(overrides: Option<&GridCfg>) -> CertGrids {
        let mut grids = CertGrids::default();
        if let Some(cfg) = overrides {
            if let Some(outer) = cfg.outer {
                grids.outer =
                    grid::symmetric_geomspace(outer.start, outer.stop, outer.points_per_side);
            }
            if let Some(frac) = cfg.margin_frac {
                grids.margin_frac = frac;
            }
        }
        grids
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateBlockCfg {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_time_grid")]
    pub t_grid: TimeGridCfg,
    /// Explicit rate function; defaults to the certificate block's one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<RateCfg>,
}

impl Default for RateBlockCfg {
    fn default() -> Self {
        Self { gamma: default_gamma(), t_grid: default_time_grid(), f: None }
    }
}

pub fn default_gamma() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridCfg {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

fn default_time_grid() -> TimeGridCfg {
    TimeGridCfg { start: 0.1, stop: 100.0, points: 25 }
}

impl TimeGridCfg {
    pub fn build(&self) -> Result<Vec<f64>> {
        if !(self.start > 0.0 && self.start.is_finite()) {
            bail!("time grid must start at a positive time, got {}", self.start);
        }
        if self.points == 0 {
            bail!("time grid needs at least one point");
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        if !(self.stop > self.start) {
            bail!("time grid must end after it starts: [{}, {}]", self.start, self.stop);
        }
        Ok(grid::geomspace(self.start, self.stop, self.points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceCfg {
    /// Horizons of the TV curve, strictly increasing.
    pub t_grid: Vec<f64>,
    /// Reference horizon standing in for the invariant law; at least four
    /// times the last grid point.
    pub t_ref: f64,
    #[serde(default = "default_tolerance_factor")]
    pub tolerance_factor: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

pub fn default_tolerance_factor() -> f64 {
    2.0
}

/// A certificate config resolved against a model: the checked certificate
/// plus the rate plan it licenses.
pub struct ResolvedCertificate {
    pub certificate: Certificate,
    pub plan_f: RateFn,
}

impl CertificateCfg {
    /// Resolve the candidate rate function, deriving shape and coefficient
    /// from the drift-growth corollary when asked to.
    pub fn resolve_rate(&self, model: &LevyTypeModel) -> Result<RateFn> {
        let (rate, grids) = match self {
            CertificateCfg::Polynomial { rate, grids, .. }
            | CertificateCfg::Exponential { rate, grids, .. } => (rate, grids),
        };
        if let Some(f) = rate.explicit() {
            return Ok(f);
        }
        let RateCfg::FromDrift { fraction } = rate else { unreachable!() };
        if !(*fraction > 0.0 && *fraction <= 1.0) {
            bail!("from_drift fraction must lie in (0, 1], got {fraction}");
        }
        let cert_grids = GridCfg::resolve(grids.as_ref());
        let (kappa, a_kappa) = drift_growth(model, &cert_grids.outer)?;
        let derived = match self {
            CertificateCfg::Polynomial { p, .. } => {
                let sigma = model
                    .kernel
                    .declared
                    .context("polynomial pathway needs declared tail indices")?
                    .sigma;
                certificates::rate_from_drift_poly(kappa, a_kappa, *p, sigma, 1.0)?
            }
            CertificateCfg::Exponential { beta, zeta, .. } => {
                let consts = exp_constant(model, *beta, *zeta, &cert_grids.tail.x)?;
                certificates::rate_from_drift_exp(kappa, a_kappa, *beta, *zeta, consts.c5, 1.0)?
            }
        };
        // Coefficient: the requested fraction of the admissible maximum,
        // falling back to the drift scale when the maximum is unbounded.
        let scale = if derived.max_c.is_finite() {
            derived.max_c
        } else {
            match self {
                CertificateCfg::Polynomial { p, .. } => p * a_kappa,
                CertificateCfg::Exponential { beta, zeta, .. } => beta * (1.0 + zeta) * a_kappa,
            }
        };
        if !(scale > 0.0) {
            bail!(
                "the drift-growth corollary leaves no admissible rate coefficient \
                 (maximum {scale}); the drift is too weak for this Lyapunov function"
            );
        }
        let c = fraction * scale;
        Ok(match derived.f {
            RateFn::Linear { .. } => RateFn::Linear { c },
            RateFn::Power { q, .. } => RateFn::Power { c, q },
            RateFn::LogPower { beta, eta, .. } => RateFn::LogPower { c, beta, eta },
        })
    }

    /// Run the drift-condition check this block describes.
    pub fn check(&self, model: &LevyTypeModel) -> Result<ResolvedCertificate> {
        let f = self.resolve_rate(model)?;
        let certificate = match self {
            CertificateCfg::Polynomial { p, grids, .. } => {
                let cert_grids = GridCfg::resolve(grids.as_ref());
                certificates::certify_polynomial(model, *p, &f, &cert_grids)?
            }
            CertificateCfg::Exponential { beta, zeta, kappa, grids, .. } => {
                let cert_grids = GridCfg::resolve(grids.as_ref());
                certificates::certify_exponential(model, *beta, *zeta, *kappa, &f, &cert_grids)?
            }
        };
        Ok(ResolvedCertificate { certificate, plan_f: f })
    }
}

/// Build the rate plan used for overlays and comparisons.
pub fn rate_plan(f: RateFn, gamma: f64) -> Result<RatePlan> {
    Ok(RatePlan::new(f, gamma)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_json() -> &'static str {
        r#"{
            "model": {
                "drift": {"kind": "power", "strength": 1.0, "exponent": 1.0},
                "kernel": {"kind": "stable", "intensity": 1.0, "alpha": 1.5}
            },
            "certificate": {
                "pathway": "polynomial",
                "p": 1.2,
                "rate": {"kind": "linear", "c": 0.5}
            },
            "simulation": {"n": 200, "t": 1.0, "replicas": 100, "seed": 42, "x0": 5.0},
            "convergence": {"t_grid": [0.5, 1.0], "t_ref": 8.0}
        }"#
    }

    #[test]
    fn round_trip_is_idempotent() {
        let parsed: RunConfig = serde_json::from_str(sample_json()).unwrap();
        let once = serde_json::to_string(&parsed).unwrap();
        let reparsed: RunConfig = serde_json::from_str(&once).unwrap();
        let twice = serde_json::to_string(&reparsed).unwrap();
        assert_eq!(parsed, reparsed);
        assert_eq!(once, twice);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{
            "model": {
                "drift": {"kind": "power", "strength": 1.0, "exponent": 1.0},
                "kernel": {"kind": "stable", "intensity": 1.0, "alpha": 1.5}
            },
            "typo_block": {}
        }"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
    }

    #[test]
    fn model_block_builds_the_core_model() {
        let cfg: RunConfig = serde_json::from_str(sample_json()).unwrap();
        let model = cfg.model().unwrap();
        assert_eq!(model.drift_at(2.0), -2.0);
        let idx = model.kernel.declared.unwrap();
        assert_eq!((idx.sigma, idx.delta), (1.5, 1.5));
    }

    #[test]
    fn tabulated_blocks_build() {
        let json = r#"{
            "model": {
                "drift": {"kind": "table", "x": [-10.0, 0.0, 10.0], "a": [3.0, 0.0, -3.0]},
                "kernel": {
                    "kind": "stable",
                    "intensity": {"x": [-1.0, 1.0], "value": [0.5, 1.0]},
                    "alpha": 1.5
                }
            }
        }"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        let model = cfg.model().unwrap();
        assert_eq!(model.drift_at(10.0), -3.0);
        assert_eq!(model.kernel.intensity(1.0), 1.0);
        assert_eq!(model.kernel.intensity(-1.0), 0.5);
    }

    #[test]
    fn missing_blocks_are_reported_by_name() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
            "model": {
                "drift": {"kind": "power", "strength": 1.0, "exponent": 1.0},
                "kernel": {"kind": "stable", "intensity": 1.0, "alpha": 1.5}
            }
        }"#,
        )
        .unwrap();
        let err = format!("{:#}", cfg.simulation().unwrap_err());
        assert!(err.contains("simulation"), "unhelpful error: {err}");
    }

    #[test]
    fn derived_rate_uses_the_drift_corollary() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
            "model": {
                "drift": {"kind": "power", "strength": 1.0, "exponent": 0.5},
                "kernel": {"kind": "stable", "intensity": 1.0, "alpha": 1.5}
            },
            "certificate": {
                "pathway": "polynomial",
                "p": 1.2,
                "rate": {"kind": "from_drift", "fraction": 0.5}
            }
        }"#,
        )
        .unwrap();
        let model = cfg.model().unwrap();
        let f = cfg.certificate().unwrap().resolve_rate(&model).unwrap();
        // kappa = 0.5 < 1: power rate with q = 1 + (kappa-1)/p and
        // coefficient 0.5 * p * A = 0.6.
        match f {
            RateFn::Power { c, q } => {
                assert!((q - (1.0 - 0.5 / 1.2)).abs() < 1e-12);
                assert!((c - 0.6).abs() < 1e-12);
            }
            other => panic!("expected a power rate, got {other:?}"),
        }
    }

    #[test]
    fn single_point_time_grid_is_allowed() {
        let grid = TimeGridCfg { start: 2.0, stop: 2.0, points: 1 }.build().unwrap();
        assert_eq!(grid, vec![2.0]);
        assert!(TimeGridCfg { start: -1.0, stop: 2.0, points: 3 }.build().is_err());
    }
}
