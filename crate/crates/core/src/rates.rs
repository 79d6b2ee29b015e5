//! Convergence-rate calculus.
//!
//! A certified drift condition comes with an increasing rate function
//! `f`; the total-variation convergence rate is then
//!
//! ```text
//! F(t) = ∫_1^t dw / f(w),      psi(t) = 1 / f(F⁻¹(gamma t)),
//! ```
//!
//! for a free time-split parameter `gamma > 0`. All three rate families
//! produced by the certificates have closed forms for `F`, `F⁻¹` and
//! `psi`; the numeric fallback integrates `1/f` after the substitution
//! `s = ln w` and inverts by bracketing, and exists to cross-check the
//! closed forms and to serve rate functions supplied from outside.

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{self, QuadConfig, QuadError};

#[derive(Debug, Clone, Error)]
pub enum RateError {
    #[error("invalid rate function: {0}")]
    InvalidRate(String),
    #[error(
        "target {y} is out of range: F is bounded by {sup} for this rate function; use the linear (kappa >= 1) form instead"
    )]
    OutOfRange { y: f64, sup: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Rate-function families arising from the drift corollaries.
///
/// All are positive and increasing on `(1, ∞)`; `LogPower` with negative
/// `eta` diverges at `x = 1` (its reciprocal integrates fine).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFn {
    /// `f(x) = c x`: exponential decay pathway.
    Linear { c: f64 },
    /// `f(x) = c x^q`: polynomial decay pathway for `q < 1`. `q > 1` is
    /// accepted for the calculus (bounded `F`), though it is not concave.
    Power { c: f64, q: f64 },
    /// `f(x) = c x (ln x / beta)^eta`: subexponential decay pathway.
    LogPower { c: f64, beta: f64, eta: f64 },
}

impl RateFn {
    pub fn validate(&self) -> Result<(), RateError> {
        let bad = |msg: String| Err(RateError::InvalidRate(msg));
        match *self {
            RateFn::Linear { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad(format!("linear coefficient must be positive, got {c}"));
                }
            }
            RateFn::Power { c, q } => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad(format!("power coefficient must be positive, got {c}"));
                }
                if !(q > 0.0 && q != 1.0 && q.is_finite()) {
                    return bad(format!(
                        "power exponent must be positive and distinct from 1, got {q}"
                    ));
                }
            }
            RateFn::LogPower { c, beta, eta } => {
                if !(c > 0.0 && c.is_finite() && beta > 0.0 && beta.is_finite()) {
                    return bad(format!(
                        "log-power needs positive c and beta, got c={c}, beta={beta}"
                    ));
                }
                if !(eta < 1.0 && eta != 0.0 && eta.is_finite()) {
                    return bad(format!(
                        "log-power exponent must satisfy eta < 1, eta != 0, got {eta}"
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            RateFn::Linear { c } => c * x,
            RateFn::Power { c, q } => c * x.powf(q),
            RateFn::LogPower { c, beta, eta } => c * x * (x.ln() / beta).powf(eta),
        }
    }

    /// `ln f(e^l)`: evaluation against arguments given in log scale, for
    /// states where the Lyapunov value itself overflows.
    pub fn log_eval_at_log(&self, l: f64) -> f64 {
        match *self {
            RateFn::Linear { c } => c.ln() + l,
            RateFn::Power { c, q } => c.ln() + q * l,
            RateFn::LogPower { c, beta, eta } => c.ln() + l + eta * (l.ln() - beta.ln()),
        }
    }

    /// Closed form of `F(t) = ∫_1^t dw / f(w)`.
    pub fn big_f(&self, t: f64) -> f64 {
        debug_assert!(t >= 1.0);
        match *self {
            RateFn::Linear { c } => t.ln() / c,
            RateFn::Power { c, q } => (t.powf(1.0 - q) - 1.0) / (c * (1.0 - q)),
            RateFn::LogPower { c, beta, eta } => {
                beta.powf(eta) * t.ln().powf(1.0 - eta) / (c * (1.0 - eta))
            }
        }
    }

    /// Supremum of `F`; finite only for `Power` with `q > 1`.
    pub fn sup_big_f(&self) -> f64 {
        match *self {
            RateFn::Power { c, q } if q > 1.0 => 1.0 / (c * (q - 1.0)),
            _ => f64::INFINITY,
        }
    }

    /// Closed form of `F⁻¹(y)`, `y >= 0`.
    pub fn inverse_f(&self, y: f64) -> Result<f64, RateError> {
        if y < 0.0 {
            return Err(RateError::InvalidRate(format!("F⁻¹ needs y >= 0, got {y}")));
        }
        let sup = self.sup_big_f();
        if y >= sup {
            return Err(RateError::OutOfRange { y, sup });
        }
        Ok(match *self {
            RateFn::Linear { c } => (c * y).exp(),
            RateFn::Power { c, q } => (1.0 + c * (1.0 - q) * y).powf(1.0 / (1.0 - q)),
            RateFn::LogPower { c, beta, eta } => {
                ((y * c * (1.0 - eta) * beta.powf(-eta)).powf(1.0 / (1.0 - eta))).exp()
            }
        })
    }

    /// `ln F⁻¹(y)`: avoids the outer `exp` when only logs are needed.
    fn log_inverse_f(&self, y: f64) -> Result<f64, RateError> {
        if y < 0.0 {
            return Err(RateError::InvalidRate(format!("F⁻¹ needs y >= 0, got {y}")));
        }
        let sup = self.sup_big_f();
        if y >= sup {
            return Err(RateError::OutOfRange { y, sup });
        }
        Ok(match *self {
            RateFn::Linear { c } => c * y,
            RateFn::Power { c, q } => (1.0 + c * (1.0 - q) * y).ln() / (1.0 - q),
            RateFn::LogPower { c, beta, eta } => {
                (y * c * (1.0 - eta) * beta.powf(-eta)).powf(1.0 / (1.0 - eta))
            }
        })
    }

    /// Decay-family tag used in reports.
    pub fn family_tag(&self) -> &'static str {
        match self {
            RateFn::Linear { .. } => "exp",
            RateFn::Power { .. } => "poly",
            RateFn::LogPower { .. } => "subexp",
        }
    }
}

/// A rate function together with the time-split parameter `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePlan {
    pub f: RateFn,
    pub gamma: f64,
}

impl RatePlan {
    pub fn new(f: RateFn, gamma: f64) -> Result<Self, RateError> {
        f.validate()?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(RateError::InvalidRate(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(Self { f, gamma })
    }

    /// `psi(t) = 1 / f(F⁻¹(gamma t))` via closed forms.
    pub fn psi(&self, t: f64) -> Result<f64, RateError> {
        Ok(self.log_psi(t)?.exp())
    }

    /// `ln psi(t)`; plotting-friendly for very fast decays.
    pub fn log_psi(&self, t: f64) -> Result<f64, RateError> {
        let l = self.f.log_inverse_f(self.gamma * t)?;
        Ok(-self.f.log_eval_at_log(l))
    }

    /// Smallest time from which the closed `psi` is guaranteed
    /// nonincreasing. Zero except for the subexponential family, which
    /// rises from `psi(0) = 0` before its decay sets in.
    pub fn monotone_start(&self) -> f64 {
        match self.f {
            RateFn::LogPower { c, beta, eta } if eta < 0.0 => {
                // psi decreases once E(t) = ln F⁻¹(gamma t) exceeds -eta.
                (-eta).powf(1.0 - eta) * beta.powf(eta) / (self.gamma * c * (1.0 - eta))
            }
            _ => 0.0,
        }
    }

    /// `F(t)` by adaptive quadrature of `1/f` after `s = ln w`;
    /// cross-checks the closed form.
    pub fn big_f_numeric(&self, t: f64, cfg: &QuadConfig) -> Result<f64, RateError> {
        if t < 1.0 {
            return Err(RateError::InvalidRate(format!("F is defined for t >= 1, got {t}")));
        }
        if t == 1.0 {
            return Ok(0.0);
        }
        let l = t.ln();
        let integrand = |s: f64| (s - self.f.log_eval_at_log(s)).exp();
        let q = match self.f {
            // Integrable endpoint singularity: the integrand is exactly
            // (beta/s)^eta / c, so flatten s^{-eta} by substitution.
            RateFn::LogPower { c, beta, eta } if eta > 0.0 => {
                quad::integrate_power_singular(|_s| beta.powf(eta) / c, 1.0 + eta, l, cfg)?
            }
            _ => quad::integrate(integrand, 0.0, l, cfg)?,
        };
        Ok(q.value)
    }

    /// `F⁻¹(y)` by doubling bracket plus bisection on the numeric `F`.
    pub fn inverse_f_numeric(&self, y: f64, cfg: &QuadConfig) -> Result<f64, RateError> {
        if y < 0.0 {
            return Err(RateError::InvalidRate(format!("F⁻¹ needs y >= 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(1.0);
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while self.big_f_numeric(hi.exp(), cfg)? < y {
            lo = hi;
            hi *= 2.0;
            if hi > 690.0 {
                return Err(RateError::OutOfRange { y, sup: self.f.sup_big_f() });
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.big_f_numeric(mid.exp(), cfg)? < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * (1.0 + hi) {
                break;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    /// `psi(t)` through the numeric inverse; cross-checks the closed form.
    pub fn psi_numeric(&self, t: f64, cfg: &QuadConfig) -> Result<f64, RateError> {
        let inv = self.inverse_f_numeric(self.gamma * t, cfg)?;
        Ok((-self.f.log_eval_at_log(inv.ln())).exp())
    }
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use crate::stats;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn linear_big_f_is_scaled_log() {
        let f = RateFn::Linear { c: 1.0 };
        assert_relative_eq!(f.big_f(core::f64::consts::E), 1.0, max_relative = 1e-14);
        assert_eq!(f.big_f(1.0), 0.0);
        let f2 = RateFn::Linear { c: 0.5 };
        assert_relative_eq!(f2.big_f(10.0), 2.0 * 10.0f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn power_big_f_matches_hand_value() {
        // q = 1/6 comes from kappa = 0, p = 1.2; 64^{5/6} = 32.
        let f = RateFn::Power { c: 1.0, q: 1.0 / 6.0 };
        assert_relative_eq!(f.big_f(64.0), 37.2, max_relative = 1e-12);
    }

    #[test]
    fn inverse_recovers_hand_values() {
        let f = RateFn::Linear { c: 1.0 };
        assert_relative_eq!(f.inverse_f(1.0).unwrap(), core::f64::consts::E, max_relative = 1e-14);
        let g = RateFn::Power { c: 1.0, q: 1.0 / 6.0 };
        assert_relative_eq!(g.inverse_f(37.2).unwrap(), 64.0, max_relative = 1e-12);
        for f in [f, g, RateFn::LogPower { c: 0.5, beta: 1.0, eta: -2.0 }] {
            assert_eq!(f.inverse_f(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn bounded_f_rejects_targets_past_its_sup() {
        let f = RateFn::Power { c: 1.0, q: 2.0 };
        assert_relative_eq!(f.sup_big_f(), 1.0);
        assert!(f.inverse_f(0.5).is_ok());
        assert!(matches!(f.inverse_f(1.0), Err(RateError::OutOfRange { .. })));
        let plan = RatePlan::new(f, 1.0).unwrap();
        assert!(matches!(
            plan.inverse_f_numeric(1.5, &cfg()),
            Err(RateError::OutOfRange { .. })
        ));
    }

    #[test]
    fn closed_and_numeric_big_f_agree() {
        let fns = [
            RateFn::Linear { c: 0.5 },
            RateFn::Power { c: 1.0, q: 1.0 / 6.0 },
            RateFn::Power { c: 2.0, q: 0.75 },
            RateFn::LogPower { c: 0.5, beta: 1.0, eta: -2.0 },
            RateFn::LogPower { c: 1.5, beta: 0.7, eta: 0.5 },
        ];
        for f in fns {
            let plan = RatePlan::new(f, 1.0).unwrap();
            for t in [1.0, 1.5, core::f64::consts::E, 10.0, 1e3] {
                let closed = f.big_f(t);
                let numeric = plan.big_f_numeric(t, &cfg()).unwrap();
                assert_relative_eq!(closed, numeric, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn closed_and_numeric_psi_agree() {
        let plans = [
            RatePlan::new(RateFn::Linear { c: 0.5 }, 1.0).unwrap(),
            RatePlan::new(RateFn::Power { c: 1.0, q: 1.0 / 6.0 }, 0.8).unwrap(),
            RatePlan::new(RateFn::LogPower { c: 0.5, beta: 1.0, eta: -2.0 }, 1.0).unwrap(),
        ];
        for plan in plans {
            for t in [0.1, 1.0, 10.0, 100.0] {
                let closed = plan.psi(t).unwrap();
                let numeric = plan.psi_numeric(t, &cfg()).unwrap();
                assert_relative_eq!(closed, numeric, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn psi_hand_values() {
        let exp_plan = RatePlan::new(RateFn::Linear { c: 1.0 }, 1.0).unwrap();
        assert_relative_eq!(exp_plan.psi(2.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-12);

        let poly = RatePlan::new(RateFn::Power { c: 2.0, q: 1.0 / 6.0 }, 1.0).unwrap();
        assert_relative_eq!(poly.psi(0.0).unwrap(), 0.5, max_relative = 1e-12);

        // kappa = 0, p = 1.2, C = gamma = 1, t = 1.2 -> 2^{-0.2}.
        let poly2 = RatePlan::new(RateFn::Power { c: 1.0, q: 1.0 / 6.0 }, 1.0).unwrap();
        assert_relative_eq!(poly2.psi(1.2).unwrap(), 2.0f64.powf(-0.2), max_relative = 1e-12);
    }

    #[test]
    fn psi_nonincreasing_past_monotone_start() {
        let plans = [
            RatePlan::new(RateFn::Linear { c: 0.7 }, 1.3).unwrap(),
            RatePlan::new(RateFn::Power { c: 1.0, q: 0.4 }, 1.0).unwrap(),
            RatePlan::new(RateFn::LogPower { c: 0.5, beta: 1.0, eta: -2.0 }, 1.0).unwrap(),
        ];
        for plan in plans {
            let t0 = plan.monotone_start();
            let grid = crate::grid::geomspace(t0.max(1e-3), 1e4, 200);
            // Compare in log scale: psi itself underflows to 0 for the
            // fast linear decay long before the grid ends.
            let mut prev = f64::INFINITY;
            for t in grid {
                let lv = plan.log_psi(t).unwrap();
                assert!(lv.is_finite());
                assert!(plan.psi(t).unwrap() >= 0.0);
                assert!(lv <= prev + 1e-12, "psi increased at t={t}");
                prev = lv;
            }
        }
    }

    #[test]
    fn poly_pathway_has_the_predicted_time_exponent() {
        // kappa = 0, p = 1.2: psi should decay like t^{1 - p/(1-kappa)}.
        let (kappa, p) = (0.0, 1.2);
        let q = 1.0 + (kappa - 1.0) / p;
        let plan = RatePlan::new(RateFn::Power { c: 1.0, q }, 1.0).unwrap();
        let ts = crate::grid::geomspace(1e2, 1e4, 40);
        let pts: Vec<(f64, f64)> =
            ts.iter().map(|&t| (t.ln(), plan.log_psi(t).unwrap())).collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let (_, slope) = stats::linear_fit(&xs, &ys);
        let predicted = 1.0 - p / (1.0 - kappa);
        assert!(
            (slope - predicted).abs() <= 0.01 * predicted.abs(),
            "slope {slope} vs predicted {predicted}"
        );
    }

    #[test]
    fn maximal_zeta_decays_fastest() {
        // kappa = -0.5: eta(zeta) = (kappa + zeta)/(1 + zeta); zeta = kappa
        // gives the largest exponent 1/(1 - eta) in the stretched
        // exponential, hence the fastest decay.
        let kappa = -0.5f64;
        let eta = |zeta: f64| (kappa + zeta) / (1.0 + zeta);
        let best = RatePlan::new(
            RateFn::LogPower { c: 0.5, beta: 1.0, eta: eta(kappa) },
            1.0,
        )
        .unwrap();
        for zeta in [-0.6, -0.8, -0.9] {
            let other = RatePlan::new(
                RateFn::LogPower { c: 0.5, beta: 1.0, eta: eta(zeta) },
                1.0,
            )
            .unwrap();
            for t in [10.0, 1e2, 1e3] {
                assert!(
                    best.log_psi(t).unwrap() < other.log_psi(t).unwrap(),
                    "zeta = kappa should beat zeta = {zeta} at t = {t}"
                );
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(RateFn::Linear { c: 0.0 }.validate().is_err());
        assert!(RateFn::Power { c: 1.0, q: 1.0 }.validate().is_err());
        assert!(RateFn::Power { c: 1.0, q: -0.5 }.validate().is_err());
        assert!(RateFn::LogPower { c: 1.0, beta: 0.0, eta: -1.0 }.validate().is_err());
        assert!(RateFn::LogPower { c: 1.0, beta: 1.0, eta: 1.5 }.validate().is_err());
        assert!(RatePlan::new(RateFn::Linear { c: 1.0 }, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn inverse_round_trips(
            c in 0.1f64..5.0,
            q in 0.05f64..0.95,
            t in 1.0f64..1e6,
        ) {
            for f in [RateFn::Linear { c }, RateFn::Power { c, q }] {
                let y = f.big_f(t);
                let back = f.inverse_f(y).unwrap();
                prop_assert!((back - t).abs() <= 1e-9 * (1.0 + t));
            }
        }

        #[test]
        fn log_eval_matches_eval(
            c in 0.1f64..5.0,
            q in 0.05f64..0.95,
            eta in -3.0f64..0.9,
            x in 1.5f64..1e5,
        ) {
            prop_assume!(eta != 0.0);
            let fns = [
                RateFn::Linear { c },
                RateFn::Power { c, q },
                RateFn::LogPower { c, beta: 1.0, eta },
            ];
            for f in fns {
                let direct = f.eval(x).ln();
                let logged = f.log_eval_at_log(x.ln());
                prop_assert!((direct - logged).abs() <= 1e-10 * (1.0 + direct.abs()));
            }
        }
    }
}
