//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 7-point Gauss / 15-point Kronrod pair drives an adaptive bisection
//! scheme that always refines the panel with the largest error estimate.
//! Two extensions cover the integrals that appear in generator and kernel
//! computations:
//!
//! * [`integrate_power_singular`] removes an integrable power singularity
//!   at the origin by substitution, so the integrand seen by the panels is
//!   bounded.
//! * [`integrate_to_inf`] sweeps geometric panels `[a 2^j, a 2^{j+1}]` and
//!   watches their contributions: steady growth is reported as a divergent
//!   tail instead of a value. The sweep expects integrands that are
//!   eventually one-signed with regular decay or growth; oscillatory tails
//!   are handled by their callers via integration by parts.

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use thiserror::Error;

/// Tolerances and effort cap for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Target relative error.
    pub rel_tol: f64,
    /// Absolute error floor; integrals smaller than this are accepted as is.
    pub abs_tol: f64,
    /// Maximum number of panels before giving up.
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-14, max_panels: 4096 }
    }
}

impl QuadConfig {
    /// Looser configuration for integrands that only need bound-level
    /// accuracy (generator evaluations on certificate grids).
    pub fn coarse() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 1e-12, max_panels: 4096 }
    }
}

/// A converged integral estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    /// Bound on the absolute error of `value`.
    pub abs_error: f64,
    /// Panels consumed.
    pub panels: usize,
}

#[derive(Debug, Clone, Error)]
pub enum QuadError {
    #[error("quadrature interval must satisfy a <= b with finite endpoints, got [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
    #[error("integrand returned a non-finite value near {at}")]
    NonFinite { at: f64 },
    #[error(
        "quadrature did not converge after {panels} panels (estimate {estimate:e}, error {error:e})"
    )]
    NonConvergent { panels: usize, estimate: f64, error: f64 },
    #[error(
        "tail integral diverges: panel [{panel_lo:e}, {panel_hi:e}] still contributes {contribution:e} after {panels} panels"
    )]
    DivergentTail { panel_lo: f64, panel_hi: f64, contribution: f64, panels: usize },
}

/// Kronrod abscissae on [0, 1]; odd indices are the embedded Gauss nodes,
/// the last entry is the panel centre.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7-K15 evaluation over `[a, b]`.
///
/// Returns the Kronrod value and an error estimate rescaled the usual way:
/// the raw Gauss/Kronrod discrepancy is damped through the panel's own
/// variation so that smooth panels are not over-penalized.
pub fn kronrod15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);

    let fc = f(centr);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv = [0.0f64; 14];

    for j in 0..7 {
        let dx = hlgth * XGK[j];
        let f1 = f(centr - dx);
        let f2 = f(centr + dx);
        fv[j] = f1;
        fv[7 + j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - reskh).abs() + (fv[7 + j] - reskh).abs());
    }

    let value = resk * hlgth;
    let resabs = resabs * hlgth.abs();
    let resasc = resasc * hlgth.abs();
    let mut err = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let uflow_guard = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > uflow_guard {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Quadrature, QuadError> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(QuadError::BadInterval { a, b });
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, abs_error: 0.0, panels: 0 });
    }

    let eval = |lo: f64, hi: f64| -> Result<Panel, QuadError> {
        let (value, error) = kronrod15(&f, lo, hi);
        if !value.is_finite() || !error.is_finite() {
            return Err(QuadError::NonFinite { at: 0.5 * (lo + hi) });
        }
        Ok(Panel { a: lo, b: hi, value, error })
    };

    let mut heap = BinaryHeap::new();
    let first = eval(a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);

    while total_err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        if heap.len() >= cfg.max_panels {
            return Err(QuadError::NonConvergent {
                panels: heap.len(),
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least the initial panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; error cannot shrink.
            return Err(QuadError::NonConvergent {
                panels: heap.len() + 1,
                estimate: total,
                error: total_err,
            });
        }
        let left = eval(worst.a, mid)?;
        let right = eval(mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    Ok(Quadrature { value: total, abs_error: total_err, panels: heap.len() })
}

/// Integrate `g(u) u^{1-alpha}` over `(0, b]` where `g` stays bounded near
/// the origin and `alpha` is in `(0, 2)`.
///
/// The substitution `u = b t^{1/(2-alpha)}` flattens the power factor
/// exactly, so the panels integrate `g` composed with a smooth map:
///
/// ```text
/// ∫_0^b g(u) u^{1-alpha} du = b^{2-alpha}/(2-alpha) ∫_0^1 g(b t^{1/(2-alpha)}) dt
/// ```
pub fn integrate_power_singular<F: Fn(f64) -> f64>(
    g: F,
    alpha: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Quadrature, QuadError> {
    assert!(alpha > 0.0 && alpha < 2.0, "alpha must be in (0, 2), got {alpha}");
    assert!(b > 0.0 && b.is_finite(), "upper limit must be positive and finite, got {b}");
    let gamma = 1.0 / (2.0 - alpha);
    let scale = b.powf(2.0 - alpha) * gamma;
    let inner = integrate(|t| g(b * t.powf(gamma)), 0.0, 1.0, cfg)?;
    Ok(Quadrature {
        value: scale * inner.value,
        abs_error: scale * inner.abs_error,
        panels: inner.panels,
    })
}

/// Number of geometric doublings before a tail sweep gives up.
const MAX_SWEEP: usize = 2048;

/// Integrate `f` over `[a, ∞)` for `a > 0` by geometric panels.
///
/// Consecutive panel contributions must eventually decay; three panels in
/// a row that each exceed 1.02 times their predecessor (while remaining
/// non-negligible) are reported as [`QuadError::DivergentTail`]. When the
/// contributions decay geometrically the remainder beyond the last panel
/// is bounded by the tail of the geometric series and folded into the
/// error estimate.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    cfg: &QuadConfig,
) -> Result<Quadrature, QuadError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(QuadError::BadInterval { a, b: f64::INFINITY });
    }

    let mut total = 0.0f64;
    let mut total_err = 0.0f64;
    let mut panels = 0usize;
    let mut prev_mag: Option<f64> = None;
    let mut grow_run = 0u32;
    let mut lo = a;

    for _ in 0..MAX_SWEEP {
        let hi = lo * 2.0;
        let q = integrate(&f, lo, hi, cfg)?;
        total += q.value;
        total_err += q.abs_error;
        panels += q.panels;
        let mag = q.value.abs();
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());

        if !total.is_finite() || total.abs() > 1e290 {
            return Err(QuadError::DivergentTail {
                panel_lo: lo,
                panel_hi: hi,
                contribution: q.value,
                panels,
            });
        }
        if let Some(p) = prev_mag {
            if mag > 1.02 * p && mag > 0.01 * tol {
                grow_run += 1;
                if grow_run >= 3 {
                    return Err(QuadError::DivergentTail {
                        panel_lo: lo,
                        panel_hi: hi,
                        contribution: q.value,
                        panels,
                    });
                }
            } else {
                grow_run = 0;
            }
            if mag < 0.25 * tol && mag <= 0.6 * p {
                // Remainder of a geometric series with ratio <= 0.6.
                total_err += 1.5 * mag;
                return Ok(Quadrature { value: total, abs_error: total_err, panels });
            }
        } else if mag == 0.0 && total == 0.0 {
            // Identically-zero tails terminate immediately.
            return Ok(Quadrature { value: 0.0, abs_error: total_err, panels });
        }
        prev_mag = Some(mag);
        lo = hi;
    }

    Err(QuadError::NonConvergent { panels, estimate: total, error: total_err })
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn polynomial_is_exact() {
        // K15 integrates degree-22 polynomials exactly.
        let q = integrate(|x| x.powi(7), 0.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, 0.125, max_relative = 1e-14);
    }

    #[test]
    fn sine_over_half_period() {
        let q = integrate(|x| x.sin(), 0.0, core::f64::consts::PI, &cfg()).unwrap();
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        // ∫_0^1 cos(40 x) dx = sin(40)/40.
        let q = integrate(|x| (40.0 * x).cos(), 0.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, 40.0f64.sin() / 40.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        let q = integrate(|x| x, 3.0, 3.0, &cfg()).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn bad_interval_is_rejected() {
        assert!(matches!(
            integrate(|x| x, 1.0, 0.0, &cfg()),
            Err(QuadError::BadInterval { .. })
        ));
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate(|x| (x - 0.75).sqrt(), 0.0, 1.0, &cfg());
        assert!(matches!(r, Err(QuadError::NonFinite { .. })));
    }

    #[test]
    fn inverse_sqrt_singularity_via_substitution() {
        // ∫_0^1 u^{-1/2} du = 2 with g ≡ 1, alpha = 3/2.
        let q = integrate_power_singular(|_| 1.0, 1.5, 1.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-13);

        // ∫_0^2 e^{-u} u^{-0.2} du against a high-effort direct value.
        let q = integrate_power_singular(|u| (-u).exp(), 1.2, 2.0, &cfg()).unwrap();
        let direct = integrate(|u| (-u).exp() * u.powf(-0.2), 1e-12, 2.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, direct.value, max_relative = 1e-6);
    }

    #[test]
    fn exponential_tail_sweep() {
        let q = integrate_to_inf(|u| (-u).exp(), 1.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, (-1.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn slow_power_tail_sweep() {
        // ∫_1^∞ u^{-2.2} du = 1/1.2.
        let q = integrate_to_inf(|u| u.powf(-2.2), 1.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, 1.0 / 1.2, max_relative = 1e-8);
    }

    #[test]
    fn growing_tail_is_flagged_divergent() {
        let r = integrate_to_inf(|u| (0.1 * u).exp() * u.powf(-2.5), 1.0, &cfg());
        assert!(matches!(r, Err(QuadError::DivergentTail { .. })));
    }

    #[test]
    fn zero_tail_terminates() {
        let q = integrate_to_inf(|_| 0.0, 1.0, &cfg()).unwrap();
        assert_eq!(q.value, 0.0);
    }

    proptest! {
        #[test]
        fn linear_in_the_integrand(c1 in -5.0f64..5.0, c2 in -5.0f64..5.0) {
            let f1 = |x: f64| x * x;
            let f2 = |x: f64| (2.0 * x).cos();
            let combined = integrate(|x| c1 * f1(x) + c2 * f2(x), 0.0, 2.0, &cfg()).unwrap();
            let i1 = integrate(f1, 0.0, 2.0, &cfg()).unwrap();
            let i2 = integrate(f2, 0.0, 2.0, &cfg()).unwrap();
            prop_assert!((combined.value - (c1 * i1.value + c2 * i2.value)).abs() < 1e-9);
        }

        #[test]
        fn additive_over_subintervals(split in 0.1f64..1.9) {
            let f = |x: f64| (x * x - x).exp();
            let whole = integrate(f, 0.0, 2.0, &cfg()).unwrap();
            let left = integrate(f, 0.0, split, &cfg()).unwrap();
            let right = integrate(f, split, 2.0, &cfg()).unwrap();
            prop_assert!((whole.value - left.value - right.value).abs() < 1e-8);
        }
    }
}
