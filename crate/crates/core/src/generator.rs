//! Numerical application of the generator to Lyapunov test functions.
//!
//! The integral part is
//!
//! ```text
//! L₀ f(x) = ∫ ( f(x+u) - f(x) - f'(x) u 1{|u|<=1} ) ν(x, du)
//!         = ∫_0^∞ ( f(x+u) + f(x-u) - 2 f(x) ) dens(x, u) du
//! ```
//!
//! where the second form uses kernel symmetry (the compensator cancels,
//! which also makes the indicator-compensated and fully-compensated
//! variants coincide). The integral is split into three regimes:
//!
//! * `u <= 1`: the symmetric second difference is rewritten through its
//!   Taylor remainder `D(u) = u² ∫_0^1 (1-s)(f''(x+su) + f''(x-su)) ds`,
//!   which removes the catastrophic cancellation against the `u^{-1-α}`
//!   blow-up; the remaining power singularity is flattened by
//!   substitution.
//! * `1 < u <= U(x)` with `U(x) = max(10|x|, 10³)`: direct adaptive
//!   quadrature over geometric segments.
//! * `u > U(x)`: analytic tail correction chosen by the test function's
//!   growth class (binomial series against power tails, log-space sweep
//!   against tempered tails, integration by parts for oscillations).

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::kernel::{KernelError, LevyTypeModel};
use crate::quad::{self, QuadConfig, QuadError};
use crate::series::{self, SeriesError};

#[derive(Debug, Clone, Error)]
pub enum GeneratorError {
    #[error("invalid Lyapunov specification: {0}")]
    InvalidSpec(String),
    #[error(
        "exponential moment used by the test function diverges: kernel admits no e^{{beta |u|^(1+zeta)}} moment at beta={beta}, zeta={zeta}"
    )]
    ExpMomentDivergent { beta: f64, zeta: f64 },
    #[error("test function overflows at |x|={x}: exponent {exponent} exceeds the floating-point range")]
    Overflow { x: f64, exponent: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// The smooth norm-like function: `φ(x) = |x|` outside `[-1, 1]`,
/// completed inside by the even quartic `3/8 + (3/4)x² - (1/8)x⁴`, which
/// matches value, first and second derivative at `|x| = 1`. `φ` is C² and
/// bounded below by 3/8.
pub struct SmoothNorm;

impl SmoothNorm {
    pub fn eval(x: f64) -> f64 {
        let ax = x.abs();
        if ax > 1.0 {
            ax
        } else {
            let x2 = x * x;
            0.375 + 0.75 * x2 - 0.125 * x2 * x2
        }
    }

    pub fn d1(x: f64) -> f64 {
        let ax = x.abs();
        if ax > 1.0 {
            x.signum()
        } else {
            1.5 * x - 0.5 * x * x * x
        }
    }

    pub fn d2(x: f64) -> f64 {
        if x.abs() > 1.0 {
            0.0
        } else {
            1.5 - 1.5 * x * x
        }
    }
}

/// Lyapunov test-function family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LyapunovSpec {
    /// `V(x) = φ(x)^p`.
    Polynomial { p: f64 },
    /// `V(x) = exp(beta φ(x)^{1+zeta})`.
    Exponential { beta: f64, zeta: f64 },
}

impl LyapunovSpec {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        match *self {
            LyapunovSpec::Polynomial { p } => {
                if !(p > 1.0 && p.is_finite()) {
                    return Err(GeneratorError::InvalidSpec(format!(
                        "polynomial exponent must satisfy p > 1, got {p}"
                    )));
                }
            }
            LyapunovSpec::Exponential { beta, zeta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(GeneratorError::InvalidSpec(format!(
                        "exponential rate must satisfy beta > 0, got {beta}"
                    )));
                }
                if !(zeta > -1.0 && zeta <= 0.0) {
                    return Err(GeneratorError::InvalidSpec(format!(
                        "exponential shape must satisfy zeta in (-1, 0], got {zeta}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `ln V(x)`, safe for states where `V` itself would overflow.
    pub fn log_eval(&self, x: f64) -> f64 {
        match *self {
            LyapunovSpec::Polynomial { p } => p * SmoothNorm::eval(x).ln(),
            LyapunovSpec::Exponential { beta, zeta } => beta * SmoothNorm::eval(x).powf(1.0 + zeta),
        }
    }
}

/// Growth class of a test function; selects the analytic tail correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailHint {
    /// `f(y) ~ |y|^p`.
    PowerGrowth { p: f64 },
    /// `f(y) ~ exp(beta |y|^{1+zeta})`.
    ExpGrowth { beta: f64, zeta: f64 },
    /// `f(y) = cos(freq y)`.
    Oscillatory { freq: f64 },
    /// `f` vanishes outside `[-radius, radius]`.
    Compact { radius: f64 },
}

/// A C² function the generator can be applied to.
pub trait TestFunction {
    fn eval(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn tail_hint(&self) -> TailHint;
    /// Points where the second derivative is only continuous, not smooth;
    /// the inner quadrature splits there.
    fn d2_kinks(&self) -> Vec<f64> {
        alloc::vec![-1.0, 1.0]
    }
    /// `ln f(x)` for growth classes that overflow; default assumes `f`
    /// representable.
    fn log_eval(&self, x: f64) -> f64 {
        self.eval(x).ln()
    }
}

impl TestFunction for LyapunovSpec {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            LyapunovSpec::Polynomial { p } => SmoothNorm::eval(x).powf(p),
            LyapunovSpec::Exponential { beta, zeta } => {
                (beta * SmoothNorm::eval(x).powf(1.0 + zeta)).exp()
            }
        }
    }

    fn d1(&self, x: f64) -> f64 {
        match *self {
            LyapunovSpec::Polynomial { p } => {
                p * SmoothNorm::eval(x).powf(p - 1.0) * SmoothNorm::d1(x)
            }
            LyapunovSpec::Exponential { beta, zeta } => {
                // V' = V * W' with W = beta φ^{1+zeta}.
                let phi = SmoothNorm::eval(x);
                let w1 = beta * (1.0 + zeta) * phi.powf(zeta) * SmoothNorm::d1(x);
                self.eval(x) * w1
            }
        }
    }

    fn d2(&self, x: f64) -> f64 {
        let phi = SmoothNorm::eval(x);
        let p1 = SmoothNorm::d1(x);
        let p2 = SmoothNorm::d2(x);
        match *self {
            LyapunovSpec::Polynomial { p } => {
                p * (p - 1.0) * phi.powf(p - 2.0) * p1 * p1 + p * phi.powf(p - 1.0) * p2
            }
            LyapunovSpec::Exponential { beta, zeta } => {
                // V'' = V * (W'' + W'^2).
                let w1 = beta * (1.0 + zeta) * phi.powf(zeta) * p1;
                let w2 = beta * (1.0 + zeta) * (zeta * phi.powf(zeta - 1.0) * p1 * p1 + phi.powf(zeta) * p2);
                self.eval(x) * (w2 + w1 * w1)
            }
        }
    }

    fn tail_hint(&self) -> TailHint {
        match *self {
            LyapunovSpec::Polynomial { p } => TailHint::PowerGrowth { p },
            LyapunovSpec::Exponential { beta, zeta } => TailHint::ExpGrowth { beta, zeta },
        }
    }

    fn log_eval(&self, x: f64) -> f64 {
        LyapunovSpec::log_eval(self, x)
    }
}

/// `cos(freq x)`: validation function with a known closed-form image
/// under the integral part.
pub struct Cosine {
    pub freq: f64,
}

impl TestFunction for Cosine {
    fn eval(&self, x: f64) -> f64 {
        (self.freq * x).cos()
    }
    fn d1(&self, x: f64) -> f64 {
        -self.freq * (self.freq * x).sin()
    }
    fn d2(&self, x: f64) -> f64 {
        -self.freq * self.freq * (self.freq * x).cos()
    }
    fn tail_hint(&self) -> TailHint {
        TailHint::Oscillatory { freq: self.freq }
    }
    fn d2_kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Odd compactly-supported bump `w³(1-w²)³`, `w = x / radius`: C², odd,
/// with odd second derivative. Its image under the symmetric integral
/// part vanishes at the origin.
pub struct OddBump {
    pub radius: f64,
}

impl OddBump {
    fn pieces(&self, x: f64) -> (f64, f64) {
        (x / self.radius, 1.0 / self.radius)
    }
}

impl TestFunction for OddBump {
    fn eval(&self, x: f64) -> f64 {
        let (w, _) = self.pieces(x);
        if w.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - w * w;
        w * w * w * q * q * q
    }
    fn d1(&self, x: f64) -> f64 {
        let (w, dw) = self.pieces(x);
        if w.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - w * w;
        3.0 * w * w * q * q * (1.0 - 3.0 * w * w) * dw
    }
    fn d2(&self, x: f64) -> f64 {
        let (w, dw) = self.pieces(x);
        if w.abs() >= 1.0 {
            return 0.0;
        }
        let w2 = w * w;
        6.0 * w * (1.0 - w2) * (1.0 - 9.0 * w2 + 12.0 * w2 * w2) * dw * dw
    }
    fn tail_hint(&self) -> TailHint {
        TailHint::Compact { radius: self.radius }
    }
    fn d2_kinks(&self) -> Vec<f64> {
        alloc::vec![-self.radius, self.radius]
    }
}

/// The three regimes of the integral part, exposed for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct L0Parts {
    /// `∫_{|u|<=1}` in Taylor-remainder form.
    pub inner: f64,
    /// `∫_{1<|u|<=U(x)}` by direct quadrature.
    pub middle: f64,
    /// `∫_{|u|>U(x)}` analytic correction.
    pub tail: f64,
    /// Accumulated quadrature/truncation error bound.
    pub abs_error: f64,
}

impl L0Parts {
    pub fn total(&self) -> f64 {
        self.inner + self.middle + self.tail
    }
}

/// Exponent above which `exp` overflows comfortably within f64.
const MAX_EXPONENT: f64 = 700.0;

fn quad_cap(x: f64) -> f64 {
    (10.0 * x.abs()).max(1e3)
}

/// Taylor remainder `R(u) = ∫_0^1 (1-s)(f''(x+su) + f''(x-su)) ds`,
/// integrated piecewise between the kinks of `f''`.
fn taylor_remainder(f: &dyn TestFunction, x: f64, u: f64, kinks: &[f64]) -> f64 {
    let integrand = |s: f64| (1.0 - s) * (f.d2(x + s * u) + f.d2(x - s * u));
    let mut breaks = [0.0f64; 6];
    breaks[0] = 0.0;
    let mut n = 1;
    if u > 0.0 {
        for &y in kinks {
            for s in [(y - x) / u, (x - y) / u] {
                if s > 1e-12 && s < 1.0 - 1e-12 {
                    breaks[n] = s;
                    n += 1;
                }
            }
        }
    }
    breaks[n] = 1.0;
    n += 1;
    breaks[..n].sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0;
    for w in breaks[..n].windows(2) {
        if w[1] > w[0] {
            sum += quad::kronrod15(&integrand, w[0], w[1]).0;
        }
    }
    sum
}

/// Integral part of the generator at `x`, split into its three regimes.
pub fn apply_l0_parts(
    model: &LevyTypeModel,
    f: &dyn TestFunction,
    x: f64,
    cfg: &QuadConfig,
) -> Result<L0Parts, GeneratorError> {
    let kernel = &model.kernel;
    if kernel.intensity_is_zero() {
        return Ok(L0Parts { inner: 0.0, middle: 0.0, tail: 0.0, abs_error: 0.0 });
    }
    let alpha = kernel.alpha(x);
    let ax = x.abs();
    let u_cap = quad_cap(x);

    // Growth-class preconditions: the integral must exist at all.
    match f.tail_hint() {
        TailHint::PowerGrowth { p } => {
            if kernel.exp_envelope().is_none() && p >= alpha {
                return Err(GeneratorError::InvalidSpec(format!(
                    "test function grows like |y|^{p} but the kernel tail only decays like |u|^-{alpha}; the integral diverges"
                )));
            }
        }
        TailHint::ExpGrowth { beta, zeta } => {
            match kernel.exp_envelope() {
                None => return Err(GeneratorError::ExpMomentDivergent { beta, zeta }),
                Some((theta, zeta_t)) => {
                    if !(zeta < zeta_t || (zeta == zeta_t && beta < theta)) {
                        return Err(GeneratorError::ExpMomentDivergent { beta, zeta });
                    }
                }
            }
            let worst = beta * (ax + u_cap).powf(1.0 + zeta);
            if worst > MAX_EXPONENT {
                return Err(GeneratorError::Overflow { x: ax, exponent: worst });
            }
        }
        _ => {}
    }

    let kinks = f.d2_kinks();

    // Inner region: R(u) * prefactor(u) stays bounded; the substitution
    // absorbs u^{1-alpha}.
    let inner_g = |u: f64| taylor_remainder(f, x, u, &kinks) * kernel.density_prefactor(x, u);
    let inner = quad::integrate_power_singular(inner_g, alpha, 1.0, cfg)?;

    // Middle region: direct second difference over geometric segments,
    // with extra breakpoints where f' meets the smooth-norm junctions.
    let second_diff = |u: f64| f.eval(x + u) + f.eval(x - u) - 2.0 * f.eval(x);
    let mut seg = alloc::vec![1.0f64];
    let mut b = 2.0f64;
    while b < u_cap {
        seg.push(b);
        b *= 2.0;
    }
    seg.push(u_cap);
    for extra in [ax - 1.0, ax + 1.0] {
        if extra > 1.0 && extra < u_cap {
            seg.push(extra);
        }
    }
    seg.sort_unstable_by(f64::total_cmp);
    let mut middle = 0.0f64;
    let mut err = inner.abs_error;
    for w in seg.windows(2) {
        if w[1] > w[0] {
            let q = quad::integrate(|u| second_diff(u) * kernel.density(x, u), w[0], w[1], cfg)?;
            middle += q.value;
            err += q.abs_error;
        }
    }

    // Tail region.
    let tail = match f.tail_hint() {
        TailHint::PowerGrowth { p } => match kernel.exp_envelope() {
            None => {
                // Pure power tail: binomial series, then adjust the
                // compensating constant from |x|^p to the true f(x).
                let c = kernel.intensity(x);
                let series_part = series::power_tail_integral(p, alpha, ax, u_cap, 1e-13)?;
                let f_adjust =
                    2.0 * (ax.powf(p) - f.eval(x)) * u_cap.powf(-alpha) / alpha;
                c * (series_part + f_adjust)
            }
            Some(_) => {
                let q = quad::integrate_to_inf(
                    |u| second_diff(u) * kernel.density(x, u),
                    u_cap,
                    cfg,
                )?;
                err += q.abs_error;
                q.value
            }
        },
        TailHint::ExpGrowth { .. } => {
            // Tempered kernel by the precondition; combine exponents in
            // log space so neither factor overflows alone.
            let f_x = f.eval(x);
            let log_integrand = |u: f64| {
                let ld = kernel.log_density(x, u);
                (f.log_eval(x + u) + ld).exp() + (f.log_eval(x - u) + ld).exp()
                    - 2.0 * f_x * ld.exp()
            };
            let q = quad::integrate_to_inf(log_integrand, u_cap, cfg)?;
            err += q.abs_error;
            q.value
        }
        TailHint::Oscillatory { freq } => match kernel.exp_envelope() {
            None => {
                let c = kernel.intensity(x);
                let (osc, osc_err) = series::oscillatory_power_tail(freq, alpha, u_cap);
                err += 2.0 * c * osc_err;
                2.0 * c * (freq * x).cos() * (osc - u_cap.powf(-alpha) / alpha)
            }
            Some(_) => {
                let q = quad::integrate_to_inf(
                    |u| second_diff(u) * kernel.density(x, u),
                    u_cap,
                    cfg,
                )?;
                err += q.abs_error;
                q.value
            }
        },
        TailHint::Compact { radius } => {
            // Beyond |x| + radius both shifted copies vanish.
            let far = u_cap.max(ax + radius);
            let mut extra = 0.0;
            if far > u_cap {
                let q = quad::integrate(
                    |u| second_diff(u) * kernel.density(x, u),
                    u_cap,
                    far,
                    cfg,
                )?;
                extra = q.value;
                err += q.abs_error;
            }
            extra - 2.0 * f.eval(x) * model.tail(x, far)?
        }
    };

    Ok(L0Parts { inner: inner.value, middle, tail, abs_error: err })
}

/// `L₀ f(x)`: the integral part of the generator.
pub fn apply_l0(
    model: &LevyTypeModel,
    f: &dyn TestFunction,
    x: f64,
    cfg: &QuadConfig,
) -> Result<f64, GeneratorError> {
    Ok(apply_l0_parts(model, f, x, cfg)?.total())
}

/// Full generator `L f(x) = a(x) f'(x) + L₀ f(x)`.
///
/// For the exponential family this is the fully-compensated form from the
/// drift condition's derivation; under kernel symmetry the compensator
/// correction to the drift vanishes, so both families share one formula.
pub fn apply_generator(
    model: &LevyTypeModel,
    f: &dyn TestFunction,
    x: f64,
    cfg: &QuadConfig,
) -> Result<f64, GeneratorError> {
    Ok(model.drift_at(x) * f.d1(x) + apply_l0(model, f, x, cfg)?)
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use crate::kernel::{Drift, KernelSpec};
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn model(kernel: KernelSpec) -> LevyTypeModel {
        LevyTypeModel::new(Drift::Power { strength: 1.0, exponent: 1.0 }, kernel).unwrap()
    }

    fn cfg() -> QuadConfig {
        QuadConfig::coarse()
    }

    #[test]
    fn smooth_norm_is_c2_at_the_junction() {
        for x in [1.0f64, -1.0] {
            let eps = 1e-7;
            let inside = x.signum() * (x.abs() - eps);
            let outside = x.signum() * (x.abs() + eps);
            assert!((SmoothNorm::eval(inside) - SmoothNorm::eval(outside)).abs() < 1e-6);
            assert!((SmoothNorm::d1(inside) - SmoothNorm::d1(outside)).abs() < 1e-6);
            assert!((SmoothNorm::d2(inside) - SmoothNorm::d2(outside)).abs() < 1e-6);
        }
        assert_eq!(SmoothNorm::eval(0.0), 0.375);
        assert_eq!(SmoothNorm::eval(2.5), 2.5);
        assert_eq!(SmoothNorm::eval(-2.5), 2.5);
    }

    #[test]
    fn lyapunov_derivatives_match_finite_differences() {
        let specs = [
            LyapunovSpec::Polynomial { p: 1.2 },
            LyapunovSpec::Polynomial { p: 1.8 },
            LyapunovSpec::Exponential { beta: 0.2, zeta: 0.0 },
            LyapunovSpec::Exponential { beta: 0.5, zeta: -0.5 },
        ];
        // Wider step for the second difference: at h=1e-6 its rounding
        // error 4 eps V / h^2 would swamp the value.
        let h = 1e-6;
        let h2 = 1e-4;
        for spec in specs {
            for x in [-7.3, -1.4, -0.6, 0.3, 0.9, 2.0, 15.0] {
                let d1_num = (spec.eval(x + h) - spec.eval(x - h)) / (2.0 * h);
                let d2_num =
                    (spec.eval(x + h2) - 2.0 * spec.eval(x) + spec.eval(x - h2)) / (h2 * h2);
                assert_relative_eq!(spec.d1(x), d1_num, max_relative = 1e-5, epsilon = 1e-8);
                assert_relative_eq!(spec.d2(x), d2_num, max_relative = 1e-3, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn dirichlet_value_for_cosine_at_origin() {
        // alpha=1, c=1: L₀ cos(ω·)(0) = -ω ∫ (1-cos v)/v² dv = -ω π.
        let m = model(KernelSpec::stable(1.0, 1.0));
        let got = apply_l0(&m, &Cosine { freq: 1.0 }, 0.0, &cfg()).unwrap();
        assert_relative_eq!(got, -PI, max_relative = 1e-7);
        let got2 = apply_l0(&m, &Cosine { freq: 2.0 }, 0.0, &cfg()).unwrap();
        assert_relative_eq!(got2, -2.0 * PI, max_relative = 1e-7);
    }

    #[test]
    fn zero_kernel_maps_everything_to_zero() {
        let m = model(KernelSpec::stable(0.0, 1.5));
        for x in [0.0, 1.0, 250.0] {
            assert_eq!(
                apply_l0(&m, &LyapunovSpec::Polynomial { p: 1.2 }, x, &cfg()).unwrap(),
                0.0
            );
            assert_eq!(apply_l0(&m, &Cosine { freq: 1.0 }, x, &cfg()).unwrap(), 0.0);
        }
    }

    #[test]
    fn odd_function_vanishes_at_origin() {
        let m = model(KernelSpec::stable(1.0, 1.3));
        let got = apply_l0(&m, &OddBump { radius: 1.0 }, 0.0, &cfg()).unwrap();
        assert!(got.abs() < 1e-9, "got {got}");
        let tempered = model(KernelSpec::tempered(1.0, 1.3, 1.0, 0.0));
        let got = apply_l0(&tempered, &OddBump { radius: 2.5 }, 0.0, &cfg()).unwrap();
        assert!(got.abs() < 1e-9, "got {got}");
    }

    #[test]
    fn linear_combinations_pass_through() {
        struct Combo {
            a: f64,
            b: f64,
            f1: OddBump,
            f2: Cosine,
        }
        impl TestFunction for Combo {
            fn eval(&self, x: f64) -> f64 {
                self.a * self.f1.eval(x) + self.b * self.f2.eval(x)
            }
            fn d1(&self, x: f64) -> f64 {
                self.a * self.f1.d1(x) + self.b * self.f2.d1(x)
            }
            fn d2(&self, x: f64) -> f64 {
                self.a * self.f1.d2(x) + self.b * self.f2.d2(x)
            }
            fn tail_hint(&self) -> TailHint {
                // Cosine part dies under tempering; treat support of the
                // bump as the effective support.
                TailHint::Compact { radius: self.f1.radius }
            }
            fn d2_kinks(&self) -> Vec<f64> {
                self.f1.d2_kinks()
            }
        }
        // Strong tempering makes every tail negligible, so the compact
        // hint is valid for the combination too.
        let m = model(KernelSpec::tempered(1.0, 1.5, 6.0, 0.0));
        let (a, b) = (2.5, -1.25);
        let combo = Combo { a, b, f1: OddBump { radius: 2.0 }, f2: Cosine { freq: 1.5 } };
        let x = 0.7;
        let lhs = apply_l0(&m, &combo, x, &cfg()).unwrap();
        let rhs = a * apply_l0(&m, &combo.f1, x, &cfg()).unwrap()
            + b * apply_l0(&m, &combo.f2, x, &cfg()).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-6, epsilon = 1e-9);
    }

    #[test]
    fn inner_integral_respects_taylor_bound() {
        // |inner| <= (1/2) max_{|v-x|<=1} |V''(v)| * nu_small(x).
        let m = model(KernelSpec::stable(1.0, 1.7));
        for (spec, x) in [
            (LyapunovSpec::Polynomial { p: 1.2 }, 1.0),
            (LyapunovSpec::Polynomial { p: 1.2 }, 1.5),
            (LyapunovSpec::Polynomial { p: 1.6 }, 3.0),
            (LyapunovSpec::Polynomial { p: 1.6 }, 10.0),
        ] {
            let parts = apply_l0_parts(&m, &spec, x, &cfg()).unwrap();
            let max_d2 = crate::grid::linspace(x - 1.0, x + 1.0, 2001)
                .into_iter()
                .map(|v| spec.d2(v).abs())
                .fold(0.0f64, f64::max);
            let bound = 0.5 * max_d2 * m.small_jump_moment(x).unwrap();
            assert!(
                parts.inner.abs() <= bound * (1.0 + 1e-9),
                "inner {} exceeds bound {}",
                parts.inner,
                bound
            );
        }
    }

    #[test]
    fn pure_drift_generator_is_exact() {
        let m = LevyTypeModel::new(
            Drift::Power { strength: 1.0, exponent: 1.0 },
            KernelSpec::stable(0.0, 1.5),
        )
        .unwrap();
        let got = apply_generator(&m, &LyapunovSpec::Polynomial { p: 2.0 }, 3.0, &cfg()).unwrap();
        assert_relative_eq!(got, -18.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_drift_reduces_to_integral_part() {
        let m = LevyTypeModel::new(
            Drift::Power { strength: 0.0, exponent: 1.0 },
            KernelSpec::stable(1.0, 1.5),
        )
        .unwrap();
        let spec = LyapunovSpec::Polynomial { p: 1.2 };
        let x = 40.0;
        assert_eq!(
            apply_generator(&m, &spec, x, &cfg()).unwrap(),
            apply_l0(&m, &spec, x, &cfg()).unwrap()
        );
    }

    #[test]
    fn drift_dominates_at_large_states() {
        let m = model(KernelSpec::stable(1.0, 1.5));
        let spec = LyapunovSpec::Polynomial { p: 1.2 };
        let x = 1e3;
        let got = apply_generator(&m, &spec, x, &cfg()).unwrap();
        let drift_term = -1.2 * x.powf(1.2);
        assert!(got < 0.0);
        assert_relative_eq!(got, drift_term, max_relative = 2e-3);
    }

    #[test]
    fn diverging_combinations_are_rejected() {
        let m = model(KernelSpec::stable(1.0, 1.5));
        // Polynomial growing faster than the tail decays.
        assert!(matches!(
            apply_l0(&m, &LyapunovSpec::Polynomial { p: 1.6 }, 10.0, &cfg()),
            Err(GeneratorError::InvalidSpec(_))
        ));
        // Exponential function against a pure power tail.
        assert!(matches!(
            apply_l0(&m, &LyapunovSpec::Exponential { beta: 0.2, zeta: 0.0 }, 10.0, &cfg()),
            Err(GeneratorError::ExpMomentDivergent { .. })
        ));
        // Exponential function beating the tempering envelope.
        let t = model(KernelSpec::tempered(1.0, 1.5, 0.1, 0.0));
        assert!(matches!(
            apply_l0(&t, &LyapunovSpec::Exponential { beta: 0.2, zeta: 0.0 }, 10.0, &cfg()),
            Err(GeneratorError::ExpMomentDivergent { .. })
        ));
    }

    #[test]
    fn exponential_function_on_tempered_kernel() {
        let m = model(KernelSpec::tempered(1.0, 1.5, 4.0, 0.0));
        let spec = LyapunovSpec::Exponential { beta: 0.2, zeta: 0.0 };
        spec.validate().unwrap();
        let got = apply_l0(&m, &spec, 50.0, &cfg()).unwrap();
        assert!(got.is_finite());
        // The second difference of a convex function against a symmetric
        // kernel is positive.
        assert!(got > 0.0);
    }

    #[test]
    fn tail_region_is_small_but_not_ignored() {
        let m = model(KernelSpec::stable(1.0, 1.5));
        let spec = LyapunovSpec::Polynomial { p: 1.2 };
        let parts = apply_l0_parts(&m, &spec, 100.0, &cfg()).unwrap();
        assert!(parts.tail != 0.0);
        assert!(parts.tail.abs() < parts.total().abs());
    }
}
