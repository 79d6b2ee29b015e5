//! Generalized binomial series.
//!
//! The case constants of the drift conditions and the analytic tail
//! corrections of the generator both expand `(u ± x)^p` for non-integer
//! `p` through the generalized binomial coefficients
//!
//! ```text
//! C_p^k = p (p-1) ... (p-k+1) / k!
//! ```
//!
//! For `p` in `(1, 2)` the even coefficients `C_p^{2k}` with `k >= 1` are
//! all positive and decay like `k^{-1-p}`, so the series here converge
//! absolutely and their truncation error is controlled by the geometric
//! ratio of the last two terms.

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SeriesError {
    #[error("series did not converge within {terms} terms (last term {last:e})")]
    NonConvergent { terms: usize, last: f64 },
    #[error("series terms stopped decreasing at term {term} (value {value:e}); sum diverges")]
    Divergent { term: usize, value: f64 },
}

/// Generalized binomial coefficient `C_p^k` by direct product.
pub fn binomial_coef(p: f64, k: u32) -> f64 {
    let mut num = 1.0f64;
    for j in 0..k {
        num *= (p - j as f64) / (j + 1) as f64;
    }
    num
}

/// Iterator over `C_p^0, C_p^1, C_p^2, ...` via the ratio recurrence
/// `C_p^k = C_p^{k-1} (p - k + 1) / k`.
pub struct BinomialCoefs {
    p: f64,
    k: u32,
    current: f64,
}

impl BinomialCoefs {
    pub fn new(p: f64) -> Self {
        Self { p, k: 0, current: 1.0 }
    }
}

impl Iterator for BinomialCoefs {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.current;
        self.k += 1;
        self.current *= (self.p - (self.k - 1) as f64) / self.k as f64;
        Some(out)
    }
}

/// Result of an adaptively truncated series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    /// Bound on the truncation remainder (geometric extrapolation of the
    /// last retained term).
    pub tail_bound: f64,
}

const MAX_TERMS: usize = 200_000;

/// Sum `term(k)` for `k = 1, 2, ...` until the relative contribution
/// drops below `rel_tol`.
///
/// Terms must eventually decrease in magnitude; five consecutive
/// non-decreasing terms are reported as divergence.
fn sum_until<F: Fn(usize) -> f64>(term: F, rel_tol: f64) -> Result<SeriesSum, SeriesError> {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut prev_mag = f64::INFINITY;
    let mut non_decreasing = 0u32;

    for k in 1..=MAX_TERMS {
        let t = term(k);
        // Kahan compensation keeps thousands of small terms from losing
        // digits against the leading ones.
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;

        let mag = t.abs();
        if mag >= prev_mag && mag > 0.0 {
            non_decreasing += 1;
            if non_decreasing >= 5 {
                return Err(SeriesError::Divergent { term: k, value: t });
            }
        } else {
            non_decreasing = 0;
        }

        if mag < rel_tol * sum.abs().max(f64::MIN_POSITIVE) && mag < prev_mag {
            let ratio = if prev_mag.is_finite() && prev_mag > 0.0 { mag / prev_mag } else { 0.0 };
            let tail_bound = if ratio < 1.0 { mag * ratio / (1.0 - ratio) } else { mag };
            return Ok(SeriesSum { value: sum, terms: k, tail_bound });
        }
        prev_mag = mag;
    }
    Err(SeriesError::NonConvergent { terms: MAX_TERMS, last: prev_mag })
}

/// The series part of the first-case drift constant:
///
/// ```text
/// Σ_{k>=1} C_p^{2k} ( N_δ 2k / (2k - δ)  -  N_δ (2k - p) / (2k - p + δ) )
/// ```
///
/// Valid for `1 < p < δ < 2`; every term is positive and the terms decay
/// like `k^{-2-p}`.
pub fn case1_series(p: f64, delta: f64, n_delta: f64, rel_tol: f64) -> Result<SeriesSum, SeriesError> {
    assert!(p > 1.0 && p < 2.0, "p must be in (1, 2), got {p}");
    assert!(delta < 2.0, "delta must be below 2, got {delta}");
    assert!(n_delta >= 0.0);
    let term = |k: usize| {
        let two_k = 2.0 * k as f64;
        let coef = binomial_coef(p, 2 * k as u32);
        coef * (n_delta * two_k / (two_k - delta) - n_delta * (two_k - p) / (two_k - p + delta))
    };
    sum_until(term, rel_tol)
}

/// Analytic tail of the symmetric second difference of `|.|^p` against a
/// pure power kernel:
///
/// ```text
/// ∫_U^∞ ( (u+x)^p + (u-x)^p - 2 x^p ) u^{-1-alpha} du
/// ```
///
/// for `0 <= x < U` and `p < alpha`, through the binomial expansion in
/// `(x/u)^2`. Used to close the generator integral beyond the quadrature
/// cap `U`.
pub fn power_tail_integral(
    p: f64,
    alpha: f64,
    x: f64,
    u_cap: f64,
    rel_tol: f64,
) -> Result<f64, SeriesError> {
    assert!(x >= 0.0 && u_cap > x, "need 0 <= x < U, got x={x}, U={u_cap}");
    assert!(alpha > p, "tail integral needs p < alpha, got p={p}, alpha={alpha}");
    let base = u_cap.powf(p - alpha) / (alpha - p) - x.powf(p) * u_cap.powf(-alpha) / alpha;
    if x == 0.0 {
        return Ok(2.0 * base);
    }
    let log_x = x.ln();
    let log_u = u_cap.ln();
    let series = sum_until(
        |k| {
            let two_k = 2.0 * k as f64;
            let coef = binomial_coef(p, 2 * k as u32);
            // x^{2k} U^{p-2k-alpha} in log space; the ratio x/U < 1 keeps it finite.
            coef * (two_k * log_x + (p - two_k - alpha) * log_u).exp() / (alpha + two_k - p)
        },
        rel_tol,
    )?;
    Ok(2.0 * (base + series.value))
}

/// Four-term asymptotic value of `∫_U^∞ cos(freq·u) u^{-1-alpha} du`
/// obtained by repeated integration by parts, together with a rigorous
/// bound on the neglected remainder.
///
/// The bound is `|g'''(U)| / freq^4` with `g(u) = u^{-1-alpha}`; callers
/// pick `U` large enough for their tolerance.
pub fn oscillatory_power_tail(freq: f64, alpha: f64, u_cap: f64) -> (f64, f64) {
    assert!(freq > 0.0 && u_cap > 0.0);
    let g0 = u_cap.powf(-1.0 - alpha);
    let g1 = -(1.0 + alpha) * u_cap.powf(-2.0 - alpha);
    let g2 = (1.0 + alpha) * (2.0 + alpha) * u_cap.powf(-3.0 - alpha);
    let g3 = -(1.0 + alpha) * (2.0 + alpha) * (3.0 + alpha) * u_cap.powf(-4.0 - alpha);
    let (s, c) = (freq * u_cap).sin_cos();
    let value = -s * g0 / freq - c * g1 / (freq * freq)
        + s * g2 / (freq * freq * freq)
        + c * g3 / (freq * freq * freq * freq);
    let err = g3.abs() / (freq * freq * freq * freq);
    (value, err)
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use crate::quad::{integrate, integrate_to_inf, QuadConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn integer_exponent_recovers_pascal() {
        assert_eq!(binomial_coef(5.0, 2), 10.0);
        assert_eq!(binomial_coef(3.0, 3), 1.0);
        assert_eq!(binomial_coef(3.0, 4), 0.0);
    }

    #[test]
    fn recurrence_matches_direct_product() {
        let p = 1.2;
        for (k, via_iter) in BinomialCoefs::new(p).take(101).enumerate() {
            let direct = binomial_coef(p, k as u32);
            assert_relative_eq!(via_iter, direct, max_relative = 1e-13, epsilon = 1e-300);
        }
    }

    #[test]
    fn binomial_series_sums_to_power() {
        // Σ C_p^k t^k = (1+t)^p for |t| < 1.
        let (p, t) = (1.7, 0.3);
        let mut sum = 0.0;
        let mut t_pow = 1.0;
        for c in BinomialCoefs::new(p).take(200) {
            sum += c * t_pow;
            t_pow *= t;
        }
        assert_relative_eq!(sum, (1.0f64 + t).powf(p), max_relative = 1e-12);
    }

    #[test]
    fn case1_series_reference_value() {
        // p=1.2, delta=1.5, N_delta=2/3. Oracle: fixed 40 000-term
        // truncation, coefficients built independently, summed smallest
        // first; the neglected tail is below 1e-11 relative.
        let (p, delta, nd) = (1.2f64, 1.5f64, 2.0 / 3.0);
        let s = case1_series(p, delta, nd, 1e-14).unwrap();
        let k_max = 40_000usize;
        let mut coef = alloc::vec::Vec::with_capacity(k_max + 1);
        let mut c = 1.0f64;
        let mut j = 0u32;
        coef.push(c);
        for _ in 1..=k_max {
            for _ in 0..2 {
                c *= (p - j as f64) / (j + 1) as f64;
                j += 1;
            }
            coef.push(c);
        }
        let mut brute = 0.0f64;
        for k in (1..=k_max).rev() {
            let two_k = 2.0 * k as f64;
            brute += coef[k]
                * (nd * two_k / (two_k - delta) - nd * (two_k - p) / (two_k - p + delta));
        }
        assert_relative_eq!(s.value, brute, max_relative = 1e-10);
    }

    #[test]
    fn diverging_terms_are_reported() {
        let r = sum_until(|k| 1.1f64.powi(k as i32), 1e-12);
        assert!(matches!(r, Err(SeriesError::Divergent { .. })));
    }

    #[test]
    fn power_tail_matches_quadrature() {
        let (p, alpha, x, u_cap) = (1.2, 1.5, 5.0, 50.0);
        let series = power_tail_integral(p, alpha, x, u_cap, 1e-14).unwrap();
        let integrand = move |u: f64| {
            ((u + x).powf(p) + (u - x).powf(p) - 2.0 * x.powf(p)) * u.powf(-1.0 - alpha)
        };
        let oracle = integrate_to_inf(integrand, u_cap, &QuadConfig::default()).unwrap();
        assert_relative_eq!(series, oracle.value, max_relative = 1e-7);
    }

    #[test]
    fn power_tail_at_origin_is_plain_power_integral() {
        // x = 0: ∫_U^∞ 2 u^{p-1-alpha} du = 2 U^{p-alpha}/(alpha-p).
        let v = power_tail_integral(1.2, 1.5, 0.0, 100.0, 1e-14).unwrap();
        assert_relative_eq!(v, 2.0 * 100.0f64.powf(-0.3) / 0.3, max_relative = 1e-13);
    }

    #[test]
    fn oscillatory_tail_matches_quadrature() {
        let (freq, alpha, u_cap) = (2.0, 1.5, 20.0);
        let (value, err) = oscillatory_power_tail(freq, alpha, u_cap);
        // Oracle: adaptive panels out to where the envelope is negligible.
        let far = 4000.0;
        let cfg = QuadConfig { max_panels: 1 << 16, ..QuadConfig::default() };
        let direct = integrate(
            |u: f64| (freq * u).cos() * u.powf(-1.0 - alpha),
            u_cap,
            far,
            &cfg,
        )
        .unwrap();
        let leftover = 2.0 * far.powf(-1.0 - alpha) / freq;
        assert!((value - direct.value).abs() <= err + leftover + 1e-12);
        assert!(err < 1e-6);
    }

    proptest! {
        #[test]
        fn even_coefficients_positive_for_p_in_1_2(p in 1.01f64..1.99, k in 1u32..300) {
            prop_assert!(binomial_coef(p, 2 * k) > 0.0);
        }

        #[test]
        fn case1_terms_positive(p in 1.05f64..1.9, delta_off in 0.01f64..0.5) {
            let delta = (p + delta_off).min(1.99);
            let s = case1_series(p, delta, 1.0, 1e-12).unwrap();
            prop_assert!(s.value > 0.0);
        }
    }
}
