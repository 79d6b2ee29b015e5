//! Empirical total-variation machinery: histogram TV estimates,
//! convergence curves against a long-horizon reference sample, and
//! comparison of the observed decay with a certified rate.
//!
//! The invariant law is never available in closed form, so the reference
//! is a pooled endpoint sample at a horizon several times past the
//! curve's last point; its bias is of the order of the certified rate at
//! that horizon and is reported alongside the curve.

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::LevyTypeModel;
use crate::rates::{RateError, RatePlan};
use crate::simulator::{self, ChainRunner, SimConfig, SimError};
use crate::stats;

#[derive(Debug, Clone, Error)]
pub enum DiagError {
    #[error("invalid diagnostics input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Rate(#[from] RateError),
}

/// Histogram-TV estimate; `degenerate` marks the all-points-equal case
/// where the distance is 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub value: f64,
    pub degenerate: bool,
}

/// Cube-root rule for the histogram resolution.
pub fn default_bins(na: usize, nb: usize) -> usize {
    let n = na.min(nb) as f64;
    (n.powf(1.0 / 3.0).ceil() as usize).max(2)
}

fn histogram(sample: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = alloc::vec![0.0f64; bins];
    let width = hi - lo;
    let w = 1.0 / sample.len() as f64;
    for &x in sample {
        let idx = (((x - lo) / width * bins as f64) as usize).min(bins - 1);
        h[idx] += w;
    }
    h
}

/// Total-variation distance between the equal-width histograms of two
/// samples on their common range: `(1/2) Σ |p_b - q_b|`.
pub fn empirical_tv(a: &[f64], b: &[f64], bins: usize) -> Result<TvEstimate, DiagError> {
    if a.is_empty() || b.is_empty() {
        return Err(DiagError::InvalidInput(String::from("both samples must be nonempty")));
    }
    if bins < 2 {
        return Err(DiagError::InvalidInput(format!("need at least 2 bins, got {bins}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in a.iter().chain(b) {
        if !x.is_finite() {
            return Err(DiagError::InvalidInput(String::from("samples must be finite")));
        }
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo == hi {
        return Ok(TvEstimate { value: 0.0, degenerate: true });
    }
    let pa = histogram(a, lo, hi, bins);
    let pb = histogram(b, lo, hi, bins);
    let value = 0.5 * pa.iter().zip(&pb).map(|(p, q)| (p - q).abs()).sum::<f64>();
    Ok(TvEstimate { value: value.clamp(0.0, 1.0), degenerate: false })
}

/// Rank-based TV variant: both samples are mapped through the empirical
/// CDF of the pooled data before histogramming, which makes the estimate
/// invariant under strictly monotone transforms of the common scale.
pub fn empirical_tv_ranked(a: &[f64], b: &[f64], bins: usize) -> Result<TvEstimate, DiagError> {
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_unstable_by(f64::total_cmp);
    let rank = |x: f64| -> f64 {
        // Index of the first element >= x: ties map to one rank.
        let mut lo = 0usize;
        let mut hi = pooled.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if pooled[mid] < x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo as f64 / pooled.len() as f64
    };
    let ra: Vec<f64> = a.iter().map(|&x| rank(x)).collect();
    let rb: Vec<f64> = b.iter().map(|&x| rank(x)).collect();
    empirical_tv(&ra, &rb, bins)
}

fn bootstrap_with<E>(
    estimator: E,
    a: &[f64],
    b: &[f64],
    bins: usize,
    resamples: u32,
    seed: u64,
) -> Result<f64, DiagError>
where
    E: Fn(&[f64], &[f64], usize) -> Result<TvEstimate, DiagError>,
{
    if resamples < 2 {
        return Err(DiagError::InvalidInput(String::from("need at least 2 bootstrap resamples")));
    }
    let (_, mut rng) = simulator::replica_rng(seed, 0);
    let mut replicates = Vec::with_capacity(resamples as usize);
    let mut ra = alloc::vec![0.0f64; a.len()];
    let mut rb = alloc::vec![0.0f64; b.len()];
    for _ in 0..resamples {
        for slot in ra.iter_mut() {
            *slot = a[rng.random_range(0..a.len())];
        }
        for slot in rb.iter_mut() {
            *slot = b[rng.random_range(0..b.len())];
        }
        replicates.push(estimator(&ra, &rb, bins)?.value);
    }
    Ok(1.96 * stats::variance(&replicates).sqrt())
}

/// Bootstrap half-width of the TV estimate: 1.96 times the spread of the
/// estimator over paired with-replacement resamples.
pub fn bootstrap_half_width(
    a: &[f64],
    b: &[f64],
    bins: usize,
    resamples: u32,
    seed: u64,
) -> Result<f64, DiagError> {
    bootstrap_with(empirical_tv, a, b, bins, resamples, seed)
}

/// [`bootstrap_half_width`] for the rank-based estimate, resampling first
/// and re-ranking within each resample.
pub fn bootstrap_half_width_ranked(
    a: &[f64],
    b: &[f64],
    bins: usize,
    resamples: u32,
    seed: u64,
) -> Result<f64, DiagError> {
    bootstrap_with(empirical_tv_ranked, a, b, bins, resamples, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TVPoint {
    pub t: f64,
    pub tv: f64,
    pub half_width: f64,
    /// Certified rate rescaled to the first grid point, when a plan was
    /// supplied.
    pub psi_overlay: Option<f64>,
}

/// Empirical TV convergence curve against a long-horizon reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TVCurve {
    pub points: Vec<TVPoint>,
    pub t_ref: f64,
    /// Pooled reference sample size.
    pub reference_size: usize,
    /// Overlay value at the reference horizon: the order of the bias
    /// incurred by using a finite-horizon sample as the invariant proxy.
    pub reference_bias: Option<f64>,
    pub bins: usize,
    pub bootstrap_resamples: u32,
}

/// Number of bootstrap resamples behind each half-width.
pub const DEFAULT_RESAMPLES: u32 = 200;

/// Simulate the reference sample at `t_ref` and the endpoint sample at
/// each grid horizon, recording rank-based histogram TV with bootstrap
/// half-widths and the rescaled certified-rate overlay.
///
/// The curve uses the rank-based estimate because endpoint samples of
/// heavy-tailed kernels contain outliers that grow polynomially with the
/// sample size; equal-width bins on the raw common range would then lump
/// the entire bulk into one bin and hide the distance actually decaying.
pub fn convergence_curve(
    model: &LevyTypeModel,
    base: &SimConfig,
    t_grid: &[f64],
    t_ref: f64,
    plan: Option<&RatePlan>,
    runner: &dyn ChainRunner,
) -> Result<TVCurve, DiagError> {
    if t_grid.is_empty() {
        return Err(DiagError::InvalidInput(String::from("horizon grid must be nonempty")));
    }
    for pair in t_grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(DiagError::InvalidInput(String::from(
                "horizon grid must be strictly increasing",
            )));
        }
    }
    let t_max = t_grid[t_grid.len() - 1];
    if !(t_grid[0] > 0.0) {
        return Err(DiagError::InvalidInput(String::from("horizons must be positive")));
    }
    if !(t_ref >= 4.0 * t_max) {
        return Err(DiagError::InvalidInput(format!(
            "reference horizon {t_ref} must be at least 4x the last grid point {t_max}"
        )));
    }

    let mut ref_cfg = base.clone();
    ref_cfg.horizon = t_ref;
    ref_cfg.seed = simulator::derive_seed(base.seed, 1);
    let reference = simulator::simulate_chain_with(model, &ref_cfg, runner)?;

    let bins = default_bins(reference.endpoints.len(), base.replicas as usize);
    let mut points = Vec::with_capacity(t_grid.len());
    let mut anchor: Option<(f64, f64)> = None; // (tv at first point, psi at first point)
    for (i, &t) in t_grid.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.horizon = t;
        cfg.seed = simulator::derive_seed(base.seed, 2 + i as u64);
        let sample = simulator::simulate_chain_with(model, &cfg, runner)?;
        let tv = empirical_tv_ranked(&sample.endpoints, &reference.endpoints, bins)?.value;
        let half_width = bootstrap_half_width_ranked(
            &sample.endpoints,
            &reference.endpoints,
            bins,
            DEFAULT_RESAMPLES,
            simulator::derive_seed(base.seed, 1000 + i as u64),
        )?;
        let psi_overlay = match plan {
            Some(plan) => {
                let psi_t = plan.psi(t)?;
                let (tv0, psi0) = *anchor.get_or_insert((tv, psi_t));
                Some(tv0 * psi_t / psi0)
            }
            None => None,
        };
        points.push(TVPoint { t, tv, half_width, psi_overlay });
    }

    let reference_bias = match (plan, anchor) {
        (Some(plan), Some((tv0, psi0))) => Some(tv0 * plan.psi(t_ref)? / psi0),
        _ => None,
    };

    Ok(TVCurve {
        points,
        t_ref,
        reference_size: reference.endpoints.len(),
        reference_bias,
        bins,
        bootstrap_resamples: DEFAULT_RESAMPLES,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonVerdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Fitted-versus-predicted decay report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub verdict: ComparisonVerdict,
    /// "exp", "poly", or "subexp".
    pub family: String,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
    pub points_used: usize,
    pub points_total: usize,
    /// Mean noise threshold (3x half-width) across the curve.
    pub noise_floor: f64,
    pub tolerance_factor: f64,
    pub note: String,
}

/// Default multiplicative tolerance on the decay exponent.
pub const DEFAULT_TOLERANCE_FACTOR: f64 = 2.0;

/// Fit the decay family implied by the plan to the points above the
/// noise floor and compare the fitted exponent with the certified one.
///
/// Fit coordinates per family: `ln tv` against `t` (exponential decay,
/// predicted slope `-c γ`), against `ln t` (polynomial decay, predicted
/// slope `-q/(1-q)`), or against `t^{1/(1-eta)}` (sub-exponential decay,
/// predicted coefficient of the stretched exponent).
pub fn rate_comparison(
    curve: &TVCurve,
    plan: &RatePlan,
    tolerance_factor: f64,
) -> Result<RateComparison, DiagError> {
    if !(tolerance_factor > 1.0) {
        return Err(DiagError::InvalidInput(format!(
            "tolerance factor must exceed 1, got {tolerance_factor}"
        )));
    }
    let family = String::from(plan.f.family_tag());
    let usable: Vec<&TVPoint> =
        curve.points.iter().filter(|p| p.tv > 3.0 * p.half_width && p.tv > 0.0).collect();
    let noise_floor = 3.0
        * curve.points.iter().map(|p| p.half_width).sum::<f64>()
        / curve.points.len().max(1) as f64;

    let predicted = predicted_exponent(plan);
    if usable.len() < 4 {
        return Ok(RateComparison {
            verdict: ComparisonVerdict::Inconclusive,
            family,
            fitted_exponent: f64::NAN,
            predicted_exponent: predicted,
            points_used: usable.len(),
            points_total: curve.points.len(),
            noise_floor,
            tolerance_factor,
            note: format!(
                "only {} of {} points exceed 3x their bootstrap half-width",
                usable.len(),
                curve.points.len()
            ),
        });
    }

    let xs: Vec<f64> = usable.iter().map(|p| time_coordinate(plan, p.t)).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.tv.ln()).collect();
    let (_, fitted) = stats::linear_fit(&xs, &ys);

    let ratio = fitted / predicted;
    let verdict = if fitted < 0.0 && ratio >= 1.0 / tolerance_factor && ratio <= tolerance_factor {
        ComparisonVerdict::Pass
    } else {
        ComparisonVerdict::Fail
    };
    let note = if fitted >= 0.0 {
        String::from("fitted exponent has the wrong sign")
    } else {
        format!("fitted/predicted ratio {ratio:.3}")
    };
    Ok(RateComparison {
        verdict,
        family,
        fitted_exponent: fitted,
        predicted_exponent: predicted,
        points_used: usable.len(),
        points_total: curve.points.len(),
        noise_floor,
        tolerance_factor,
        note,
    })
}

fn time_coordinate(plan: &RatePlan, t: f64) -> f64 {
    use crate::rates::RateFn;
    match plan.f {
        RateFn::Linear { .. } => t,
        RateFn::Power { .. } => t.ln(),
        RateFn::LogPower { eta, .. } => t.powf(1.0 / (1.0 - eta)),
    }
}

fn predicted_exponent(plan: &RatePlan) -> f64 {
    use crate::rates::RateFn;
    match plan.f {
        RateFn::Linear { c } => -c * plan.gamma,
        RateFn::Power { q, .. } => -q / (1.0 - q),
        RateFn::LogPower { c, beta, eta } => {
            -(plan.gamma * c * (1.0 - eta) * beta.powf(-eta)).powf(1.0 / (1.0 - eta))
        }
    }
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use crate::kernel::{Drift, KernelSpec};
    use crate::rates::RateFn;
    use crate::simulator::SequentialRunner;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::Distribution;

    #[test]
    fn identical_samples_have_distance_zero() {
        let a = alloc::vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(empirical_tv(&a, &a, 4).unwrap().value, 0.0);
    }

    #[test]
    fn disjoint_supports_have_distance_one() {
        let a: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let b: Vec<f64> = (0..100).map(|i| 2.0 + i as f64 / 100.0).collect();
        assert_eq!(empirical_tv(&a, &b, 8).unwrap().value, 1.0);
    }

    #[test]
    fn degenerate_range_is_flagged() {
        let a = alloc::vec![2.0, 2.0, 2.0];
        let est = empirical_tv(&a, &a, 4).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn preconditions_are_enforced() {
        let a = alloc::vec![1.0];
        assert!(empirical_tv(&a, &[], 4).is_err());
        assert!(empirical_tv(&a, &a, 1).is_err());
        assert!(empirical_tv(&a, &alloc::vec![f64::NAN], 4).is_err());
    }

    #[test]
    fn cube_root_bin_rule() {
        assert_eq!(default_bins(1000, 100_000), 10);
        assert_eq!(default_bins(100_000, 1000), 10);
        assert_eq!(default_bins(2, 2), 2);
        assert_eq!(default_bins(1001, 1001), 11);
    }

    fn gaussian_sample(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| normal.sample(&mut rng)).collect()
    }

    #[test]
    fn common_law_samples_are_close() {
        let a = gaussian_sample(100_000, 1);
        let b = gaussian_sample(100_000, 2);
        let bins = default_bins(a.len(), b.len());
        let tv = empirical_tv(&a, &b, bins).unwrap().value;
        assert!(tv <= 0.02, "TV between same-law samples was {tv}");
    }

    #[test]
    fn estimate_shrinks_with_sample_size() {
        let mut prev = f64::INFINITY;
        for (n, seed) in [(1000usize, 3u64), (10_000, 5), (100_000, 7)] {
            let a = gaussian_sample(n, seed);
            let b = gaussian_sample(n, seed + 1);
            let tv = empirical_tv(&a, &b, default_bins(n, n)).unwrap().value;
            assert!(tv < prev, "TV {tv} at n={n} should drop below {prev}");
            prev = tv;
        }
    }

    #[test]
    fn tv_is_symmetric() {
        let a = gaussian_sample(5000, 11);
        let b: Vec<f64> = gaussian_sample(5000, 12).iter().map(|x| x + 0.5).collect();
        let ab = empirical_tv(&a, &b, 17).unwrap().value;
        let ba = empirical_tv(&b, &a, 17).unwrap().value;
        assert_eq!(ab, ba);
    }

    #[test]
    fn ranked_variant_ignores_monotone_transforms() {
        let a = gaussian_sample(4000, 21);
        let b: Vec<f64> = gaussian_sample(4000, 22).iter().map(|x| x + 0.7).collect();
        let ta: Vec<f64> = a.iter().map(|x| x.exp()).collect();
        let tb: Vec<f64> = b.iter().map(|x| x.exp()).collect();
        let plain = empirical_tv_ranked(&a, &b, 16).unwrap().value;
        let transformed = empirical_tv_ranked(&ta, &tb, 16).unwrap().value;
        assert_eq!(plain, transformed);
    }

    #[test]
    fn bootstrap_half_width_is_deterministic_and_positive() {
        let a = gaussian_sample(2000, 31);
        let b: Vec<f64> = gaussian_sample(2000, 32).iter().map(|x| x + 1.0).collect();
        let h1 = bootstrap_half_width(&a, &b, 12, 200, 5).unwrap();
        let h2 = bootstrap_half_width(&a, &b, 12, 200, 5).unwrap();
        assert_eq!(h1, h2);
        assert!(h1 > 0.0 && h1 < 0.2, "half-width {h1}");
    }

    fn ou_model() -> LevyTypeModel {
        LevyTypeModel::new(
            Drift::Power { strength: 1.0, exponent: 1.0 },
            KernelSpec::tempered(0.5, 1.5, 2.0, 0.0),
        )
        .unwrap()
    }

    fn curve_cfg() -> SimConfig {
        SimConfig {
            steps_per_unit: 100,
            horizon: 1.0, // replaced per grid point
            replicas: 600,
            eps: None,
            seed: 99,
            x0: 5.0,
        }
    }

    #[test]
    fn contractive_model_has_a_decreasing_curve() {
        let plan = RatePlan::new(RateFn::Linear { c: 0.5 }, 1.0).unwrap();
        let curve = convergence_curve(
            &ou_model(),
            &curve_cfg(),
            &[0.25, 0.5, 1.0, 2.0],
            8.0,
            Some(&plan),
            &SequentialRunner,
        )
        .unwrap();
        assert_eq!(curve.points.len(), 4);
        for p in &curve.points {
            assert!(p.tv >= 0.0 && p.tv <= 1.0);
        }
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        assert!(
            last.tv < first.tv,
            "TV should shrink along the curve: first {} last {}",
            first.tv,
            last.tv
        );
        // Overlay anchored exactly at the first point.
        assert_relative_eq!(first.psi_overlay.unwrap(), first.tv);
        assert!(curve.reference_bias.unwrap() < last.psi_overlay.unwrap());
    }

    #[test]
    fn reference_horizon_precondition() {
        let out = convergence_curve(
            &ou_model(),
            &curve_cfg(),
            &[1.0, 2.0],
            4.0, // < 4 * 2
            None,
            &SequentialRunner,
        );
        assert!(matches!(out, Err(DiagError::InvalidInput(_))));
    }

    fn synthetic_curve(points: Vec<TVPoint>) -> TVCurve {
        TVCurve {
            points,
            t_ref: 100.0,
            reference_size: 10_000,
            reference_bias: None,
            bins: 20,
            bootstrap_resamples: 200,
        }
    }

    #[test]
    fn exponential_decay_passes_at_factor_two() {
        let plan = RatePlan::new(RateFn::Linear { c: 1.0 }, 0.5).unwrap();
        // True decay -0.4 vs predicted -0.5: ratio 0.8, inside factor 2.
        let points: Vec<TVPoint> = (1..=6)
            .map(|i| {
                let t = i as f64;
                TVPoint { t, tv: 0.8 * (-0.4 * t).exp(), half_width: 1e-5, psi_overlay: None }
            })
            .collect();
        let rep = rate_comparison(&synthetic_curve(points), &plan, 2.0).unwrap();
        assert_eq!(rep.verdict, ComparisonVerdict::Pass);
        assert_eq!(rep.family, "exp");
        assert_relative_eq!(rep.fitted_exponent, -0.4, max_relative = 1e-9);
        assert_relative_eq!(rep.predicted_exponent, -0.5);
    }

    #[test]
    fn polynomial_decay_fits_the_log_log_slope() {
        // q/(1-q) = 1.4 for q = 7/12.
        let q: f64 = 7.0 / 12.0;
        let plan = RatePlan::new(RateFn::Power { c: 1.0, q }, 1.0).unwrap();
        let points: Vec<TVPoint> = (1..=6)
            .map(|i| {
                let t = (10.0f64).powi(i);
                TVPoint { t, tv: 0.9 * t.powf(-1.4), half_width: 1e-30, psi_overlay: None }
            })
            .collect();
        let rep = rate_comparison(&synthetic_curve(points), &plan, 2.0).unwrap();
        assert_eq!(rep.verdict, ComparisonVerdict::Pass);
        assert_eq!(rep.family, "poly");
        assert_relative_eq!(rep.fitted_exponent, -1.4, max_relative = 1e-9);
        assert_relative_eq!(rep.predicted_exponent, -q / (1.0 - q), max_relative = 1e-12);
    }

    #[test]
    fn wrong_sign_fails_even_inside_the_ratio_window() {
        let plan = RatePlan::new(RateFn::Power { c: 1.0, q: 0.2 }, 1.0).unwrap();
        let points: Vec<TVPoint> = (1..=5)
            .map(|i| {
                let t = (4.0f64).powi(i);
                TVPoint { t, tv: 0.01 * t.powf(0.25), half_width: 1e-6, psi_overlay: None }
            })
            .collect();
        let rep = rate_comparison(&synthetic_curve(points), &plan, 2.0).unwrap();
        assert_eq!(rep.verdict, ComparisonVerdict::Fail);
        assert!(rep.note.contains("sign"));
    }

    #[test]
    fn noise_floor_yields_inconclusive() {
        let plan = RatePlan::new(RateFn::Linear { c: 1.0 }, 1.0).unwrap();
        let points: Vec<TVPoint> = (1..=5)
            .map(|i| TVPoint { t: i as f64, tv: 0.01, half_width: 0.02, psi_overlay: None })
            .collect();
        let rep = rate_comparison(&synthetic_curve(points), &plan, 2.0).unwrap();
        assert_eq!(rep.verdict, ComparisonVerdict::Inconclusive);
        assert_eq!(rep.points_used, 0);
        assert!(rep.noise_floor > 0.0);
    }

    #[test]
    fn subexponential_prediction_uses_the_stretched_exponent() {
        // eta = -2, gamma c (1-eta) beta^{-eta} = 1.0 * 0.5 * 3 * 1 = 1.5;
        // predicted coefficient -(1.5)^{1/3} on s = t^{1/3}.
        let plan = RatePlan::new(RateFn::LogPower { c: 0.5, beta: 1.0, eta: -2.0 }, 1.0).unwrap();
        let coef = (1.5f64).powf(1.0 / 3.0);
        let points: Vec<TVPoint> = (1..=6)
            .map(|i| {
                let t = (2.0f64).powi(i);
                let s = t.powf(1.0 / 3.0);
                TVPoint { t, tv: 0.7 * (-coef * s).exp(), half_width: 1e-12, psi_overlay: None }
            })
            .collect();
        let rep = rate_comparison(&synthetic_curve(points), &plan, 2.0).unwrap();
        assert_eq!(rep.family, "subexp");
        assert_eq!(rep.verdict, ComparisonVerdict::Pass);
        assert_relative_eq!(rep.fitted_exponent, -coef, max_relative = 1e-9);
    }
}
