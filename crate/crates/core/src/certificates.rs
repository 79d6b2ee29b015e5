//! Ergodicity certificates from Foster-Lyapunov drift conditions.
//!
//! A certificate is falsifiable numerical evidence, not a proof: the
//! asymptotic drift inequality is replaced by a grid maximum of its
//! finite-state proxy over an outer evidence grid, with an explicit
//! margin requirement. The two pathways are
//!
//! * polynomial Lyapunov functions `V = φ^p` against kernels with
//!   polynomially regular tails (classified into four cases by the tail
//!   indices `σ <= δ`), and
//! * exponential Lyapunov functions `V = exp(beta φ^{1+zeta})` against
//!   kernels with finite exponential moments.
//!
//! Each pathway produces a case constant, a scaling function, a margin,
//! and the compact-set data for the discrete-skeleton drift inequality
//! `f(1 + inf_{|x|>R} V) > 2 C_lyap`.

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{self, GeneratorError, LyapunovSpec, SmoothNorm, TestFunction};
use crate::kernel::{KernelError, LevyTypeModel, TailConstants, TailGrids};
use crate::quad::QuadConfig;
use crate::rates::{RateError, RateFn};
use crate::series::{self, SeriesError};
use crate::stats;

#[derive(Debug, Clone, Error)]
pub enum CertError {
    #[error("tail indices sigma={sigma}, delta={delta} unsupported: {reason}")]
    UnsupportedIndices { sigma: f64, delta: f64, reason: String },
    #[error("invalid Lyapunov exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid rate function: {0}")]
    InvalidRateFunction(String),
    #[error("drift/tail balance violated: kappa={kappa} + min(sigma,2)={min_sigma2} must exceed 1")]
    BalanceViolation { kappa: f64, min_sigma2: f64 },
    #[error("drift has no inward component at x={x}: a(x) sign(x) = {value}")]
    NoInwardDrift { x: f64, value: f64 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("exponential-moment precondition failed: {0}")]
    ExpPrecondition(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Rate(#[from] RateError),
}

/// Tail-index case of the polynomial pathway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseIndex {
    /// `1 < σ <= δ < 2`.
    Case1,
    /// `σ = δ = 2`.
    Case2,
    /// `σ >= 2`, `δ > 2`.
    Case3,
    /// `1 < σ < 2 <= δ`.
    Case4,
}

impl CaseIndex {
    pub fn index(self) -> u8 {
        match self {
            CaseIndex::Case1 => 1,
            CaseIndex::Case2 => 2,
            CaseIndex::Case3 => 3,
            CaseIndex::Case4 => 4,
        }
    }
}

/// Map declared tail indices to their case. Total and single-valued on
/// the admissible region; the four preimages are disjoint.
pub fn classify_case(sigma: f64, delta: f64) -> Result<CaseIndex, CertError> {
    let err = |reason: &str| CertError::UnsupportedIndices {
        sigma,
        delta,
        reason: String::from(reason),
    };
    if !(sigma > 0.0 && sigma.is_finite() && delta.is_finite() && sigma <= delta) {
        return Err(err("need 0 < sigma <= delta < infinity"));
    }
    if delta < 2.0 {
        return if sigma > 1.0 {
            Ok(CaseIndex::Case1)
        } else {
            Err(err("polynomial certificates need sigma > 1 (no p in (1, sigma) otherwise)"))
        };
    }
    if sigma == 2.0 && delta == 2.0 {
        return Ok(CaseIndex::Case2);
    }
    if sigma >= 2.0 {
        // delta > 2 here: (sigma >= 2, delta = 2) forces sigma = 2, caught above.
        return Ok(CaseIndex::Case3);
    }
    if sigma > 1.0 {
        Ok(CaseIndex::Case4)
    } else {
        Err(err("polynomial certificates need sigma > 1 (no p in (1, sigma) otherwise)"))
    }
}

/// The case constant paired with `case_scaling`: the certified bound on
/// the integral part of the generator over the scaling function.
pub fn case_constant(
    case: CaseIndex,
    p: f64,
    tails: &TailConstants,
    sigma: f64,
    delta: f64,
    series_tol: f64,
) -> Result<f64, CertError> {
    if !(p > 1.0 && p < sigma) {
        return Err(CertError::InvalidExponent(format!(
            "need p in (1, sigma) = (1, {sigma}), got {p}"
        )));
    }
    Ok(match case {
        CaseIndex::Case1 => {
            let series = if delta == sigma {
                2.0 * series::case1_series(p, delta, tails.n_delta, series_tol)?.value
            } else {
                0.0
            };
            series + 2.0 * p * tails.n_sigma / (sigma - p)
        }
        CaseIndex::Case2 => 2.0 * p * (p - 1.0) * tails.n_delta,
        CaseIndex::Case3 => {
            let boundary = if sigma == 2.0 { 2.0 * p * tails.n_sigma / (sigma - p) } else { 0.0 };
            0.5 * p * (p - 1.0)
                * (tails.nu_small + 2.0 * tails.n_max + 4.0 * tails.n_delta / (delta - 2.0))
                + boundary
        }
        CaseIndex::Case4 => 2.0 * p * tails.n_sigma / (sigma - p),
    })
}

/// Scaling function of the polynomial pathway at `|x| >= 1`.
pub fn case_scaling(case: CaseIndex, p: f64, sigma: f64, x: f64) -> f64 {
    let ax = x.abs();
    match case {
        CaseIndex::Case1 | CaseIndex::Case4 => ax.powf(p - sigma),
        CaseIndex::Case2 => ax.powf(p - 2.0) * (1.0 + ax).ln(),
        CaseIndex::Case3 => ax.powf(p - 2.0),
    }
}

/// `ln` of the scaling function of the exponential pathway,
/// `|x|^{kappa+zeta} exp(beta |x|^{1+zeta})`; log scale because the
/// factor overflows far inside the evidence grid.
pub fn log_exp_scaling(beta: f64, zeta: f64, kappa: f64, x: f64) -> f64 {
    let ax = x.abs();
    (kappa + zeta) * ax.ln() + beta * ax.powf(1.0 + zeta)
}

/// Constants of the exponential pathway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpConstants {
    /// The certified bound `C` on the integral part over the scaling.
    pub c5: f64,
    /// Exponential-moment exponent the bound was taken against.
    pub alpha_e: f64,
    /// `sup_{x>1} x^2 exp((beta - alpha_e) x^{1+zeta})`.
    pub c0: f64,
    /// `sup_x` of the small-jump second moment.
    pub nu_small: f64,
    /// `sup_x` of the large-jump exponential moment at `alpha_e`.
    pub nu_large: f64,
}

/// Compute the exponential-pathway constant for a kernel with a finite
/// exponential moment envelope.
pub fn exp_constant(
    model: &LevyTypeModel,
    beta: f64,
    zeta: f64,
    xs: &[f64],
) -> Result<ExpConstants, CertError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(CertError::ExpPrecondition(format!("beta must be positive, got {beta}")));
    }
    if !(zeta > -1.0 && zeta <= 0.0) {
        return Err(CertError::ExpPrecondition(format!("zeta must lie in (-1, 0], got {zeta}")));
    }
    let (theta, zeta_t) = model.kernel.exp_envelope().ok_or_else(|| {
        CertError::ExpPrecondition(String::from(
            "kernel has power tails; no exponential moment exists",
        ))
    })?;
    // Pick the moment exponent alpha_e > beta with the same shape zeta.
    let alpha_e = if zeta < zeta_t {
        beta + 1.0
    } else if zeta == zeta_t && beta < theta {
        0.5 * (beta + theta)
    } else {
        return Err(CertError::ExpPrecondition(format!(
            "exp(beta |u|^(1+zeta)) moment diverges: beta={beta}, zeta={zeta} against envelope theta={theta}, zeta={zeta_t}"
        )));
    };

    // c0 = sup_{x>1} x^2 exp(-(alpha_e - beta) x^{1+zeta}), by closed-form
    // maximization of its logarithm.
    let r = alpha_e - beta;
    let m = 1.0 + zeta;
    let x_star = (2.0 / (r * m)).powf(1.0 / m);
    let c0 = if x_star > 1.0 {
        (2.0 * x_star.ln() - r * x_star.powf(m)).exp()
    } else {
        (-r).exp()
    };

    let mut nu_small = 0.0f64;
    let mut nu_large = 0.0f64;
    for &x in xs {
        nu_small = nu_small.max(model.small_jump_moment(x)?);
        let moment = model.exp_moment(x, alpha_e, zeta)?.finite().ok_or_else(|| {
            CertError::ExpPrecondition(format!(
                "exponential moment diverged numerically at x={x}, alpha_e={alpha_e}"
            ))
        })?;
        nu_large = nu_large.max(moment);
    }

    let c5 = 0.5 * beta * beta * m * m * (beta.exp() * nu_small + c0 * nu_large);
    Ok(ExpConstants { c5, alpha_e, c0, nu_small, nu_large })
}

/// Extract `(kappa, A)` with `a(x) sign(x) <= -A |x|^kappa` on the outer
/// grid: exact for the power family, fitted for tabulated drifts.
pub fn drift_growth(model: &LevyTypeModel, outer: &[f64]) -> Result<(f64, f64), CertError> {
    use crate::kernel::Drift;
    match model.drift {
        Drift::Power { strength, exponent } => {
            if strength <= 0.0 {
                let x = outer.first().copied().unwrap_or(1.0);
                return Err(CertError::NoInwardDrift { x, value: -strength * x.abs().powf(exponent) });
            }
            Ok((exponent, strength))
        }
        Drift::Tabulated(_) => {
            let mut lx = Vec::new();
            let mut ly = Vec::new();
            for &x in outer {
                let inward = model.drift_at(x) * x.signum();
                if inward >= 0.0 {
                    return Err(CertError::NoInwardDrift { x, value: inward });
                }
                lx.push(x.abs().ln());
                ly.push((-inward).ln());
            }
            let (_, kappa) = stats::linear_fit(&lx, &ly);
            // Conservative bound: the weakest inward pull on the grid.
            let a = outer
                .iter()
                .map(|&x| -model.drift_at(x) * x.signum() / x.abs().powf(kappa))
                .fold(f64::INFINITY, f64::min);
            Ok((kappa, a))
        }
    }
}

/// Decay pathway requested from the drift corollaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pathway {
    Poly,
    Exp,
}

/// Rate function derived from the drift growth, together with the upper
/// bound its coefficient must respect for the certificate to close.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRate {
    pub f: RateFn,
    /// The coefficient constraint `c < max_c`; infinite when the drift
    /// dominates outright.
    pub max_c: f64,
}

/// Polynomial pathway: rate function from drift growth `(kappa, A)` and
/// Lyapunov exponent `p`, subject to the tail balance
/// `kappa + min(sigma, 2) > 1`.
pub fn rate_from_drift_poly(
    kappa: f64,
    a_kappa: f64,
    p: f64,
    sigma: f64,
    c: f64,
) -> Result<DriftRate, CertError> {
    let min_sigma2 = sigma.min(2.0);
    if !(kappa + min_sigma2 > 1.0) {
        return Err(CertError::BalanceViolation { kappa, min_sigma2 });
    }
    if !(a_kappa > 0.0) {
        return Err(CertError::NoInwardDrift { x: f64::NAN, value: -a_kappa });
    }
    if kappa >= 1.0 {
        let max_c = if kappa > 1.0 { f64::INFINITY } else { p * a_kappa };
        return Ok(DriftRate { f: RateFn::Linear { c }, max_c });
    }
    // kappa in (1 - min(sigma,2), 1): the power rate needs q > 0.
    let q = 1.0 + (kappa - 1.0) / p;
    if !(q > 0.0) {
        return Err(CertError::InvalidExponent(format!(
            "Lyapunov exponent p={p} too small for drift exponent kappa={kappa}; need p > {}",
            1.0 - kappa
        )));
    }
    Ok(DriftRate { f: RateFn::Power { c, q }, max_c: p * a_kappa })
}

/// Exponential pathway: rate function from drift growth `(kappa, A)` and
/// the Lyapunov parameters `(beta, zeta)`; `c5` is the pathway constant
/// entering the coefficient constraint.
pub fn rate_from_drift_exp(
    kappa: f64,
    a_kappa: f64,
    beta: f64,
    zeta: f64,
    c5: f64,
    c: f64,
) -> Result<DriftRate, CertError> {
    if !(a_kappa > 0.0) {
        return Err(CertError::NoInwardDrift { x: f64::NAN, value: -a_kappa });
    }
    if kappa >= 0.0 {
        if zeta != 0.0 {
            return Err(CertError::NotApplicable(format!(
                "kappa={kappa} >= 0 pairs with zeta = 0, got zeta={zeta}"
            )));
        }
        let max_c = if kappa > 0.0 { f64::INFINITY } else { beta * a_kappa - c5 };
        return Ok(DriftRate { f: RateFn::Linear { c }, max_c });
    }
    if !(kappa > -1.0) {
        return Err(CertError::NotApplicable(format!(
            "drift exponent kappa={kappa} below -1 leaves no admissible rate"
        )));
    }
    if !(zeta > -1.0 && zeta <= kappa) {
        return Err(CertError::NotApplicable(format!(
            "kappa={kappa} in (-1,0) needs zeta in (-1, kappa], got zeta={zeta}"
        )));
    }
    let eta = (kappa + zeta) / (1.0 + zeta);
    Ok(DriftRate {
        f: RateFn::LogPower { c, beta, eta },
        max_c: beta * (1.0 + zeta) * a_kappa - c5,
    })
}

/// The decay-optimal shape parameter for drifts with `kappa` in (-1, 0).
pub fn optimal_zeta(kappa: f64) -> Result<f64, CertError> {
    if kappa > -1.0 && kappa < 0.0 {
        Ok(kappa)
    } else {
        Err(CertError::NotApplicable(format!(
            "shape optimization applies to kappa in (-1, 0), got {kappa}"
        )))
    }
}

/// Evidence grids of a certificate run.
#[derive(Debug, Clone)]
pub struct CertGrids {
    /// Outer evidence grid; the limsup proxy is maximized here.
    pub outer: Vec<f64>,
    /// Inner grid over which the Lyapunov offset constant is taken.
    pub inner: Vec<f64>,
    /// Candidate compact-set radii for the skeleton inequality.
    pub radius: Vec<f64>,
    /// Required margin as a fraction of the drift term at the inner edge
    /// of the outer grid.
    pub margin_frac: f64,
    /// Grids for the kernel tail constants.
    pub tail: TailGrids,
    /// Quadrature controls for generator evaluations.
    pub quad: QuadConfig,
}

impl Default for CertGrids {
    fn default() -> Self {
        Self {
            outer: crate::grid::symmetric_geomspace(1e2, 1e4, 9),
            inner: crate::grid::linspace(-100.0, 100.0, 41),
            radius: crate::grid::geomspace(1.0, 1e4, 49),
            margin_frac: 0.05,
            tail: TailGrids::default(),
            quad: QuadConfig::coarse(),
        }
    }
}

impl CertGrids {
    fn x_far(&self) -> f64 {
        self.outer.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidencePoint {
    pub x: f64,
    pub proxy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    NotCertified,
}

/// Outcome of a certificate run. `verdict = Certified` implies
/// `margin >= margin_required > 0` and a finite compact-set radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// 1-4 for the polynomial pathway, 5 for the exponential one.
    pub case: u8,
    /// The case constant (`c5` for the exponential pathway).
    pub constant: f64,
    pub p: Option<f64>,
    pub beta: Option<f64>,
    pub zeta: Option<f64>,
    pub kappa: Option<f64>,
    pub tails: Option<TailConstants>,
    pub exp_constants: Option<ExpConstants>,
    pub f: RateFn,
    /// Negated grid maximum of the limsup proxy.
    pub margin: f64,
    pub margin_required: f64,
    pub evidence: Vec<EvidencePoint>,
    /// Offset constant of the drift inequality on the inner region.
    pub lyap_c: f64,
    /// Smallest certified compact-set radius, if any.
    pub lyap_radius: Option<f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Grid checks that `f` behaves like a rate function (positive,
/// nondecreasing, midpoint-concave, and >= 1) on `[w_lo, w_hi]`.
fn check_rate_shape(f: &RateFn, w_lo: f64, w_hi: f64) -> Result<(), CertError> {
    f.validate()?;
    let ws = crate::grid::geomspace(w_lo, w_hi.max(w_lo * (1.0 + 1e-9)), 64);
    let mut prev = f64::NEG_INFINITY;
    for w in ws.iter() {
        let v = f.eval(*w);
        if !(v.is_finite() && v >= 1.0) {
            return Err(CertError::InvalidRateFunction(format!(
                "rate function must stay >= 1 on the evidence range; f({w}) = {v}"
            )));
        }
        if v < prev * (1.0 - 1e-12) {
            return Err(CertError::InvalidRateFunction(format!(
                "rate function must be nondecreasing; decrease detected at w = {w}"
            )));
        }
        prev = v;
    }
    for pair in ws.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        let chord = 0.5 * (f.eval(a) + f.eval(b));
        let at_mid = f.eval(mid);
        if at_mid < chord * (1.0 - 1e-9) {
            return Err(CertError::InvalidRateFunction(format!(
                "rate function fails midpoint concavity between {a} and {b}"
            )));
        }
    }
    Ok(())
}

/// Shared tail of certificate assembly: Lyapunov offset constant,
/// compact-set radius, margin verdict.
struct DriftEvidence {
    evidence: Vec<EvidencePoint>,
    margin: f64,
    margin_required: f64,
    lyap_c: f64,
    lyap_radius: Option<f64>,
    verdict: Verdict,
    notes: Vec<String>,
}

fn assemble(
    evidence: Vec<EvidencePoint>,
    margin_required: f64,
    lyap_c: f64,
    lyap_radius: Option<f64>,
) -> DriftEvidence {
    let worst = evidence.iter().map(|e| e.proxy).fold(f64::NEG_INFINITY, f64::max);
    let margin = -worst;
    let mut notes = Vec::new();
    if !(margin > 0.0) {
        notes.push(format!("drift proxy reaches {worst:.6e} >= 0 on the evidence grid"));
    } else if margin < margin_required {
        notes.push(format!(
            "margin {margin:.6e} below required {margin_required:.6e}"
        ));
    }
    if lyap_radius.is_none() {
        notes.push(String::from(
            "no radius on the grid satisfies the skeleton inequality f(1 + V) > 2 C",
        ));
    }
    let verdict = if notes.is_empty() { Verdict::Certified } else { Verdict::NotCertified };
    DriftEvidence { evidence, margin, margin_required, lyap_c, lyap_radius, verdict, notes }
}

/// Certify the polynomial pathway: drift condition for `V = φ^p` with
/// rate function `f`, against the declared tail indices of the kernel.
pub fn certify_polynomial(
    model: &LevyTypeModel,
    p: f64,
    f: &RateFn,
    grids: &CertGrids,
) -> Result<Certificate, CertError> {
    let tails = crate::kernel::tail_constants(model, &grids.tail)?;
    let idx = model.kernel.declared.expect("tail_constants requires declared indices");
    let (sigma, delta) = (idx.sigma, idx.delta);
    let case = classify_case(sigma, delta)?;
    let constant = case_constant(case, p, &tails, sigma, delta, 1e-12)?;

    if matches!(f, RateFn::LogPower { .. }) {
        return Err(CertError::InvalidRateFunction(String::from(
            "log-power rates pair with the exponential pathway; the polynomial pathway needs f defined near 1",
        )));
    }
    let x_far = grids.x_far();
    let x_max = grids.outer.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    check_rate_shape(f, x_far.powf(p), x_max.powf(p))?;

    let proxy = |x: f64| -> f64 {
        let ax = x.abs();
        let drift_part = p * model.drift_at(x) * x.signum() * ax.powf(p - 1.0);
        (drift_part + f.eval(ax.powf(p))) / case_scaling(case, p, sigma, x) + constant
    };
    let evidence: Vec<EvidencePoint> =
        grids.outer.iter().map(|&x| EvidencePoint { x, proxy: proxy(x) }).collect();
    let margin_required = grids.margin_frac
        * (p * model.drift_at(x_far) * x_far.powf(p - 1.0)).abs()
        / case_scaling(case, p, sigma, x_far);

    let spec = LyapunovSpec::Polynomial { p };
    let mut sup = 0.0f64;
    for &x in &grids.inner {
        let l_v = generator::apply_generator(model, &spec, x, &grids.quad)?;
        sup = sup.max(l_v + f.eval(spec.eval(x)));
    }
    let lyap_c = sup.max(0.0);
    let lyap_radius = grids
        .radius
        .iter()
        .copied()
        .find(|&r| f.eval(1.0 + SmoothNorm::eval(r).powf(p)) > 2.0 * lyap_c);

    let parts = assemble(evidence, margin_required, lyap_c, lyap_radius);
    Ok(Certificate {
        case: case.index(),
        constant,
        p: Some(p),
        beta: None,
        zeta: None,
        kappa: None,
        tails: Some(tails),
        exp_constants: None,
        f: *f,
        margin: parts.margin,
        margin_required: parts.margin_required,
        evidence: parts.evidence,
        lyap_c: parts.lyap_c,
        lyap_radius: parts.lyap_radius,
        verdict: parts.verdict,
        notes: parts.notes,
    })
}

/// Certify the exponential pathway: drift condition for
/// `V = exp(beta φ^{1+zeta})` with rate function `f`, where `kappa` is
/// the drift growth exponent entering the scaling.
pub fn certify_exponential(
    model: &LevyTypeModel,
    beta: f64,
    zeta: f64,
    kappa: f64,
    f: &RateFn,
    grids: &CertGrids,
) -> Result<Certificate, CertError> {
    let exp_consts = exp_constant(model, beta, zeta, &grids.tail.x)?;
    let c5 = exp_consts.c5;

    let x_far = grids.x_far();
    let x_max = grids.outer.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    // f is probed on the V range of the inner edge of the evidence grid;
    // beyond that everything runs in log scale.
    let w_far = (beta * x_far.powf(1.0 + zeta)).exp();
    check_rate_shape(f, w_far, w_far * 4.0)?;
    if !(beta * x_max.powf(1.0 + zeta)).is_finite() {
        return Err(CertError::ExpPrecondition(format!(
            "beta={beta} overflows the Lyapunov exponent at |x|={x_max}"
        )));
    }

    let proxy = |x: f64| -> f64 {
        let ax = x.abs();
        let drift_part = beta * (1.0 + zeta) * model.drift_at(x) * x.signum() / ax.powf(kappa);
        let log_v = beta * ax.powf(1.0 + zeta);
        let rate_part = (f.log_eval_at_log(log_v) - log_exp_scaling(beta, zeta, kappa, x)).exp();
        drift_part + rate_part + c5
    };
    let evidence: Vec<EvidencePoint> =
        grids.outer.iter().map(|&x| EvidencePoint { x, proxy: proxy(x) }).collect();
    let margin_required = grids.margin_frac
        * (beta * (1.0 + zeta) * model.drift_at(x_far) / x_far.powf(kappa)).abs();

    let spec = LyapunovSpec::Exponential { beta, zeta };
    spec.validate()?;
    let mut sup = 0.0f64;
    for &x in &grids.inner {
        let l_v = generator::apply_generator(model, &spec, x, &grids.quad)?;
        sup = sup.max(l_v + f.log_eval_at_log(spec.log_eval(x)).exp());
    }
    let lyap_c = sup.max(0.0);
    let lyap_radius = grids.radius.iter().copied().find(|&r| {
        let log_v = spec.log_eval(r);
        // ln(1 + V) in a form stable for huge V.
        let log_arg = if log_v > 30.0 { log_v } else { (1.0 + log_v.exp()).ln() };
        f.log_eval_at_log(log_arg) > (2.0 * lyap_c).ln()
    });

    let parts = assemble(evidence, margin_required, lyap_c, lyap_radius);
    Ok(Certificate {
        case: 5,
        constant: c5,
        p: None,
        beta: Some(beta),
        zeta: Some(zeta),
        kappa: Some(kappa),
        tails: None,
        exp_constants: Some(exp_consts),
        f: *f,
        margin: parts.margin,
        margin_required: parts.margin_required,
        evidence: parts.evidence,
        lyap_c: parts.lyap_c,
        lyap_radius: parts.lyap_radius,
        verdict: parts.verdict,
        notes: parts.notes,
    })
}
