//! Frozen-coefficient jump-chain simulation.
//!
//! One chain step from state `x` over time `h` draws from the Lévy
//! increment law with coefficients frozen at `x`: the deterministic drift
//! `a(x) h`, a compound-Poisson batch of jumps of size `>= eps`, and a
//! centered Gaussian substituting the jumps below `eps` (matched to their
//! second moment; the compensator vanishes by kernel symmetry). Iterating
//! the step approximates the process on a grid of mesh `1/n`.
//!
//! Reproducibility contract: every replica owns a counter-based RNG
//! stream derived from `(seed, replica index)`, and each step consumes
//! randomness in a fixed order — Poisson count, then one `(sign, size)`
//! pair per jump, then the Gaussian. Identical `(seed, config, model)`
//! produce identical output bit for bit.

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{LyapunovSpec, TestFunction};
use crate::kernel::{Coef, KernelError, KernelFamily, LevyTypeModel};
use crate::quad::{self, QuadConfig, QuadError};
use crate::series;
use crate::stats;

#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("sampler does not support this kernel: {0}")]
    UnsupportedKernel(String),
    #[error("state explosion in replica {replica} at step {step}: |state| = {state:e}")]
    Explosion { replica: u32, step: u64, state: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Chain-simulation parameters. `steps_per_unit` is the number of chain
/// steps per unit of process time (mesh `1/n`), `horizon` the time span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(rename = "n")]
    pub steps_per_unit: u32,
    #[serde(rename = "t")]
    pub horizon: f64,
    pub replicas: u32,
    /// Small-jump cutoff; defaults to `sqrt(1/n)` clamped to `[1e-4, 1]`.
    #[serde(default)]
    pub eps: Option<f64>,
    pub seed: u64,
    pub x0: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.steps_per_unit == 0 {
            return Err(SimError::InvalidConfig(String::from("steps per unit time must be >= 1")));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SimError::InvalidConfig(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.step_count() < 1 {
            return Err(SimError::InvalidConfig(format!(
                "floor(n t) = floor({} * {}) < 1: horizon shorter than one step",
                self.steps_per_unit, self.horizon
            )));
        }
        if self.replicas == 0 {
            return Err(SimError::InvalidConfig(String::from("replica count must be >= 1")));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(SimError::InvalidConfig(format!("eps must lie in (0, 1], got {eps}")));
            }
        }
        if !self.x0.is_finite() {
            return Err(SimError::InvalidConfig(format!("start state must be finite, got {}", self.x0)));
        }
        Ok(())
    }

    pub fn step_size(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }

    pub fn step_count(&self) -> u64 {
        (self.steps_per_unit as f64 * self.horizon).floor() as u64
    }

    pub fn eps_value(&self) -> f64 {
        self.eps.unwrap_or_else(|| self.step_size().sqrt().clamp(1e-4, 1.0))
    }
}

/// Batch of simulated endpoints with reproducibility metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    pub endpoints: Vec<f64>,
    pub replica_seeds: Vec<u64>,
    pub config: SimConfig,
    pub diagnostics: SampleDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    /// Jumps per replica path, averaged over replicas.
    pub mean_jump_count: f64,
    /// Variance of the per-step Gaussian substitution at the start state.
    pub gauss_step_variance_x0: f64,
    /// Resolved small-jump cutoff.
    pub eps: f64,
}

/// The classic 64-bit mix; advances `state` by the golden-ratio constant
/// and returns the next output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn replica_seed(seed: u64, replica: u32) -> u64 {
    let mut state = seed.wrapping_add((replica as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(&mut state)
}

/// Decorrelated child seed for a named sub-experiment (reference run,
/// per-horizon run, bootstrap): distinct salts give independent streams
/// while everything stays a pure function of the master seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut state = seed ^ salt.wrapping_mul(0xA076_1D64_78BD_642F);
    splitmix64(&mut state)
}

/// Per-replica RNG: a dedicated seed from the splitmix sequence plus a
/// distinct ChaCha stream, so replicas are independent and can run on any
/// schedule.
pub fn replica_rng(seed: u64, replica: u32) -> (u64, ChaCha12Rng) {
    let derived = replica_seed(seed, replica);
    let mut rng = ChaCha12Rng::seed_from_u64(derived);
    rng.set_stream(replica as u64);
    (derived, rng)
}

/// One sampled chain increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub value: f64,
    pub jumps: u64,
}

/// Tabulated inverse CDF of the normalized jump-size law above `eps`,
/// linear in `ln v` between knots.
#[derive(Debug, Clone)]
struct CdfTable {
    log_v: Vec<f64>,
    cdf: Vec<f64>,
}

impl CdfTable {
    fn sample(&self, u01: f64) -> f64 {
        let n = self.cdf.len();
        if u01 <= self.cdf[0] {
            return self.log_v[0].exp();
        }
        if u01 >= self.cdf[n - 1] {
            return self.log_v[n - 1].exp();
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf[mid] <= u01 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let span = self.cdf[hi] - self.cdf[lo];
        let frac = if span > 0.0 { (u01 - self.cdf[lo]) / span } else { 0.0 };
        (self.log_v[lo] + frac * (self.log_v[hi] - self.log_v[lo])).exp()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    /// No jumps at all: the chain is the deterministic Euler recursion.
    Zero,
    /// Power-law kernel: jump rate, sizes, and substitution variance are
    /// all closed-form, including state-dependent coefficients.
    Stable,
    /// Tempered kernel with constant stability index: sizes come from a
    /// precomputed inverse-CDF table; the intensity only scales the rate.
    Tempered { mass0: f64, var0: f64, table: CdfTable },
}

/// Increment sampler with per-kernel precomputation hoisted out of the
/// step loop. Holds only shared read-only state, so one instance serves
/// all replicas concurrently.
#[derive(Debug, Clone)]
pub struct IncrementSampler<'m> {
    model: &'m LevyTypeModel,
    eps: f64,
    kind: Kind,
}

const TABLE_POINTS: usize = 1024;

impl<'m> IncrementSampler<'m> {
    pub fn new(model: &'m LevyTypeModel, eps: f64, cfg: &QuadConfig) -> Result<Self, SimError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(SimError::InvalidConfig(format!("eps must lie in (0, 1], got {eps}")));
        }
        let kind = if model.kernel.intensity_is_zero() {
            Kind::Zero
        } else {
            match &model.kernel.family {
                KernelFamily::StableLike { .. } => Kind::Stable,
                KernelFamily::Tempered { alpha, theta, zeta, .. } => {
                    let alpha = match alpha {
                        Coef::Const(a) => *a,
                        _ => {
                            return Err(SimError::UnsupportedKernel(String::from(
                                "tempered kernels with state-dependent stability index would need one size table per state",
                            )))
                        }
                    };
                    let (table, mass0, var0) = build_tempered_table(alpha, *theta, *zeta, eps, cfg)?;
                    Kind::Tempered { mass0, var0, table }
                }
            }
        };
        Ok(Self { model, eps, kind })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn model(&self) -> &LevyTypeModel {
        self.model
    }

    /// `(jump rate above eps, Gaussian substitution variance)` per unit
    /// time, with coefficients frozen at `x`.
    pub fn rates_at(&self, x: f64) -> (f64, f64) {
        match &self.kind {
            Kind::Zero => (0.0, 0.0),
            Kind::Stable => {
                let c = self.model.kernel.intensity(x);
                let alpha = self.model.kernel.alpha(x);
                let rate = 2.0 * c * self.eps.powf(-alpha) / alpha;
                let var = 2.0 * c * self.eps.powf(2.0 - alpha) / (2.0 - alpha);
                (rate, var)
            }
            Kind::Tempered { mass0, var0, .. } => {
                let c = self.model.kernel.intensity(x);
                (2.0 * c * mass0, c * var0)
            }
        }
    }

    /// Jump magnitude by inverse transform from the normalized size law
    /// above `eps` at state `x`; `u01` is a uniform draw in `[0, 1)`.
    pub fn jump_size(&self, x: f64, u01: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Stable => {
                let alpha = self.model.kernel.alpha(x);
                // P(size > v) = (v / eps)^{-alpha}; map 1 - u01 into (0, 1].
                self.eps * (1.0 - u01).powf(-1.0 / alpha)
            }
            Kind::Tempered { table, .. } => table.sample(u01),
        }
    }

    /// One frozen-coefficient increment over time `h` from state `x`.
    pub fn draw<R: Rng + ?Sized>(&self, x: f64, h: f64, rng: &mut R) -> Increment {
        let mut value = self.model.drift_at(x) * h;
        let mut jumps = 0u64;
        if matches!(self.kind, Kind::Zero) {
            return Increment { value, jumps };
        }
        let (rate, var) = self.rates_at(x);
        let mean_jumps = rate * h;
        if mean_jumps > 0.0 {
            let pois = Poisson::new(mean_jumps).expect("positive finite Poisson mean");
            let count: f64 = pois.sample(rng);
            jumps = count as u64;
            for _ in 0..jumps {
                let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
                let size = self.jump_size(x, rng.random::<f64>());
                value += sign * size;
            }
        }
        let step_var = var * h;
        if step_var > 0.0 {
            let normal = Normal::new(0.0, step_var.sqrt()).expect("finite std dev");
            value += normal.sample(rng);
        }
        Increment { value, jumps }
    }
}

/// Build the per-side size table for a tempered kernel at unit intensity:
/// suffix sums of `u^{-1-alpha} exp(-theta u^{1+zeta})` over a log grid.
fn build_tempered_table(
    alpha: f64,
    theta: f64,
    zeta: f64,
    eps: f64,
    cfg: &QuadConfig,
) -> Result<(CdfTable, f64, f64), SimError> {
    let dens = |u: f64| u.powf(-1.0 - alpha) * (-theta * u.powf(1.0 + zeta)).exp();
    // Substitution variance over both sides of the small-jump region.
    let var0 = 2.0
        * quad::integrate_power_singular(
            |u| (-theta * u.powf(1.0 + zeta)).exp(),
            alpha,
            eps,
            cfg,
        )?
        .value;

    // Truncation point: tail mass negligible against the mass above eps.
    let mass_from_eps = quad::integrate_to_inf(dens, eps, cfg)?.value;
    let mut v_max = 2.0 * eps;
    for _ in 0..200 {
        let tail = quad::integrate_to_inf(dens, v_max, cfg)?.value;
        if tail < 1e-14 * mass_from_eps {
            break;
        }
        v_max *= 2.0;
    }

    let log_lo = eps.ln();
    let log_hi = v_max.ln();
    let mut log_v = Vec::with_capacity(TABLE_POINTS);
    for j in 0..TABLE_POINTS {
        log_v.push(log_lo + (log_hi - log_lo) * j as f64 / (TABLE_POINTS - 1) as f64);
    }
    // Suffix tail masses m_j = nu((v_j, inf)), assembled from panel
    // increments so adjacent knots stay consistent.
    let mut tail_mass = alloc::vec![0.0f64; TABLE_POINTS];
    tail_mass[TABLE_POINTS - 1] = quad::integrate_to_inf(dens, v_max, cfg)?.value;
    for j in (0..TABLE_POINTS - 1).rev() {
        let inc = quad::integrate(dens, log_v[j].exp(), log_v[j + 1].exp(), cfg)?.value;
        tail_mass[j] = tail_mass[j + 1] + inc;
    }
    let mass0 = tail_mass[0];
    let cdf: Vec<f64> = tail_mass.iter().map(|m| (1.0 - m / mass0).clamp(0.0, 1.0)).collect();
    Ok((CdfTable { log_v, cdf }, mass0, var0))
}

/// Convenience wrapper: build a sampler and draw once. Inside loops,
/// build [`IncrementSampler`] once instead — table construction dominates
/// for tempered kernels.
pub fn sample_increment<R: Rng + ?Sized>(
    model: &LevyTypeModel,
    x: f64,
    h: f64,
    eps: f64,
    rng: &mut R,
) -> Result<f64, SimError> {
    let sampler = IncrementSampler::new(model, eps, &QuadConfig::default())?;
    Ok(sampler.draw(x, h, rng).value)
}

const EXPLOSION_BOUND: f64 = 1e300;

/// Run one replica to its endpoint. Public so alternative runners
/// (thread pools) can fan replicas out; the result depends only on
/// `(sampler, cfg, replica)`.
pub fn simulate_replica(
    sampler: &IncrementSampler,
    cfg: &SimConfig,
    replica: u32,
) -> Result<(f64, u64), SimError> {
    let (_, mut rng) = replica_rng(cfg.seed, replica);
    let h = cfg.step_size();
    let mut y = cfg.x0;
    let mut jumps = 0u64;
    for step in 0..cfg.step_count() {
        let inc = sampler.draw(y, h, &mut rng);
        y += inc.value;
        jumps += inc.jumps;
        if !y.is_finite() || y.abs() > EXPLOSION_BOUND {
            return Err(SimError::Explosion { replica, step, state: y });
        }
    }
    Ok((y, jumps))
}

/// Strategy for executing the replica fan-out.
pub trait ChainRunner {
    fn run(&self, sampler: &IncrementSampler, cfg: &SimConfig) -> Result<Vec<(f64, u64)>, SimError>;
}

/// Replicas in index order on the calling thread.
pub struct SequentialRunner;

impl ChainRunner for SequentialRunner {
    fn run(&self, sampler: &IncrementSampler, cfg: &SimConfig) -> Result<Vec<(f64, u64)>, SimError> {
        (0..cfg.replicas).map(|i| simulate_replica(sampler, cfg, i)).collect()
    }
}

/// Simulate all replicas with a caller-supplied execution strategy.
pub fn simulate_chain_with(
    model: &LevyTypeModel,
    cfg: &SimConfig,
    runner: &dyn ChainRunner,
) -> Result<ChainSample, SimError> {
    cfg.validate()?;
    let sampler = IncrementSampler::new(model, cfg.eps_value(), &QuadConfig::default())?;
    let raw = runner.run(&sampler, cfg)?;
    let endpoints: Vec<f64> = raw.iter().map(|r| r.0).collect();
    let total_jumps: u64 = raw.iter().map(|r| r.1).sum();
    let replica_seeds: Vec<u64> = (0..cfg.replicas).map(|i| replica_seed(cfg.seed, i)).collect();
    let diagnostics = SampleDiagnostics {
        mean_jump_count: total_jumps as f64 / cfg.replicas as f64,
        gauss_step_variance_x0: sampler.rates_at(cfg.x0).1 * cfg.step_size(),
        eps: sampler.eps(),
    };
    Ok(ChainSample { endpoints, replica_seeds, config: cfg.clone(), diagnostics })
}

/// Simulate all replicas sequentially.
pub fn simulate_chain(model: &LevyTypeModel, cfg: &SimConfig) -> Result<ChainSample, SimError> {
    simulate_chain_with(model, cfg, &SequentialRunner)
}

/// Monte-Carlo estimate of a functional of the endpoint law: replica mean
/// of `u` and its standard error.
pub fn monte_carlo_functional(
    model: &LevyTypeModel,
    u: &dyn Fn(f64) -> f64,
    cfg: &SimConfig,
) -> Result<(f64, f64), SimError> {
    let sample = simulate_chain(model, cfg)?;
    let vals: Vec<f64> = sample.endpoints.iter().map(|&y| u(y)).collect();
    Ok((stats::mean(&vals), stats::std_error(&vals)))
}

/// One-step drift estimate with confidence data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEstimate {
    /// Monte-Carlo estimate of `E_x V(Y_1) - V(x)` for one step of span `h`.
    pub value: f64,
    /// Nominal 95% half-width from the normal approximation.
    pub half_width: f64,
    /// Warning: sample kurtosis indicates heavy tails, so the nominal
    /// interval should be treated as wider than reported.
    pub widened: bool,
    pub excess_kurtosis: f64,
}

/// Empirical one-step Lyapunov drift at `x`: confirms the discrete drift
/// inequality implied by a certificate. Requires `|x| >= 1` (the
/// certificate's statement region) and an integrable `V`.
pub fn empirical_skeleton_drift(
    model: &LevyTypeModel,
    spec: &LyapunovSpec,
    x: f64,
    h: f64,
    replicas: u32,
    seed: u64,
) -> Result<DriftEstimate, SimError> {
    if !(x.abs() >= 1.0) {
        return Err(SimError::InvalidConfig(format!(
            "drift confirmation applies outside the unit ball; got x = {x}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(SimError::InvalidConfig(format!("step span must be positive, got {h}")));
    }
    if replicas < 2 {
        return Err(SimError::InvalidConfig(String::from("need at least 2 replicas")));
    }
    if !model.kernel.intensity_is_zero() {
        match spec {
            LyapunovSpec::Polynomial { p } => {
                if let Some(idx) = model.kernel.declared {
                    if *p >= idx.sigma {
                        return Err(SimError::InvalidConfig(format!(
                            "V = phi^{p} is not integrable against tails of lower index {}",
                            idx.sigma
                        )));
                    }
                }
            }
            LyapunovSpec::Exponential { .. } => {
                if model.kernel.exp_envelope().is_none() {
                    return Err(SimError::InvalidConfig(String::from(
                        "exponential V needs a kernel with exponential moments",
                    )));
                }
            }
        }
    }

    let eps = h.sqrt().clamp(1e-4, 1.0);
    let sampler = IncrementSampler::new(model, eps, &QuadConfig::default())?;
    let v0 = spec.eval(x);
    let mut vals = Vec::with_capacity(replicas as usize);
    for i in 0..replicas {
        let (_, mut rng) = replica_rng(seed, i);
        let y = x + sampler.draw(x, h, &mut rng).value;
        vals.push(spec.eval(y));
    }
    let value = stats::mean(&vals) - v0;
    let half_width = 1.96 * stats::std_error(&vals);
    let excess_kurtosis = stats::excess_kurtosis(&vals);
    let widened = excess_kurtosis > 10.0;
    Ok(DriftEstimate { value, half_width, widened, excess_kurtosis })
}

/// Characteristic exponent of the frozen-coefficient increment law:
/// `q(x, xi) = -i a(x) xi + 2 ∫_0^∞ (1 - cos(xi u)) dens(x, u) du`.
/// By kernel symmetry the integral is real, so the imaginary part is
/// exactly `-a(x) xi`.
pub fn char_exponent(
    model: &LevyTypeModel,
    x: f64,
    xi: f64,
    cfg: &QuadConfig,
) -> Result<Complex64, SimError> {
    if xi == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let im = -model.drift_at(x) * xi;
    if model.kernel.intensity_is_zero() {
        return Ok(Complex64::new(0.0, im));
    }
    let w = xi.abs();
    let kernel = &model.kernel;
    let alpha = kernel.alpha(x);

    // Summed Kronrod error estimates on long oscillatory stretches are
    // conservative and stack up with the panel count instead of shrinking:
    // for slowly decaying tails (alpha near 1) at low frequency they
    // plateau a few parts in 1e6 above the true error. The downstream
    // comparisons are Monte-Carlo grade, so cap the requested tolerance
    // there; the returned values are typically far more accurate.
    let osc_cfg = QuadConfig {
        rel_tol: cfg.rel_tol.max(1e-5),
        abs_tol: cfg.abs_tol.max(1e-8),
        max_panels: cfg.max_panels,
    };

    // (0, 1]: remove the u^{-1-alpha} singularity; the cosine factor is
    // O(u^2) there, so the reduced integrand is bounded.
    let inner = quad::integrate_power_singular(
        |u| (1.0 - (w * u).cos()) * 2.0 * kernel.density_prefactor(x, u) / (u * u),
        alpha,
        1.0,
        &osc_cfg,
    )?
    .value;
    let outer = match kernel.exp_envelope() {
        Some(_) => {
            quad::integrate_to_inf(
                |u| (1.0 - (w * u).cos()) * 2.0 * kernel.density(x, u),
                1.0,
                &osc_cfg,
            )?
            .value
        }
        None => {
            // Pure power tail: quadrature out to where the integration-by-
            // parts expansion of the cosine tail takes over.
            let u_osc = (80.0 / w).max(1.0);
            let mut mid = 0.0;
            if u_osc > 1.0 {
                mid = quad::integrate(
                    |u| (1.0 - (w * u).cos()) * 2.0 * kernel.density(x, u),
                    1.0,
                    u_osc,
                    &osc_cfg,
                )?
                .value;
            }
            let c = kernel.intensity(x);
            let (osc, _) = series::oscillatory_power_tail(w, alpha, u_osc);
            mid + 2.0 * c * (u_osc.powf(-alpha) / alpha - osc)
        }
    };

    Ok(Complex64::new(inner + outer, im))
}
