//! Command layer: each subcommand loads a [`config::RunConfig`], runs the
//! corresponding core pipeline stage, writes its artifacts, and maps the
//! outcome onto a fixed exit-code vocabulary.
//!
//! Exit codes: 0 success (certified / comparison passed), 1 error,
//! 2 drift condition not certified, 3 empirical decay contradicts the
//! certified rate, 4 comparison inconclusive (signal below noise).

pub mod config;
pub mod outputs;
pub mod parallel;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use ergodicity_core::certificates::Verdict;
use ergodicity_core::diagnostics::{convergence_curve, rate_comparison, ComparisonVerdict};
use ergodicity_core::simulator::simulate_chain_with;

use config::RunConfig;
use outputs::RunMeta;
use parallel::ParallelRunner;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_CERTIFIED: u8 = 2;
pub const EXIT_RATE_MISMATCH: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Fold the overrides into the config (the result is what gets embedded
/// in artifacts) and fix the output directory.
fn resolve(cfg: &RunConfig, ov: &Overrides) -> (RunConfig, PathBuf) {
    let mut cfg = cfg.clone();
    if let Some(seed) = ov.seed {
        if let Some(sim) = cfg.simulation.as_mut() {
            sim.seed = seed;
        }
    }
    if let Some(out) = &ov.out {
        cfg.output_dir = Some(out.clone());
    }
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("ergocheck-out"));
    (cfg, dir)
}

/// Check the drift condition described by the certificate block and write
/// `certificate.json`.
pub fn cmd_certify(cfg: &RunConfig, ov: &Overrides) -> Result<u8> {
    let (cfg, dir) = resolve(cfg, ov);
    let model = cfg.model()?;
    let resolved = cfg.certificate()?.check(&model)?;
    let cert = &resolved.certificate;

    outputs::ensure_dir(&dir)?;
    let path = outputs::write_certificate(&dir, &RunMeta::new(&cfg), cert)?;
    match cert.verdict {
        Verdict::Certified => {
            println!(
                "certified: case {} with constant {:.6}; margin {:.3e} >= required {:.3e}; \
                 drift offset {:.3e} inside radius {:.3e}; report {}",
                cert.case,
                cert.constant,
                cert.margin,
                cert.margin_required,
                cert.lyap_c,
                cert.lyap_radius.unwrap_or(f64::NAN),
                path.display()
            );
            Ok(EXIT_OK)
        }
        Verdict::NotCertified => {
            println!("not certified: {}; report {}", cert.notes.join("; "), path.display());
            Ok(EXIT_NOT_CERTIFIED)
        }
    }
}

/// Tabulate the decay function `psi` on the configured time grid and
/// write `rate.csv`.
pub fn cmd_rate(cfg: &RunConfig, ov: &Overrides) -> Result<u8> {
    let (cfg, dir) = resolve(cfg, ov);
    let rate_block = cfg.rate.clone().unwrap_or_default();
    let f = match &rate_block.f {
        Some(rc) => rc.explicit().context(
            "rate.f must be an explicit function; drift-derived rates are configured \
             through the certificate block",
        )?,
        None => {
            let model = cfg.model()?;
            cfg.certificate()
                .context("give either rate.f or a certificate block naming the rate")?
                .resolve_rate(&model)?
        }
    };
    let plan = config::rate_plan(f, rate_block.gamma)?;
    let ts = rate_block.t_grid.build()?;

    let horizon = plan.gamma * ts.last().copied().unwrap_or(0.0);
    let sup = plan.f.sup_big_f();
    if horizon >= sup {
        bail!(
            "this rate function makes the time change F bounded (sup F = {sup:.6}), so psi \
             is undefined from t = {:.6} on and certifies no decay there; use an exponent \
             q < 1 or shorten the time grid (largest requested gamma*t = {horizon:.6})",
            sup / plan.gamma
        );
    }

    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        rows.push((t, plan.psi(t)?, plan.log_psi(t)?));
    }
    outputs::ensure_dir(&dir)?;
    let path = outputs::write_rate_csv(&dir, &RunMeta::new(&cfg), plan.f.family_tag(), &rows)?;
    println!(
        "rate table: {} rows over [{}, {}], family {}, written to {}",
        rows.len(),
        ts.first().unwrap(),
        ts.last().unwrap(),
        plan.f.family_tag(),
        path.display()
    );
    Ok(EXIT_OK)
}

/// Simulate endpoint samples of the approximating chain and write
/// `chain.csv` / `chain.json`.
pub fn cmd_simulate(cfg: &RunConfig, ov: &Overrides) -> Result<u8> {
    let (cfg, dir) = resolve(cfg, ov);
    let model = cfg.model()?;
    let sim = cfg.simulation()?;
    let runner = ParallelRunner::new(ov.threads)?;
    let sample = simulate_chain_with(&model, sim, &runner)?;

    outputs::ensure_dir(&dir)?;
    let path = outputs::write_chain(&dir, &RunMeta::new(&cfg), &sample)?;
    println!(
        "simulated {} replicas to t = {} (eps = {:.4}, mean jumps/path = {:.2}); {}",
        sim.replicas,
        sim.horizon,
        sample.diagnostics.eps,
        sample.diagnostics.mean_jump_count,
        path.display()
    );
    Ok(EXIT_OK)
}

/// Estimate the empirical TV curve against a long-horizon reference and
/// compare its decay with the certified rate; writes `tv_curve.csv` and
/// `comparison.json`.
pub fn cmd_converge(cfg: &RunConfig, ov: &Overrides) -> Result<u8> {
    let (cfg, dir) = resolve(cfg, ov);
    let model = cfg.model()?;
    let sim = cfg.simulation()?;
    let conv = cfg.convergence()?;

    let resolved = cfg.certificate()?.check(&model)?;
    if resolved.certificate.verdict != Verdict::Certified {
        eprintln!(
            "warning: drift condition not certified ({}); comparing against the candidate \
             rate anyway",
            resolved.certificate.notes.join("; ")
        );
    }
    let plan = config::rate_plan(resolved.plan_f, conv.gamma)?;

    let runner = ParallelRunner::new(ov.threads)?;
    let curve = convergence_curve(&model, sim, &conv.t_grid, conv.t_ref, Some(&plan), &runner)?;
    let comparison = rate_comparison(&curve, &plan, conv.tolerance_factor)?;

    outputs::ensure_dir(&dir)?;
    let meta = RunMeta::new(&cfg);
    let curve_path = outputs::write_tv_curve(&dir, &meta, &curve)?;
    outputs::write_comparison(&dir, &meta, &curve, &comparison)?;

    println!(
        "comparison: {:?}; fitted exponent {:.4} vs predicted {:.4} ({} of {} points above \
         the noise floor {:.4}); curve {}",
        comparison.verdict,
        comparison.fitted_exponent,
        comparison.predicted_exponent,
        comparison.points_used,
        comparison.points_total,
        comparison.noise_floor,
        curve_path.display()
    );
    Ok(match comparison.verdict {
        ComparisonVerdict::Pass => EXIT_OK,
        ComparisonVerdict::Fail => EXIT_RATE_MISMATCH,
        ComparisonVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

/// Summarize the artifacts in the output directory into `report.txt`.
pub fn cmd_report(cfg: &RunConfig, ov: &Overrides) -> Result<u8> {
    use std::fmt::Write as _;

    let (_cfg, dir) = resolve(cfg, ov);
    let mut text = String::new();
    let mut found = 0usize;

    let cert_path = dir.join("certificate.json");
    if cert_path.exists() {
        found += 1;
        let value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&cert_path)?)
                .with_context(|| format!("cannot parse {}", cert_path.display()))?;
        let cert = &value["certificate"];
        writeln!(
            text,
            "certificate: verdict {}, case {}, constant {}, margin {} (required {})",
            cert["verdict"], cert["case"], cert["constant"], cert["margin"],
            cert["margin_required"]
        )?;
    }
    let cmp_path = dir.join("comparison.json");
    if cmp_path.exists() {
        found += 1;
        let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cmp_path)?)
            .with_context(|| format!("cannot parse {}", cmp_path.display()))?;
        let cmp = &value["comparison"];
        writeln!(
            text,
            "comparison: verdict {}, family {}, fitted {} vs predicted {} ({})",
            cmp["verdict"], cmp["family"], cmp["fitted_exponent"], cmp["predicted_exponent"],
            cmp["note"]
        )?;
        if let Some(points) = value["curve"]["points"].as_array() {
            writeln!(text, "tv curve: {} points", points.len())?;
            for p in points {
                writeln!(
                    text,
                    "  t = {:>8}: tv = {} +- {}",
                    p["t"], p["tv"], p["half_width"]
                )?;
            }
        }
    }
    for name in ["chain.json", "rate.csv", "tv_curve.csv"] {
        let path = dir.join(name);
        if path.exists() {
            found += 1;
            writeln!(text, "artifact: {}", path.display())?;
        }
    }

    if found == 0 {
        bail!("no artifacts found under {}; run certify/rate/simulate/converge first", dir.display());
    }
    print!("{text}");
    std::fs::write(dir.join("report.txt"), &text)
        .with_context(|| format!("cannot write report under {}", dir.display()))?;
    Ok(EXIT_OK)
}
