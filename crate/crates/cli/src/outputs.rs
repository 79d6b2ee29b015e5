//! Output artifacts. Every file embeds the fully resolved run config and
//! the seed (when the run had one), so any reported number can be
//! regenerated from the artifact alone.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ergodicity_core::certificates::Certificate;
use ergodicity_core::diagnostics::{RateComparison, TVCurve};
use ergodicity_core::simulator::ChainSample;
use serde::Serialize;

use crate::config::RunConfig;

/// Reproducibility header embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub config: RunConfig,
    pub seed: Option<u64>,
}

impl RunMeta {
    pub fn new(config: &RunConfig) -> Self {
        Self { config: config.clone(), seed: config.seed() }
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("cannot serialize report")?;
    text.push('\n');
    write_text(path, &text)
}

/// `# key: value` comment lines carrying the resolved config and seed,
/// ahead of any CSV column header.
fn csv_preamble(meta: &RunMeta) -> Result<String> {
    let config_line = serde_json::to_string(&meta.config).context("cannot serialize config")?;
    let mut out = String::new();
    writeln!(out, "# resolved_config: {config_line}")?;
    match meta.seed {
        Some(seed) => writeln!(out, "# seed: {seed}")?,
        None => writeln!(out, "# seed: none")?,
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct CertificateReport<'a> {
    pub meta: &'a RunMeta,
    pub certificate: &'a Certificate,
}

pub fn write_certificate(dir: &Path, meta: &RunMeta, certificate: &Certificate) -> Result<PathBuf> {
    let path = dir.join("certificate.json");
    write_json(&path, &CertificateReport { meta, certificate })?;
    Ok(path)
}

/// `(t, psi, ln psi)` rows over the requested horizons, tagged with the
/// closed-form decay family.
pub fn write_rate_csv(
    dir: &Path,
    meta: &RunMeta,
    family: &str,
    rows: &[(f64, f64, f64)],
) -> Result<PathBuf> {
    let path = dir.join("rate.csv");
    let mut out = csv_preamble(meta)?;
    writeln!(out, "# family: {family}")?;
    writeln!(out, "t,psi,log_psi")?;
    for (t, psi, log_psi) in rows {
        writeln!(out, "{t},{psi},{log_psi}")?;
    }
    write_text(&path, &out)?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct ChainReport<'a> {
    pub meta: &'a RunMeta,
    pub sample: &'a ChainSample,
}

/// Endpoint table plus a JSON sidecar with the run diagnostics.
pub fn write_chain(dir: &Path, meta: &RunMeta, sample: &ChainSample) -> Result<PathBuf> {
    let csv_path = dir.join("chain.csv");
    let mut out = csv_preamble(meta)?;
    writeln!(out, "replica,endpoint,replica_seed")?;
    for (i, (y, s)) in sample.endpoints.iter().zip(&sample.replica_seeds).enumerate() {
        writeln!(out, "{i},{y},{s}")?;
    }
    write_text(&csv_path, &out)?;
    write_json(&dir.join("chain.json"), &ChainReport { meta, sample })?;
    Ok(csv_path)
}

/// TV curve with bootstrap half-widths and the certified-rate overlay.
pub fn write_tv_curve(dir: &Path, meta: &RunMeta, curve: &TVCurve) -> Result<PathBuf> {
    let path = dir.join("tv_curve.csv");
    let mut out = csv_preamble(meta)?;
    writeln!(out, "# t_ref: {}", curve.t_ref)?;
    writeln!(out, "# reference_size: {}", curve.reference_size)?;
    match curve.reference_bias {
        Some(bias) => writeln!(out, "# reference_bias: {bias}")?,
        None => writeln!(out, "# reference_bias: none")?,
    }
    writeln!(out, "# bins: {}", curve.bins)?;
    writeln!(out, "t,tv,half_width,psi_overlay")?;
    for p in &curve.points {
        match p.psi_overlay {
            Some(overlay) => writeln!(out, "{},{},{},{overlay}", p.t, p.tv, p.half_width)?,
            None => writeln!(out, "{},{},{},", p.t, p.tv, p.half_width)?,
        }
    }
    write_text(&path, &out)?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct ComparisonReport<'a> {
    pub meta: &'a RunMeta,
    pub curve: &'a TVCurve,
    pub comparison: &'a RateComparison,
}

pub fn write_comparison(
    dir: &Path,
    meta: &RunMeta,
    curve: &TVCurve,
    comparison: &RateComparison,
) -> Result<PathBuf> {
    let path = dir.join("comparison.json");
    write_json(&path, &ComparisonReport { meta, curve, comparison })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ergodicity_core::diagnostics::TVPoint;

    fn meta() -> RunMeta {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
            "model": {
                "drift": {"kind": "power", "strength": 1.0, "exponent": 1.0},
                "kernel": {"kind": "stable", "intensity": 1.0, "alpha": 1.5}
            },
            "simulation": {"n": 10, "t": 1.0, "replicas": 4, "seed": 9, "x0": 0.0}
        }"#,
        )
        .unwrap();
        RunMeta::new(&cfg)
    }

    #[test]
    fn csv_artifacts_embed_config_and_seed() {
        let dir = std::env::temp_dir().join(format!("ergocheck-out-{}", std::process::id()));
        ensure_dir(&dir).unwrap();
        let meta = meta();
        let curve = TVCurve {
            points: vec![TVPoint { t: 1.0, tv: 0.5, half_width: 0.01, psi_overlay: Some(0.5) }],
            t_ref: 8.0,
            reference_size: 4,
            reference_bias: Some(0.01),
            bins: 2,
            bootstrap_resamples: 200,
        };
        let path = write_tv_curve(&dir, &meta, &curve).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# resolved_config: {"));
        assert!(text.contains("# seed: 9"));
        assert!(text.contains("t,tv,half_width,psi_overlay"));
        assert!(text.contains("1,0.5,0.01,0.5"));

        // The embedded config re-parses to the original.
        let line = text.lines().next().unwrap().trim_start_matches("# resolved_config: ");
        let parsed: RunConfig = serde_json::from_str(line).unwrap();
        assert_eq!(parsed, meta.config);

        std::fs::remove_dir_all(&dir).ok();
    }
}
