use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ergodicity_cli::config::RunConfig;
use ergodicity_cli::{
    cmd_certify, cmd_converge, cmd_rate, cmd_report, cmd_simulate, Overrides, EXIT_ERROR,
};

/// Certify ergodicity of one-dimensional jump-diffusion models via
/// Lyapunov drift conditions, tabulate the certified convergence rates,
/// and validate them against simulated total-variation decay.
#[derive(Parser)]
#[command(name = "ergocheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides the simulation block's seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replica simulation (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides { out: self.out.clone(), seed: self.seed, threads: self.threads }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the Lyapunov drift condition and write certificate.json.
    Certify(CommonArgs),
    /// Tabulate the convergence-rate function psi into rate.csv.
    Rate(CommonArgs),
    /// Simulate endpoint samples of the approximating chain.
    Simulate(CommonArgs),
    /// Estimate the empirical TV curve and compare it with the certified rate.
    Converge(CommonArgs),
    /// Summarize the artifacts in the output directory.
    Report(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&RunConfig, &Overrides) -> anyhow::Result<u8>) =
        match &cli.command {
            Command::Certify(a) => (a, cmd_certify),
            Command::Rate(a) => (a, cmd_rate),
            Command::Simulate(a) => (a, cmd_simulate),
            Command::Converge(a) => (a, cmd_converge),
            Command::Report(a) => (a, cmd_report),
        };
    match RunConfig::from_path(&args.config).and_then(|cfg| run(&cfg, &args.overrides())) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
