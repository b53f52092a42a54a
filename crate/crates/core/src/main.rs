use clap::{Args, Parser, Subcommand};
use qcurv::config::{config_digest, parse_config};
use qcurv::error::{Error, Result};
use qcurv::runner::{exit_code_for_error, run_command, CommandKind, RunOutput};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical laboratory for the fractional prescribed-curvature equation on
/// the round sphere.
#[derive(Parser)]
#[command(name = "qcurv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate eigenvalues of the conformal operator
    Spectrum(RunArgs),
    /// Sweep the bubble PDE residual over truncation degrees
    BubbleResidual(RunArgs),
    /// Calibrate the expansion constants and check their fit quality
    ExpansionVerify(RunArgs),
    /// Run the normalized gradient flow of the curvature functional
    Flow(RunArgs),
    /// Locate critical points of K and evaluate the existence verdicts
    Existence(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config `out` key)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config `seed` key)
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary line
    #[arg(long)]
    quiet: bool,
}

fn execute(kind: CommandKind, args: &RunArgs) -> Result<RunOutput> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        Error::Config(vec![format!(
            "cannot read config '{}': {e}",
            args.config.display()
        )])
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("qcurv-out"));
    run_command(kind, &cfg, &config_digest(&text), &out_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
        Command::BubbleResidual(a) => (CommandKind::BubbleResidual, a),
        Command::ExpansionVerify(a) => (CommandKind::ExpansionVerify, a),
        Command::Flow(a) => (CommandKind::Flow, a),
        Command::Existence(a) => (CommandKind::Existence, a),
    };
    match execute(kind, args) {
        Ok(out) => {
            if !args.quiet {
                println!("{}", out.summary);
                for path in &out.artifacts {
                    println!("  wrote {}", path.display());
                }
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(exit_code_for_error(&e) as u8)
        }
    }
}
