use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spinlock_cli::{
    load_config, resolve_threads, run_with_threads, CliError, Experiment, Overrides, RunConfig,
};
use spinlock_core::lockin::ContrastIntegrand;

#[derive(Parser)]
#[command(
    name = "spinlock",
    version,
    about = "Squeezing-enhanced quantum lock-in sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config file.
    Run(Common),
    /// Fringe contrast versus arming time.
    Contrast(Common),
    /// Sensitivity versus sequence duration.
    Sensitivity(Common),
    /// Four-pulse sequence against its effective one-axis twist.
    VerifyBch(Common),
    /// Closed-form moments next to exact Dicke-space evolution.
    OracleCompare(Common),
    /// Time trace of one noise realisation.
    NoisePreview(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegrandArg {
    Ramsey,
    Eq23,
}

#[derive(Args)]
struct Common {
    /// JSON config; built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Worker threads (speed only). Falls back to SPINLOCK_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Ignore the π-pulse sign flips when accumulating phase.
    #[arg(long)]
    no_toggle: bool,
    #[arg(long, value_enum)]
    contrast_integrand: Option<IntegrandArg>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<String>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (experiment, common) = match cli.command {
        Command::Run(c) => (None, c),
        Command::Contrast(c) => (Some(Experiment::Contrast), c),
        Command::Sensitivity(c) => (Some(Experiment::Sensitivity), c),
        Command::VerifyBch(c) => (Some(Experiment::VerifyBch), c),
        Command::OracleCompare(c) => (Some(Experiment::OracleCompare), c),
        Command::NoisePreview(c) => (Some(Experiment::NoisePreview), c),
    };
    let mut cfg = match (&common.config, experiment) {
        (Some(path), _) => load_config(path)?,
        (None, Some(e)) => RunConfig::with_defaults(e),
        (None, None) => return Err(CliError::validation("config", "`run` requires --config")),
    };
    let overrides = Overrides {
        experiment,
        seed: common.seed,
        samples: common.samples,
        no_toggle: common.no_toggle,
        contrast_integrand: common.contrast_integrand.map(|i| match i {
            IntegrandArg::Ramsey => ContrastIntegrand::Ramsey,
            IntegrandArg::Eq23 => ContrastIntegrand::Eq23,
        }),
        output: common.output,
    };
    overrides.apply(&mut cfg)?;
    let threads = resolve_threads(common.threads)?;
    let table = run_with_threads(&cfg, threads)?;
    table.write(cfg.output.format, cfg.output.path.as_deref())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
