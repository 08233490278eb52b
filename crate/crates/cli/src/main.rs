//! `alloylab`: runs the verification experiments and reports CSV tables with a
//! pass/fail summary.
//!
//! Exit status: 0 when every asserted check passes, 2 when a check fails or is
//! inconclusive, 1 on usage, configuration or input errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use alloylab::config::FileConfig;
use alloylab::Error;

#[derive(Parser, Debug)]
#[command(name = "alloylab", version, about = "Numerical checks for discrete alloy-type random Schrödinger operators")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Model configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed; overrides the `seed` key of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads [default: $ALLOYLAB_THREADS, else all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the data table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write the check summary to this file.
    #[arg(long, global = true)]
    summary: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of one disorder sample on a cube.
    Spectrum(commands::SpectrumArgs),
    /// Schur complement and resolvent identities on random operators.
    GreenIdentities(commands::IdentityArgs),
    /// Averaging inequalities on random matrix instances.
    Averaging(commands::AveragingArgs),
    /// Fractional moments from one site and their coupling trend.
    Moments(commands::MomentsArgs),
    /// One-dimensional fractional-moment decay against the explicit bound.
    Decay(commands::DecayArgs),
    /// Boundary sum of the finite-volume criterion along a coupling ladder.
    FiniteVolume(commands::FiniteVolumeArgs),
    /// Eigenvalue counts against the Wegner bound, and interval linearity.
    Wegner(commands::WegnerArgs),
    /// Leading generating-function derivative and uniform positivity.
    Poscomb(commands::PoscombArgs),
    /// Probability that one of two distant cubes is regular.
    Regularity(commands::RegularityArgs),
    /// Gaussian conditional laws and the bounded-support counterexample.
    Conditional(commands::ConditionalArgs),
    /// Non-local a-priori bound for potentials with non-zero mean.
    Apriori(commands::AprioriArgs),
}

/// Errors split by exit status.
pub enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconclusive(_) | Error::SearchFailed(_) => Failure::Check(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

pub struct Context {
    pub config: Option<FileConfig>,
    pub seed: Option<u64>,
}

impl Context {
    pub fn model_config(&self) -> Result<&FileConfig, Failure> {
        self.config.as_ref().ok_or_else(|| Failure::Usage("this subcommand needs --config".into()))
    }

    pub fn seed(&self) -> Result<u64, Failure> {
        self.seed.ok_or_else(|| Failure::Usage("a seed is required (--seed or `seed` in the configuration)".into()))
    }
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("ALLOYLAB_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Failure::Usage(format!("ALLOYLAB_THREADS='{v}' is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    if let Some(n) = threads(cli.global.threads)? {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let config = cli.global.config.as_deref().map(FileConfig::load).transpose()?;
    let seed = cli.global.seed.or(config.as_ref().and_then(|c| c.seed));
    let ctx = Context { config, seed };
    let report = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(&ctx, a)?,
        Command::GreenIdentities(a) => commands::green_identities(&ctx, a)?,
        Command::Averaging(a) => commands::averaging(&ctx, a)?,
        Command::Moments(a) => commands::moments(&ctx, a)?,
        Command::Decay(a) => commands::decay(&ctx, a)?,
        Command::FiniteVolume(a) => commands::finite_volume(&ctx, a)?,
        Command::Wegner(a) => commands::wegner(&ctx, a)?,
        Command::Poscomb(a) => commands::poscomb(&ctx, a)?,
        Command::Regularity(a) => commands::regularity(&ctx, a)?,
        Command::Conditional(a) => commands::conditional(&ctx, a)?,
        Command::Apriori(a) => commands::apriori(&ctx, a)?,
    };
    report.emit(cli.global.out.as_deref(), cli.global.summary.as_deref()).map_err(|e| Failure::Usage(format!("writing output: {e}")))?;
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Check(msg)) => {
            eprintln!("alloylab: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("alloylab: {msg}");
            ExitCode::from(1)
        }
    }
}
