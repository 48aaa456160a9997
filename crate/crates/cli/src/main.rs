//! Command line front end: sampling, analytic tables and diagnostics.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;
use config::{CliError, Output};

#[derive(Parser)]
#[command(name = "padic-stable", version, about = "Stable Levy processes on the p-adic numbers")]
struct Cli {
    /// Master seed; path i uses the stream keyed by (seed, i).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ball probabilities, densities, Green function and h on a grid.
    Analytic(AnalyticArgs),
    /// Sample driver paths into path files.
    Sample(SampleArgs),
    /// Empirical against exact ball probabilities of Z(t).
    IncrementDist(IncrementDistArgs),
    /// Stochastic integral along a path file.
    Integrate(IntegrateArgs),
    /// Cell local times and the Hölder statistic.
    Localtime(LocaltimeArgs),
    /// Growth of the occupation measure of a ball.
    Recurrence(RecurrenceArgs),
    /// Finite or divergent occupation integrals of ‖y‖^e.
    ZeroOne(ZeroOneArgs),
    /// Finiteness of the time-change integral for a coefficient.
    CheckH(CheckHArgs),
    /// Solve dX = b(X-) dZ and compare solution laws.
    Sde(SdeArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    let out = Output::new(&cli.out_dir)?;
    match &cli.command {
        Command::Analytic(a) => analytic(cli.seed, &out, a),
        Command::Sample(a) => sample(cli.seed, &out, a),
        Command::IncrementDist(a) => increment_dist(cli.seed, &out, a),
        Command::Integrate(a) => integrate(cli.seed, &out, a),
        Command::Localtime(a) => localtime(cli.seed, &out, a),
        Command::Recurrence(a) => recurrence(cli.seed, &out, a),
        Command::ZeroOne(a) => zero_one(cli.seed, &out, a),
        Command::CheckH(a) => check_h(cli.seed, &out, a),
        Command::Sde(a) => sde(cli.seed, &out, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            // keep 2..5 for the documented configuration errors
            return ExitCode::from(64);
        }
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
