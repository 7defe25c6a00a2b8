//! `fracpq` — eigenvalue studies of the fractional p&q-Laplacian on 1D
//! domains: solvers, certificates and parameter sweeps with reproducible
//! CSV/JSON outputs.

mod commands;
mod config;
mod csvio;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Ctx};

#[derive(Parser)]
#[command(name = "fracpq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration (for `report`: a manifest.json)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's output.dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// First eigenvalue of the mu = 0 problem by projected descent
    Lambda1(Common),
    /// Second eigenvalue via the odd-path minimax
    Lambda2(Common),
    /// Dense generalized eigensolve at p = 2
    Oracle(Common),
    /// Nehari level minimization for mu > 0 at the configured lambda
    Nehari(Common),
    /// Ray nonexistence certificate at the configured lambda
    Certify(Common),
    /// Nehari levels over a decreasing mu grid
    #[command(name = "mu-sweep")]
    MuSweep(Common),
    /// First-eigenvalue stability as s -> 1 on coupled meshes
    #[command(name = "s-sweep")]
    SSweep(Common),
    /// Seminorm-limit check against the local gradient energy
    Bbm(Common),
    /// Quotient decay along the ground-state ray (mu > 0)
    Decay(Common),
    /// Local (s = 1) reference eigenvalue
    Local(Common),
    /// Deterministic summary of an existing manifest
    Report(Common),
}

fn thread_pool_size(config_workers: usize) -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let wanted = if config_workers > 0 { config_workers } else { hw };
    let cap = std::env::var("FRACPQ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(hw);
    wanted.min(cap).max(1)
}

fn dispatch(common: &Common, name: &'static str, run: fn(&Ctx) -> Result<(), CliError>) -> Result<(), CliError> {
    let config = config::load_config(&common.config).map_err(CliError::Validation)?;
    let pool = thread_pool_size(config.solver.workers);
    let _ = rayon::ThreadPoolBuilder::new().num_threads(pool).build_global();
    let ctx = Ctx::new(config, common.out.clone(), common.seed, name)?;
    run(&ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Lambda1(c) => dispatch(c, "lambda1", commands::run_lambda1),
        Command::Lambda2(c) => dispatch(c, "lambda2", commands::run_lambda2),
        Command::Oracle(c) => dispatch(c, "oracle", commands::run_oracle),
        Command::Nehari(c) => dispatch(c, "nehari", commands::run_nehari),
        Command::Certify(c) => dispatch(c, "certify", commands::run_certify),
        Command::MuSweep(c) => dispatch(c, "mu-sweep", commands::run_mu_sweep),
        Command::SSweep(c) => dispatch(c, "s-sweep", commands::run_s_sweep),
        Command::Bbm(c) => dispatch(c, "bbm", commands::run_bbm),
        Command::Decay(c) => dispatch(c, "decay", commands::run_quotient_decay),
        Command::Local(c) => dispatch(c, "local", commands::run_local_reference),
        Command::Report(c) => commands::run_report(&c.config, c.out.clone()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("fracpq: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
