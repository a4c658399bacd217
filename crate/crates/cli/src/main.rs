use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::Failure;
use config::RunConfig;

/// Particle solver and verification suite for the geometric thin-film equation.
///
/// Thread count comes from `GTFE_THREADS` (default: all cores).
#[derive(Parser, Debug)]
#[command(name = "gtfe", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    /// Override a config entry, e.g. `--set tol=1e-10` or `--set verify.convergence=true`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evolve the discretized measure; writes trajectory, step log, field and energy CSVs.
    Simulate(Common),
    /// Run the check suite and write report.json; exit status 1 if any check fails.
    Verify(Common),
    /// Grid-refinement convergence study in the bounded-Lipschitz distance.
    Converge(Common),
    /// Time the fast and direct velocity evaluations.
    Bench(Common),
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("GTFE_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .map_err(|_| Failure::Config(anyhow::anyhow!("GTFE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.into()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let (Cmd::Simulate(c) | Cmd::Verify(c) | Cmd::Converge(c) | Cmd::Bench(c)) = &cli.cmd;
    let cfg = RunConfig::load(&c.config, &c.set).map_err(Failure::Config)?;
    match cli.cmd {
        Cmd::Simulate(_) => commands::simulate(&cfg),
        Cmd::Verify(_) => commands::verify(&cfg),
        Cmd::Converge(_) => commands::converge(&cfg),
        Cmd::Bench(_) => commands::bench(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            match f {
                Failure::Config(e) => eprintln!("config error: {e:#}"),
                Failure::Simulation(e) => eprintln!("simulation failed: {e:#}"),
                Failure::Io(e) => eprintln!("error: {e:#}"),
                Failure::Checks(n) => eprintln!("{n} check(s) failed"),
            }
            ExitCode::from(code)
        }
    }
}
