mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Arith, Experiment};
use error::CliError;

/// Runs pressure, Gibbs, fiber and transform experiments described by a TOML config.
#[derive(Parser)]
#[command(name = "alchemy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral pressure and Bowen partition-sum estimates of each potential.
    Pressure(Common),
    /// Gibbs ratios of the conditional measure of G1 on unstable Bowen balls.
    Gibbs(Common),
    /// Entry distribution and cylinder masses of the conditional fiber measure of G1.
    Fiber(Common),
    /// Pushforwards, averaged measures mu_n and endpoints against the equilibrium state of G2.
    Transform(Common),
    /// Growth of log Z_n against P(G2) - P(G1).
    Growth(Common),
    /// The unaveraged endpoint pushforward on each cylinder.
    Endpoint(Common),
    /// Seeded battery of random potentials checking the core identities.
    Audit(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized subcommands; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Arithmetic; overrides `job.arith`.
    #[arg(long)]
    arith: Option<Arith>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match &cli.command {
        Command::Pressure(c) => ("pressure", c),
        Command::Gibbs(c) => ("gibbs", c),
        Command::Fiber(c) => ("fiber", c),
        Command::Transform(c) => ("transform", c),
        Command::Growth(c) => ("growth", c),
        Command::Endpoint(c) => ("endpoint", c),
        Command::Audit(c) => ("audit", c),
    };
    let mut exp = Experiment::load(&common.config)?;
    if let Some(seed) = common.seed {
        exp.seed = seed;
    }
    let arith = common.arith.unwrap_or(exp.job.arith);
    let report = match cli.command {
        Command::Pressure(_) => commands::pressure(&exp)?,
        Command::Gibbs(_) => commands::gibbs(&exp)?,
        Command::Fiber(_) => commands::fiber(&exp, arith)?,
        Command::Transform(_) => commands::transform(&exp, arith)?,
        Command::Growth(_) => commands::growth(&exp, arith)?,
        Command::Endpoint(_) => commands::endpoint(&exp, arith)?,
        Command::Audit(_) => commands::audit(&exp)?,
    };
    let out_dir = common
        .out
        .clone()
        .or_else(|| exp.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let (csv, json) = report::emit(&report, &exp, &out_dir, name, arith)?;
    println!("{} rows -> {}", report.rows.len(), csv.display());
    println!("summary -> {}", json.display());
    for c in &report.checks {
        println!("{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    let failed: Vec<String> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
