//! `rotdyn`: simulate rotation-driven semilinear difference equations on
//! the complex plane, analyze rotation orbits, and compute explicit
//! boundedness envelopes and certificates.
//!
//! Every subcommand is driven by a TOML config file; reports are JSON with
//! sorted keys (identical config implies byte-identical reports) and
//! trajectories are CSV with the schema `n,re,im,radius,arg` (turns).
//!
//! Exit codes: 0 ok, 2 config error, 3 numeric abort, 4 precondition
//! violation, 5 property failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

mod config;
mod output;
mod run;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric abort: {0}")]
    Numeric(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("property failure: {0}")]
    PropertyFailure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Precondition(_) => 4,
            CliError::PropertyFailure(_) => 5,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rotdyn",
    version,
    about = "Rotation-driven complex dynamics toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate a registered system and export the trajectory.
    Simulate { config: PathBuf },
    /// Assemble the quantitative boundedness envelope (N_d, H, L).
    Envelope { config: PathBuf },
    /// Run the power-law beta scan and report the accepted bound.
    Powerlaw { config: PathBuf },
    /// Compute the covering number N(delta, m) of a rotation orbit.
    Cover { config: PathBuf },
    /// Gap spectrum of an orbit prefix.
    Gaps { config: PathBuf },
    /// Sample the radial drift profile of a system across probe radii.
    Phi { config: PathBuf },
    /// Certify the boundedness hypotheses over a finite horizon.
    Certify { config: PathBuf },
    /// Reproduce an unbounded construction and verify its growth law.
    Counterexample { config: PathBuf },
    /// Run the seeded kernel property suite.
    #[command(name = "verify-lemmas")]
    VerifyLemmas { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config } => run::simulate(config),
        Command::Envelope { config } => run::envelope(config),
        Command::Powerlaw { config } => run::powerlaw(config),
        Command::Cover { config } => run::cover(config),
        Command::Gaps { config } => run::gaps(config),
        Command::Phi { config } => run::profile(config),
        Command::Certify { config } => run::certify(config),
        Command::Counterexample { config } => run::counterexample(config),
        Command::VerifyLemmas { config } => run::verify_lemmas(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
