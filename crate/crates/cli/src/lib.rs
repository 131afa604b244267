// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: perturbation, detection, suite evaluation,
//! signature bank upkeep and equivalence checks.

pub mod artifacts;
pub mod cmd;
pub mod config;
pub mod exit;
pub mod manifest;
pub mod samples;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "trojanlens", version, about = "Hardware Trojan detection benchmark harness")]
pub struct Cli {
    /// Config file; `./trojanlens.toml` is used when present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply functionality-preserving transformations to a design.
    Perturb(cmd::perturb::PerturbArgs),
    /// Ask a provider to locate and classify Trojans.
    Detect(cmd::detect::DetectArgs),
    /// Detect and score every sample of a run manifest.
    Evaluate(cmd::evaluate::EvaluateArgs),
    /// Build and maintain signature banks.
    Signatures(cmd::signatures::SignaturesArgs),
    /// Store a response as a replay fixture.
    Record(cmd::record::RecordArgs),
    /// Compare simulation traces of two versions of a design.
    Equivcheck(cmd::equivcheck::EquivArgs),
}

/// Run one command and return the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = config::Config::discover(cli.config.as_deref())?;
    match &cli.command {
        Command::Perturb(a) => cmd::perturb::run(&cfg, a)?,
        Command::Detect(a) => cmd::detect::run(&cfg, a)?,
        Command::Evaluate(a) => cmd::evaluate::run(&cfg, a)?,
        Command::Signatures(a) => cmd::signatures::run(&cfg, a)?,
        Command::Record(a) => cmd::record::run(&cfg, a)?,
        Command::Equivcheck(a) => return cmd::equivcheck::run(&cfg, a),
    }
    Ok(exit::OK)
}
