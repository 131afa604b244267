// SPDX-License-Identifier: Apache-2.0

//! Built-in two-state simulator: runs a stimulus script against Verilog
//! sources and prints the trace.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use trojanlens::rtl::parse_str;
use trojanlens::sim::{parse_stim, run_stim};

#[derive(Parser)]
#[command(name = "rtlsim", version)]
struct Args {
    /// Scratch directory; accepted for template compatibility.
    #[arg(long)]
    workdir: Option<PathBuf>,
    stim: PathBuf,
    #[arg(required = true)]
    sources: Vec<PathBuf>,
}

fn main_inner(a: &Args) -> Result<()> {
    let mut text = String::new();
    for s in &a.sources {
        text.push_str(&std::fs::read_to_string(s).with_context(|| format!("reading {}", s.display()))?);
        text.push('\n');
    }
    let tree = parse_str(&text)?;
    let stim_text = std::fs::read_to_string(&a.stim).with_context(|| format!("reading {}", a.stim.display()))?;
    let stim = parse_stim(&stim_text)?;
    for line in run_stim(&tree, &stim)? {
        println!("{line}");
    }
    Ok(())
}

fn main() {
    let a = Args::parse();
    if let Err(e) = main_inner(&a) {
        eprintln!("rtlsim: {e:#}");
        std::process::exit(1);
    }
}
