// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use rayon::prelude::*;
use trojanlens::detect::connect;

use crate::artifacts::{design_id_from_path, detect_into, effective_top_n, load_bank, load_design};
use crate::config::{Config, DEFAULT_TOP_N};

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// One or more Verilog sources.
    #[arg(required = true)]
    pub designs: Vec<PathBuf>,
    #[arg(long, default_value = "heuristic")]
    pub provider: String,
    /// Signature bank JSON.
    #[arg(long)]
    pub bank: Option<PathBuf>,
    /// Signatures of each kind placed in the prompt; 0 disables them.
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Output directory; each design gets `<out>/<ID>/`.
    #[arg(long)]
    pub out: PathBuf,
    /// Designs in flight at once.
    #[arg(long)]
    pub jobs: Option<usize>,
}

pub fn run(cfg: &Config, a: &DetectArgs) -> Result<()> {
    let pcfg = cfg.provider(&a.provider)?;
    let provider = connect(&pcfg);
    let bank = load_bank(a.bank.as_deref())?;
    let top_n = effective_top_n(&bank, cfg.top_n(a.top_n), DEFAULT_TOP_N)?;
    let ids: Vec<String> = a.designs.iter().map(|d| design_id_from_path(d)).collect();
    if ids.iter().collect::<BTreeSet<_>>().len() != ids.len() {
        bail!("design ids must be distinct: {}", ids.join(", "));
    }
    let designs = a
        .designs
        .iter()
        .zip(&ids)
        .map(|(p, id)| load_design(p, id))
        .collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.in_flight(a.jobs)).build()?;
    let reports = pool.install(|| {
        designs
            .par_iter()
            .map(|d| detect_into(&a.out.join(&d.id), d, &bank, top_n, &pcfg, provider.as_ref()))
            .collect::<Vec<_>>()
    });
    for (d, r) in designs.iter().zip(reports) {
        let r = r?;
        let types: Vec<String> = r.entries.iter().map(|e| e.claimed_type.to_string()).collect();
        println!(
            "{}: {} trojan(s) [{}] -> {}",
            d.id,
            r.entries.len(),
            types.join(", "),
            a.out.join(&d.id).display()
        );
    }
    Ok(())
}
