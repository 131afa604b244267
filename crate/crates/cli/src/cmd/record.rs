// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use trojanlens::detect::{build_prompt, ProviderKind, ReplayProvider};

use crate::artifacts::{design_id_from_path, effective_top_n, load_bank, load_design};
use crate::config::{Config, DEFAULT_TOP_N};

#[derive(Debug, Args)]
pub struct RecordArgs {
    /// Design the response answers.
    pub design: PathBuf,
    /// A replay provider from the config.
    #[arg(long)]
    pub provider: String,
    /// Response text to store.
    #[arg(long)]
    pub response: PathBuf,
    #[arg(long)]
    pub bank: Option<PathBuf>,
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Design id used in the prompt; defaults to the upper-cased file stem.
    #[arg(long)]
    pub id: Option<String>,
    /// Declared token counts as `IN:OUT`.
    #[arg(long)]
    pub tokens: Option<String>,
}

fn parse_tokens(s: &str) -> Result<(u64, u64)> {
    let (i, o) = s.split_once(':').context("--tokens takes IN:OUT")?;
    Ok((i.trim().parse()?, o.trim().parse()?))
}

/// Store a response as the replay fixture for the prompt this design,
/// bank and `top_n` produce.
pub fn run(cfg: &Config, a: &RecordArgs) -> Result<()> {
    let pcfg = cfg.provider(&a.provider)?;
    if pcfg.kind() != ProviderKind::Replay {
        bail!("provider `{}` is not a replay provider", a.provider);
    }
    let id = a.id.clone().unwrap_or_else(|| design_id_from_path(&a.design));
    let design = load_design(&a.design, &id)?;
    let bank = load_bank(a.bank.as_deref())?;
    let top_n = effective_top_n(&bank, cfg.top_n(a.top_n), DEFAULT_TOP_N)?;
    let text = std::fs::read_to_string(&a.response).with_context(|| format!("reading {}", a.response.display()))?;
    let tokens = a.tokens.as_deref().map(parse_tokens).transpose()?;
    let bundle = build_prompt(&design, &bank, top_n);
    let path = ReplayProvider::new(&pcfg.name, &pcfg.endpoint).record(&bundle, &text, tokens)?;
    println!("{}", path.display());
    Ok(())
}
