// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use trojanlens::annotations::AnnotationSet;
use trojanlens::perturb::{perturb, remap_annotations};

use crate::artifacts::{design_id_from_path, load_design, sibling, write_json, write_text};
use crate::config::Config;

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Verilog source to transform.
    pub design: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `all`, `none`, or a comma list of rename, redundant, restructure.
    #[arg(long)]
    pub passes: Option<String>,
    /// Fraction of always blocks that get redundant logic.
    #[arg(long)]
    pub density: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground truth to carry across the line map.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
}

/// Writes `<stem>.v`, `<stem>.linemap.json`, `<stem>.rename.json` and,
/// with annotations, `<stem>.annotations.json`.
pub fn run(cfg: &Config, a: &PerturbArgs) -> Result<()> {
    let design = load_design(&a.design, &design_id_from_path(&a.design))?;
    let pc = cfg.perturb_config(a.seed, a.passes.as_deref(), a.density)?;
    let res = perturb(&design, &pc).with_context(|| format!("perturbing {}", a.design.display()))?;
    let stem = a.design.file_stem().context("design path has no file name")?.to_string_lossy().into_owned();
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let out_v = sibling(&a.out, &stem, ".v");
    if out_v.canonicalize().ok() == a.design.canonicalize().ok() && out_v.exists() {
        bail!("refusing to overwrite the input design {}", a.design.display());
    }
    if let Some(p) = &a.annotations {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let ann = AnnotationSet::from_json_str(&text, design.lines()).with_context(|| format!("annotations {}", p.display()))?;
        let mut moved = remap_annotations(&ann, &res.line_map)?;
        moved.source = PathBuf::from(format!("{stem}.v"));
        write_text(&sibling(&a.out, &stem, ".annotations.json"), &(moved.to_json() + "\n"))?;
    }
    write_text(&out_v, &res.perturbed.text)?;
    write_json(&sibling(&a.out, &stem, ".linemap.json"), &res.line_map)?;
    write_json(&sibling(&a.out, &stem, ".rename.json"), &res.rename)?;
    println!(
        "{}: {} -> {} lines, {} renamed -> {}",
        design.id,
        design.lines(),
        res.perturbed.lines,
        res.rename.len(),
        out_v.display()
    );
    Ok(())
}
