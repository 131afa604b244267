// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use trojanlens::detect::connect;
use trojanlens::metrics::{aggregate, render_cost_table, render_table, score_sample, SampleResult};

use crate::artifacts::{detect_into, effective_top_n, load_bank, write_json, write_text};
use crate::config::{Config, DEFAULT_TOP_N};
use crate::manifest::RunManifest;
use crate::samples::{prepare, Prepared};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Run manifest, JSON or TOML.
    pub manifest: PathBuf,
    /// Samples in flight at once.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Where the run's artifacts went.
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub results: Vec<SampleResult>,
}

fn sample_dir(run_dir: &Path, index: usize, id: &str) -> PathBuf {
    run_dir.join("samples").join(format!("{:02}-{id}", index + 1))
}

fn write_inputs(dir: &Path, p: &Prepared) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_text(&dir.join("design.v"), &p.design.file.text)?;
    let mut ann = p.annotations.clone();
    ann.source = PathBuf::from("design.v");
    write_text(&dir.join("annotations.json"), &(ann.to_json() + "\n"))?;
    if let Some(res) = &p.perturbed {
        write_json(&dir.join("linemap.json"), &res.line_map)?;
        write_json(&dir.join("rename.json"), &res.rename)?;
    }
    Ok(())
}

/// Score every manifest sample into a fresh `<output_dir>/<suite>-<time>`.
pub fn evaluate(cfg: &Config, a: &EvaluateArgs) -> Result<RunOutcome> {
    let mut manifest = RunManifest::load(&a.manifest)?;
    manifest.check()?;
    let pcfg = cfg.provider(&manifest.provider)?;
    let provider = connect(&pcfg);
    let bank = load_bank(manifest.bank.as_deref())?;
    let top_n = effective_top_n(&bank, cfg.top_n(manifest.top_n), DEFAULT_TOP_N)?;

    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    manifest.timestamp = Some(stamp.clone());
    std::fs::create_dir_all(&manifest.output_dir)
        .with_context(|| format!("creating {}", manifest.output_dir.display()))?;
    let run_dir = manifest.output_dir.join(format!("{}-{stamp}", manifest.suite_id));
    std::fs::create_dir(&run_dir).with_context(|| format!("creating run directory {}", run_dir.display()))?;
    write_json(&run_dir.join("manifest.json"), &manifest)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.in_flight(a.jobs)).build()?;
    let scored: Vec<Result<SampleResult>> = pool.install(|| {
        manifest
            .samples
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let p = prepare(spec, cfg)?;
                let dir = sample_dir(&run_dir, i, &p.design.id);
                write_inputs(&dir, &p)?;
                let report = detect_into(&dir, &p.design, &bank, top_n, &pcfg, provider.as_ref())?;
                let result = score_sample(&report, &p.annotations);
                write_json(&dir.join("result.json"), &result)?;
                Ok(result)
            })
            .collect()
    });
    let results = scored.into_iter().collect::<Result<Vec<_>>>()?;
    let agg = aggregate(&results)?;
    write_json(&run_dir.join("results.json"), &results)?;
    write_json(&run_dir.join("aggregate.json"), &agg)?;
    let table = render_table(&results, &agg);
    let cost = render_cost_table(&[(manifest.provider.as_str(), &agg)]);
    write_text(&run_dir.join("table.txt"), &table)?;
    write_text(&run_dir.join("cost.txt"), &cost)?;
    print!("{table}\n{cost}");
    println!("artifacts: {}", run_dir.display());
    Ok(RunOutcome { run_dir, results })
}

pub fn run(cfg: &Config, a: &EvaluateArgs) -> Result<()> {
    evaluate(cfg, a).map(|_| ())
}
