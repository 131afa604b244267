// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use trojanlens::annotations::AnnotationSet;
use trojanlens::design::DesignUnit;
use trojanlens::detect::{connect, detect_sample, DetectionProvider};
use trojanlens::signatures::{
    extract, integrate_zero_day, iterate_on_failures, merge_refine, missed_instances, rank, validate_signature,
    Failure, PerfVector, RankedSignature, SignatureBank, TrainingCorpus,
};

use crate::artifacts::{design_id_from_path, effective_top_n, load_bank, load_design};
use crate::config::{Config, DEFAULT_TOP_N};
use crate::manifest::RunManifest;
use crate::samples::prepare_all;

#[derive(Debug, Subcommand)]
pub enum SignaturesCmd {
    /// Extract signatures from a training corpus, merge, validate and rank.
    Generate {
        /// Corpus listing JSON: `{"samples": [{"id", "clean", "infected", "meta"}]}`.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "heuristic")]
        provider: String,
        /// Manifest whose samples form the validation set.
        #[arg(long)]
        val: Option<PathBuf>,
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge similar signatures of a bank.
    Merge {
        bank: PathBuf,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-measure every signature on a validation set.
    Validate {
        bank: PathBuf,
        #[arg(long, default_value = "heuristic")]
        provider: String,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute weights and order.
    Rank {
        bank: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add signatures from designs with no ground truth.
    ZeroDay {
        bank: PathBuf,
        #[arg(required = true)]
        designs: Vec<PathBuf>,
        #[arg(long, default_value = "heuristic")]
        provider: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect on a validation set and learn from the missed instances.
    Iterate {
        bank: PathBuf,
        #[arg(long, default_value = "heuristic")]
        provider: String,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Knobs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SignaturesArgs {
    #[command(subcommand)]
    pub cmd: SignaturesCmd,
}

fn val_set(cfg: &Config, manifest: &Path) -> Result<Vec<(DesignUnit, AnnotationSet)>> {
    let m = RunManifest::load(manifest)?;
    m.check()?;
    Ok(prepare_all(&m.samples, cfg)?.into_iter().map(|p| (p.design, p.annotations)).collect())
}

fn store(bank: &SignatureBank, out: &Path) -> Result<()> {
    bank.check().map_err(anyhow::Error::msg)?;
    bank.store(out).with_context(|| format!("writing {}", out.display()))?;
    println!("{} signature(s) -> {}", bank.len(), out.display());
    Ok(())
}

fn provider(cfg: &Config, name: &str) -> Result<Box<dyn DetectionProvider>> {
    Ok(connect(&cfg.provider(name)?))
}

pub fn run(cfg: &Config, a: &SignaturesArgs) -> Result<()> {
    match &a.cmd {
        SignaturesCmd::Generate {
            corpus,
            provider: p,
            val,
            knobs,
            out,
        } => {
            let prov = provider(cfg, p)?;
            let corpus = TrainingCorpus::load(corpus)?;
            let theta = cfg.theta(knobs.theta);
            let merged = merge_refine(&extract(&corpus, prov.as_ref())?, theta);
            let vals = val.as_deref().map(|v| val_set(cfg, v)).transpose()?;
            let mut scored = Vec::new();
            for s in merged {
                let perf = match &vals {
                    Some(v) => validate_signature(&s, v, prov.as_ref())?,
                    None => PerfVector::default(),
                };
                scored.push((s, perf));
            }
            let mut bank = rank(scored, cfg.lambda(knobs.lambda), cfg.mu(knobs.mu));
            bank.theta = theta;
            store(&bank, out)
        }
        SignaturesCmd::Merge { bank, theta, out } => {
            let old = load_bank(Some(bank))?;
            let theta = theta.unwrap_or(old.theta);
            let mut new = SignatureBank::empty(theta, old.lambda, old.mu);
            for sig in merge_refine(&old.signatures(), theta) {
                // A merged signature keeps its representative's id.
                let perf = old.get(&sig.id).map(|e| e.perf).unwrap_or_default();
                new.entries.push(RankedSignature { sig, perf, weight: 0.0 });
            }
            new.rerank();
            store(&new, out)
        }
        SignaturesCmd::Validate {
            bank,
            provider: p,
            val,
            out,
        } => {
            let prov = provider(cfg, p)?;
            let mut b = load_bank(Some(bank))?;
            let vals = val_set(cfg, val)?;
            for e in &mut b.entries {
                e.perf = validate_signature(&e.sig, &vals, prov.as_ref())?;
            }
            b.rerank();
            store(&b, out)
        }
        SignaturesCmd::Rank { bank, lambda, mu, out } => {
            let mut b = load_bank(Some(bank))?;
            b.lambda = lambda.unwrap_or(b.lambda);
            b.mu = mu.unwrap_or(b.mu);
            b.rerank();
            store(&b, out)
        }
        SignaturesCmd::ZeroDay {
            bank,
            designs,
            provider: p,
            out,
        } => {
            let prov = provider(cfg, p)?;
            let b = load_bank(Some(bank))?;
            let units = designs
                .iter()
                .map(|d| load_design(d, &design_id_from_path(d)))
                .collect::<Result<Vec<_>>>()?;
            store(&integrate_zero_day(&b, &units, prov.as_ref())?, out)
        }
        SignaturesCmd::Iterate {
            bank,
            provider: p,
            val,
            top_n,
            out,
        } => {
            let pcfg = cfg.provider(p)?;
            let prov = connect(&pcfg);
            let b = load_bank(Some(bank))?;
            let top_n = effective_top_n(&b, cfg.top_n(*top_n), DEFAULT_TOP_N)?;
            let mut failures = Vec::new();
            for (design, annotations) in val_set(cfg, val)? {
                let run = detect_sample(&design, &b, top_n, &pcfg, prov.as_ref())?;
                if !missed_instances(&run.report, &annotations).is_empty() {
                    failures.push(Failure {
                        design,
                        annotations,
                        report: run.report,
                    });
                }
            }
            println!("{} design(s) with missed instances", failures.len());
            let next = if failures.is_empty() {
                b
            } else {
                iterate_on_failures(&b, &failures, prov.as_ref())?
            };
            store(&next, out)
        }
    }
}
