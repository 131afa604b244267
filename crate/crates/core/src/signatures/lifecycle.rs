// SPDX-License-Identifier: Apache-2.0

//! Provider-backed steps: extraction, validation and bank updates.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::*;
use crate::annotations::{family_of, AnnotationSet};
use crate::detect::DetectionReport;
use crate::metrics::match_instances;
use crate::rtl::{parse, SourceFile};

/// Clean/infected pairs with free-text notes.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub id: String,
    pub clean: SourceFile,
    pub infected: SourceFile,
    pub meta: String,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingCorpus {
    pub samples: Vec<TrainingSample>,
}

#[derive(Deserialize)]
struct CorpusFile {
    samples: Vec<CorpusEntry>,
}

#[derive(Deserialize)]
struct CorpusEntry {
    id: String,
    clean: PathBuf,
    infected: PathBuf,
    #[serde(default)]
    meta: String,
}

impl TrainingCorpus {
    /// Load a JSON corpus listing; paths are relative to the listing.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SignatureError> {
        let path = path.as_ref();
        let bad = |m: String| SignatureError::Invalid(format!("{}: {m}", path.display()));
        let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        let f: CorpusFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut samples = Vec::new();
        for e in f.samples {
            let load = |p: &Path| -> Result<SourceFile, SignatureError> {
                let full = base.join(p);
                let src = SourceFile::load(&full).map_err(|e| bad(format!("{}: {e}", full.display())))?;
                parse(&src).map_err(|e| bad(format!("{}: {e}", full.display())))?;
                Ok(src)
            };
            samples.push(TrainingSample {
                clean: load(&e.clean)?,
                infected: load(&e.infected)?,
                id: e.id,
                meta: e.meta,
            });
        }
        Ok(TrainingCorpus { samples })
    }
}

fn ask(
    provider: &dyn DetectionProvider,
    bundle: &PromptBundle,
    origin: Origin,
    out: &mut Vec<RawSignature>,
) -> Result<(), SignatureError> {
    let resp = provider.invoke(bundle)?;
    for (kind, text) in parse_signature_list(&resp.text)? {
        let s = RawSignature::new(kind, &text, origin.clone());
        if !out.iter().any(|o| o.id == s.id) {
            out.push(s);
        }
    }
    Ok(())
}

/// Signatures for every corpus sample, in corpus order.
pub fn extract(corpus: &TrainingCorpus, provider: &dyn DetectionProvider) -> Result<Vec<RawSignature>, SignatureError> {
    let mut out = Vec::new();
    for s in &corpus.samples {
        let bundle = extraction_prompt(Some(&s.clean), &s.infected, &s.meta, &[]);
        ask(provider, &bundle, Origin::Extracted, &mut out)?;
    }
    Ok(out)
}

/// Detection rate, false-positive rate and family coverage of one
/// signature used alone.
pub fn validate_signature(
    sig: &RawSignature,
    val_set: &[(DesignUnit, AnnotationSet)],
    provider: &dyn DetectionProvider,
) -> Result<PerfVector, SignatureError> {
    if val_set.is_empty() {
        return Err(SignatureError::Invalid("validation set is empty".into()));
    }
    let (mut instances, mut detected, mut reported, mut spurious) = (0usize, 0usize, 0usize, 0usize);
    let mut fams: BTreeMap<&str, bool> = BTreeMap::new();
    for (design, ann) in val_set {
        let report = detect_with(sig, design, provider)?;
        let m = match_instances(&report, ann);
        instances += ann.k();
        detected += m.pairs.len();
        reported += report.entries.len();
        spurious += m.unmatched_entries.len();
        *fams.entry(family_of(&design.id)).or_default() |= !m.pairs.is_empty();
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(PerfVector::new(
        ratio(detected, instances),
        ratio(spurious, reported),
        ratio(fams.values().filter(|&&d| d).count(), fams.len()),
    ))
}

/// A design where detection missed at least one planted instance.
#[derive(Debug, Clone)]
pub struct Failure {
    pub design: DesignUnit,
    pub annotations: AnnotationSet,
    pub report: DetectionReport,
}

/// Fold new signatures into the bank: ones already present (by id or as
/// a merged parent) are dropped, the rest are merged behind the existing
/// entries. Returns the new bank signatures and the ids that are new or
/// whose text changed, or `None` when nothing new arrived.
fn fold_in(bank: &SignatureBank, new: Vec<RawSignature>) -> Option<(Vec<RawSignature>, BTreeSet<String>)> {
    let known: BTreeSet<&str> = bank.entries.iter().flat_map(|e| e.sig.covers()).collect();
    let mut fresh: Vec<RawSignature> = new.into_iter().filter(|s| !known.contains(s.id.as_str())).collect();
    if fresh.is_empty() {
        return None;
    }
    fresh.sort_by(|a, b| a.id.cmp(&b.id));
    let mut old = bank.signatures();
    old.sort_by(|a, b| a.id.cmp(&b.id));
    old.extend(fresh);
    let merged = merge_ordered(old, bank.theta);
    let changed = merged
        .iter()
        .filter(|s| bank.get(&s.id).map(|e| e.sig.text != s.text).unwrap_or(true))
        .map(|s| s.id.clone())
        .collect();
    Some((merged, changed))
}

fn rebuild(
    bank: &SignatureBank,
    sigs: Vec<RawSignature>,
    mut perf_of: impl FnMut(&RawSignature) -> Result<PerfVector, SignatureError>,
) -> Result<SignatureBank, SignatureError> {
    let mut out = SignatureBank::empty(bank.theta, bank.lambda, bank.mu);
    for sig in sigs {
        let perf = perf_of(&sig)?;
        out.entries.push(RankedSignature {
            sig,
            perf,
            weight: 0.0,
        });
    }
    out.rerank();
    Ok(out)
}

/// Learn from missed instances: extract signatures around each one, merge
/// them in, and validate new or changed entries on the failure designs.
pub fn iterate_on_failures(
    bank: &SignatureBank,
    failures: &[Failure],
    provider: &dyn DetectionProvider,
) -> Result<SignatureBank, SignatureError> {
    let mut new = Vec::new();
    for f in failures {
        let missed = missed_instances(&f.report, &f.annotations);
        if missed.is_empty() {
            return Err(SignatureError::Invalid(format!("`{}` has no missed instance", f.design.id)));
        }
        for inst in missed {
            let lines: Vec<u32> = inst.lines().collect::<BTreeSet<_>>().into_iter().collect();
            let bundle = extraction_prompt(None, &f.design.file, "", &lines);
            ask(provider, &bundle, Origin::Extracted, &mut new)?;
        }
    }
    let Some((sigs, changed)) = fold_in(bank, new) else {
        return Ok(bank.clone());
    };
    let val_set: Vec<(DesignUnit, AnnotationSet)> =
        failures.iter().map(|f| (f.design.clone(), f.annotations.clone())).collect();
    rebuild(bank, sigs, |s| match bank.get(&s.id) {
        Some(e) if !changed.contains(&s.id) => Ok(e.perf),
        _ => validate_signature(s, &val_set, provider),
    })
}

/// Add signatures for designs with no ground truth. New entries start at
/// zero performance; integrating the same designs again changes nothing.
pub fn integrate_zero_day(
    bank: &SignatureBank,
    novel: &[DesignUnit],
    provider: &dyn DetectionProvider,
) -> Result<SignatureBank, SignatureError> {
    let mut new = Vec::new();
    for d in novel {
        let bundle = extraction_prompt(None, &d.file, "", &[]);
        ask(provider, &bundle, Origin::ZeroDay, &mut new)?;
    }
    let Some((sigs, _)) = fold_in(bank, new) else {
        return Ok(bank.clone());
    };
    rebuild(bank, sigs, |s| Ok(bank.get(&s.id).map(|e| e.perf).unwrap_or_default()))
}
