// SPDX-License-Identifier: Apache-2.0

//! The signature bank: natural-language trigger and payload patterns,
//! merged by token similarity, validated against labeled designs and
//! ranked by a linear score.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotations::AnnotationSet;
use crate::design::DesignUnit;
use crate::detect::{
    build_prompt, first_element, numbered, parse_report, DetectionProvider, DetectionReport, ProviderError,
    PromptBundle, PromptTask, ReportError, SYSTEM_TEXT,
};
use crate::metrics::match_instances;
use crate::rtl::SourceFile;

mod lifecycle;

pub use lifecycle::{
    extract, integrate_zero_day, iterate_on_failures, validate_signature, Failure, TrainingCorpus, TrainingSample,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigKind {
    Trigger,
    Payload,
}

impl fmt::Display for SigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SigKind::Trigger => "trigger",
            SigKind::Payload => "payload",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Extracted,
    ZeroDay,
    Merged(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSignature {
    pub id: String,
    pub kind: SigKind,
    pub text: String,
    pub origin: Origin,
}

impl RawSignature {
    /// A signature whose id is derived from its kind and text.
    pub fn new(kind: SigKind, text: &str, origin: Origin) -> Self {
        let text = text.trim().to_string();
        assert!(!text.is_empty(), "signature text must not be empty");
        RawSignature {
            id: content_id(kind, &text),
            kind,
            text,
            origin,
        }
    }

    /// Ids this signature stands for: its own and any merged parents.
    pub fn covers(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::from([self.id.as_str()]);
        if let Origin::Merged(ps) = &self.origin {
            out.extend(ps.iter().map(String::as_str));
        }
        out
    }
}

pub fn content_id(kind: SigKind, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(format!("{kind}:{text}").as_bytes());
    format!("sig-{}", &hex::encode(h.finalize())[..10])
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerfVector {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PerfVector {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        let v = PerfVector { alpha, beta, gamma };
        assert!(v.is_valid(), "performance components must lie in [0, 1]: {v:?}");
        v
    }

    pub fn is_valid(&self) -> bool {
        [self.alpha, self.beta, self.gamma].iter().all(|x| (0.0..=1.0).contains(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSignature {
    pub sig: RawSignature,
    pub perf: PerfVector,
    pub weight: f64,
}

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_MU: f64 = 0.5;

pub fn weight(p: &PerfVector, lambda: f64, mu: f64) -> f64 {
    p.alpha - lambda * p.beta + mu * p.gamma
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureBank {
    pub theta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub entries: Vec<RankedSignature>,
}

#[derive(Serialize, Deserialize)]
struct BankRecord {
    id: String,
    kind: SigKind,
    text: String,
    alpha: f64,
    beta: f64,
    gamma: f64,
    weight: f64,
    origin: Origin,
}

#[derive(Serialize, Deserialize)]
struct BankFile {
    theta: f64,
    lambda: f64,
    mu: f64,
    entries: Vec<BankRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum SignatureError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("signature list: {0}")]
    Parse(String),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("bank file: {0}")]
    Bank(String),
    #[error("{0}")]
    Invalid(String),
}

impl Default for SignatureBank {
    fn default() -> Self {
        SignatureBank::empty(DEFAULT_THETA, DEFAULT_LAMBDA, DEFAULT_MU)
    }
}

impl SignatureBank {
    pub fn empty(theta: f64, lambda: f64, mu: f64) -> Self {
        SignatureBank {
            theta,
            lambda,
            mu,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&RankedSignature> {
        self.entries.iter().find(|e| e.sig.id == id)
    }

    /// Recompute weights and restore the ranked order.
    pub fn rerank(&mut self) {
        for e in &mut self.entries {
            e.weight = weight(&e.perf, self.lambda, self.mu);
        }
        self.entries.sort_by(|a, b| {
            b.weight
                .partial_cmp(&a.weight)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.sig.id.cmp(&b.sig.id))
        });
    }

    /// Sorted by weight descending then id ascending, ids unique, weights
    /// consistent with the coefficients.
    pub fn check(&self) -> Result<(), String> {
        let mut ids = BTreeSet::new();
        for e in &self.entries {
            if !ids.insert(&e.sig.id) {
                return Err(format!("duplicate id `{}`", e.sig.id));
            }
            if !e.perf.is_valid() {
                return Err(format!("`{}` has performance outside [0, 1]", e.sig.id));
            }
            if e.weight != weight(&e.perf, self.lambda, self.mu) {
                return Err(format!("`{}` has a stale weight", e.sig.id));
            }
        }
        for w in self.entries.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.weight < b.weight || (a.weight == b.weight && a.sig.id > b.sig.id) {
                return Err(format!("`{}` is ranked above `{}`", a.sig.id, b.sig.id));
            }
        }
        if !(0.0..=1.0).contains(&self.theta) || self.lambda < 0.0 || self.mu < 0.0 {
            return Err("bank coefficients out of range".into());
        }
        Ok(())
    }

    /// One flat record per entry, in ranked order.
    pub fn to_json(&self) -> String {
        let file = BankFile {
            theta: self.theta,
            lambda: self.lambda,
            mu: self.mu,
            entries: self
                .entries
                .iter()
                .map(|e| BankRecord {
                    id: e.sig.id.clone(),
                    kind: e.sig.kind,
                    text: e.sig.text.clone(),
                    alpha: e.perf.alpha,
                    beta: e.perf.beta,
                    gamma: e.perf.gamma,
                    weight: e.weight,
                    origin: e.sig.origin.clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("bank serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SignatureError> {
        let file: BankFile = serde_json::from_str(text).map_err(|e| SignatureError::Bank(e.to_string()))?;
        let bank = SignatureBank {
            theta: file.theta,
            lambda: file.lambda,
            mu: file.mu,
            entries: file
                .entries
                .into_iter()
                .map(|r| RankedSignature {
                    sig: RawSignature {
                        id: r.id,
                        kind: r.kind,
                        text: r.text,
                        origin: r.origin,
                    },
                    perf: PerfVector {
                        alpha: r.alpha,
                        beta: r.beta,
                        gamma: r.gamma,
                    },
                    weight: r.weight,
                })
                .collect(),
        };
        bank.check().map_err(SignatureError::Bank)?;
        Ok(bank)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SignatureError> {
        let p = path.as_ref();
        let text = std::fs::read_to_string(p).map_err(|e| SignatureError::Bank(format!("{}: {e}", p.display())))?;
        SignatureBank::from_json(&text)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn signatures(&self) -> Vec<RawSignature> {
        self.entries.iter().map(|e| e.sig.clone()).collect()
    }
}

/// Words dropped before comparing signature texts.
pub const STOP_WORDS: &[&str] = &[
    "a", "also", "an", "and", "any", "are", "as", "at", "be", "by", "can", "for", "from", "has", "have", "if", "in",
    "into", "is", "it", "its", "of", "on", "only", "or", "that", "the", "their", "then", "this", "to", "via", "was",
    "when", "where", "which", "while", "with",
];

/// Lowercase word tokens in order of first appearance, stop words removed.
pub fn tokens(text: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for w in text.split(|c: char| !c.is_alphanumeric() && c != '_') {
        let w = w.to_lowercase();
        if w.is_empty() || STOP_WORDS.contains(&w.as_str()) {
            continue;
        }
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Jaccard index of the token sets. Different kinds are never similar.
pub fn similarity(a: &RawSignature, b: &RawSignature) -> f64 {
    if a.kind != b.kind {
        return 0.0;
    }
    let ta: BTreeSet<String> = tokens(&a.text).into_iter().collect();
    let tb: BTreeSet<String> = tokens(&b.text).into_iter().collect();
    let union = ta.union(&tb).count();
    if union == 0 {
        return 1.0;
    }
    ta.intersection(&tb).count() as f64 / union as f64
}

/// One greedy pass in the given order. Returns the merged list and whether
/// anything was merged.
fn merge_pass(sigs: &[RawSignature], theta: f64) -> (Vec<RawSignature>, bool) {
    let mut clusters: Vec<Vec<&RawSignature>> = Vec::new();
    for s in sigs {
        match clusters.iter_mut().find(|c| similarity(c[0], s) > theta) {
            Some(c) => c.push(s),
            None => clusters.push(vec![s]),
        }
    }
    let merged = clusters.iter().any(|c| c.len() > 1);
    let out = clusters
        .into_iter()
        .map(|c| {
            if c.len() == 1 {
                return c[0].clone();
            }
            let rep = c[0];
            let own: BTreeSet<String> = tokens(&rep.text).into_iter().collect();
            let mut extra: Vec<String> = Vec::new();
            for m in &c[1..] {
                for t in tokens(&m.text) {
                    if !own.contains(&t) && !extra.contains(&t) {
                        extra.push(t);
                    }
                }
            }
            let text = if extra.is_empty() {
                rep.text.clone()
            } else {
                format!("{} (also: {})", rep.text, extra.join(", "))
            };
            let mut parents = BTreeSet::new();
            for m in &c {
                parents.extend(m.covers().into_iter().map(str::to_string));
            }
            RawSignature {
                id: rep.id.clone(),
                kind: rep.kind,
                text,
                origin: Origin::Merged(parents.into_iter().collect()),
            }
        })
        .collect();
    (out, merged)
}

/// Merge in the given order until a pass merges nothing.
pub(crate) fn merge_ordered(sigs: Vec<RawSignature>, theta: f64) -> Vec<RawSignature> {
    let mut cur = sigs;
    loop {
        let (next, merged) = merge_pass(&cur, theta);
        if !merged {
            return next;
        }
        cur = next;
    }
}

/// Cluster similar signatures. Input is taken in id order; a signature
/// joins the first cluster whose representative is more than `theta`
/// similar, and each cluster of two or more becomes one signature that keeps
/// the representative's id and text and lists the tokens the others add.
/// Passes repeat until nothing merges, so the result is a fixed point.
pub fn merge_refine(sigs: &[RawSignature], theta: f64) -> Vec<RawSignature> {
    let mut sorted = sigs.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    merge_ordered(sorted, theta)
}

/// Weights each signature and returns the ranked bank.
pub fn rank(sigs: Vec<(RawSignature, PerfVector)>, lambda: f64, mu: f64) -> SignatureBank {
    let mut bank = SignatureBank::empty(DEFAULT_THETA, lambda, mu);
    bank.entries = sigs
        .into_iter()
        .map(|(sig, perf)| RankedSignature {
            sig,
            perf,
            weight: 0.0,
        })
        .collect();
    bank.rerank();
    bank
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Signature list XML: `<signatures><signature kind="trigger">..</signature></signatures>`.
pub fn serialize_signature_list(sigs: &[(SigKind, String)]) -> String {
    if sigs.is_empty() {
        return "<signatures/>\n".to_string();
    }
    let mut out = String::from("<signatures>\n");
    for (k, t) in sigs {
        out.push_str(&format!("  <signature kind=\"{k}\">{}</signature>\n", escape(t)));
    }
    out.push_str("</signatures>\n");
    out
}

pub fn parse_signature_list(text: &str) -> Result<Vec<(SigKind, String)>, SignatureError> {
    let xml = first_element(text, "signatures").ok_or_else(|| SignatureError::Parse("no <signatures> element".into()))?;
    let doc = roxmltree::Document::parse(&xml).expect("checked by first_element");
    let mut out = Vec::new();
    for (i, n) in doc.root_element().children().enumerate() {
        if n.is_text() {
            if n.text().unwrap_or("").trim().is_empty() {
                continue;
            }
            return Err(SignatureError::Parse("unexpected text".into()));
        }
        if !n.is_element() {
            continue;
        }
        if n.tag_name().name() != "signature" {
            return Err(SignatureError::Parse(format!("unexpected element <{}>", n.tag_name().name())));
        }
        let kind = match n.attribute("kind") {
            Some("trigger") => SigKind::Trigger,
            Some("payload") => SigKind::Payload,
            other => return Err(SignatureError::Parse(format!("child {i}: bad kind {other:?}"))),
        };
        let t: String = n.children().filter_map(|c| c.text()).collect();
        let t = t.split_whitespace().collect::<Vec<_>>().join(" ");
        if t.is_empty() {
            return Err(SignatureError::Parse(format!("child {i}: empty signature")));
        }
        out.push((kind, t));
    }
    Ok(out)
}

const SIGNATURE_SCHEMA: &str = "\
Answer with one XML document of this form:

<signatures>
  <signature kind=\"trigger\">one sentence describing a trigger pattern</signature>
  <signature kind=\"payload\">one sentence describing a payload pattern</signature>
  ...
</signatures>

Describe patterns in general terms (suspicious signals, counters, state
machines, rare conditions, altered outputs, leaked data) rather than naming
this design's identifiers.
";

/// Prompt for turning a labeled pair into signatures. `highlight` lists
/// infected-design lines to focus on.
pub fn extraction_prompt(clean: Option<&SourceFile>, infected: &SourceFile, meta: &str, highlight: &[u32]) -> PromptBundle {
    let mut stage1 = String::new();
    match clean {
        Some(c) => {
            stage1.push_str("Compare the clean design with its Trojan-infected variant and describe how the Trojan is triggered and what it does.\n\n");
            stage1.push_str(&format!("Clean design ({} lines):\n{}\n", c.lines, numbered(&c.text)));
        }
        None => stage1.push_str("Describe every trigger and payload pattern that makes this design suspicious.\n\n"),
    }
    stage1.push_str(&format!("Design under study ({} lines):\n{}", infected.lines, numbered(&infected.text)));
    if !meta.trim().is_empty() {
        stage1.push_str(&format!("\nNotes: {}\n", meta.trim()));
    }
    if !highlight.is_empty() {
        let ls: Vec<String> = highlight.iter().map(u32::to_string).collect();
        stage1.push_str(&format!("\nA Trojan was missed on lines {}.\n", ls.join(", ")));
    }
    PromptBundle {
        task: if clean.is_some() || !highlight.is_empty() {
            PromptTask::Extraction
        } else {
            PromptTask::ZeroDay
        },
        system_text: SYSTEM_TEXT.to_string(),
        stage1_text: stage1,
        stage2_text: String::new(),
        output_schema_text: SIGNATURE_SCHEMA.to_string(),
        source: infected.text.clone(),
    }
}

/// Instances of `ann` no entry of `report` was matched to.
pub fn missed_instances<'a>(report: &DetectionReport, ann: &'a AnnotationSet) -> Vec<&'a crate::annotations::TrojanInstance> {
    let m = match_instances(report, ann);
    m.unmatched_instances.iter().map(|&i| &ann.instances[i]).collect()
}

/// Run one-signature detection over a validation set.
pub(crate) fn detect_with(
    sig: &RawSignature,
    design: &DesignUnit,
    provider: &dyn DetectionProvider,
) -> Result<DetectionReport, SignatureError> {
    let bank = SignatureBank {
        entries: vec![RankedSignature {
            sig: sig.clone(),
            perf: PerfVector::default(),
            weight: 0.0,
        }],
        ..SignatureBank::default()
    };
    let bundle = build_prompt(design, &bank, 1);
    let resp = provider.invoke(&bundle)?;
    Ok(parse_report(&resp, design)?)
}
