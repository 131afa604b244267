// SPDX-License-Identifier: Apache-2.0

//! Scoring detection reports against ground truth.
//!
//! Instance level: report entries are paired one-to-one with planted
//! instances, giving `{k, TP, FP, FN}`. Line level: every line gets one
//! predicted label (trigger over payload over clean) and is counted against
//! its true label, giving TLC, PLC and AC. Type level: per-type precision
//! of the claimed categories (TCCA). Suites are aggregated by summing
//! counts and recomputing ratios.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotations::{AnnotationSet, LineLabel, TrojanInstance, TrojanType};
use crate::detect::{CostRecord, DetectionReport, ReportEntry};

mod table;

pub use table::{render_cost_table, render_table};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("{0} is undefined: zero denominator")]
    Undefined(&'static str),
    #[error("nothing to aggregate")]
    Empty,
}

/// An exact fraction; undefined when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        Ratio { num, den }
    }

    pub fn value(&self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64)
    }

    /// Rational equality with `num / den`.
    pub fn equals(&self, num: u64, den: u64) -> bool {
        self.den > 0 && den > 0 && self.num as u128 * den as u128 == num as u128 * self.den as u128
    }

    pub fn percent(&self) -> String {
        match self.value() {
            Some(v) => format!("{:.1}%", v * 100.0),
            None => "—".to_string(),
        }
    }

    pub fn fixed(&self, digits: usize) -> String {
        match self.value() {
            Some(v) => format!("{v:.digits$}"),
            None => "—".to_string(),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fixed(2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// `(entry index, instance index)`, in the order they were chosen.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_entries: Vec<usize>,
    pub unmatched_instances: Vec<usize>,
}

impl Matching {
    pub fn pair_ids(&self, report: &DetectionReport, ann: &AnnotationSet) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .map(|&(e, i)| (report.entries[e].entry_id.clone(), ann.instances[i].id.clone()))
            .collect()
    }
}

/// Lines an entry and an instance share, over both roles.
pub fn overlap(e: &ReportEntry, i: &TrojanInstance) -> usize {
    let a: BTreeSet<u32> = e.lines().collect();
    i.lines().collect::<BTreeSet<u32>>().intersection(&a).count()
}

/// Size of a maximum matching over `edges` avoiding used vertices.
fn max_matching(edges: &[(usize, usize)], n_entries: usize, n_inst: usize, used_e: &[bool], used_i: &[bool]) -> usize {
    let mut adj = vec![Vec::new(); n_entries];
    for &(e, i) in edges {
        if !used_e[e] && !used_i[i] {
            adj[e].push(i);
        }
    }
    fn augment(e: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &i in &adj[e] {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            if owner[i].is_none() || augment(owner[i].unwrap(), adj, seen, owner) {
                owner[i] = Some(e);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n_inst];
    let mut size = 0;
    for e in 0..n_entries {
        let mut seen = vec![false; n_inst];
        if augment(e, &adj, &mut seen, &mut owner) {
            size += 1;
        }
    }
    size
}

/// Candidate pairs in priority order: larger overlap first, then lower
/// instance id, then earlier entry.
pub fn ranked_edges(report: &DetectionReport, ann: &AnnotationSet) -> Vec<(usize, usize, usize)> {
    let mut edges = Vec::new();
    for (ei, e) in report.entries.iter().enumerate() {
        for (ii, inst) in ann.instances.iter().enumerate() {
            let ov = overlap(e, inst);
            if ov > 0 {
                edges.push((ei, ii, ov));
            }
        }
    }
    edges.sort_by(|a, b| {
        b.2.cmp(&a.2)
            .then_with(|| ann.instances[a.1].id.cmp(&ann.instances[b.1].id))
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.0.cmp(&b.0))
    });
    edges
}

/// Greedy one-to-one pairing by overlap. Pairs are taken in
/// [`ranked_edges`] order, skipping any pair that would make the final
/// number of pairs smaller than the largest possible.
pub fn match_instances(report: &DetectionReport, ann: &AnnotationSet) -> Matching {
    let (ne, ni) = (report.entries.len(), ann.instances.len());
    let edges = ranked_edges(report, ann);
    let plain: Vec<(usize, usize)> = edges.iter().map(|&(e, i, _)| (e, i)).collect();
    let mut used_e = vec![false; ne];
    let mut used_i = vec![false; ni];
    let target = max_matching(&plain, ne, ni, &used_e, &used_i);
    let mut pairs = Vec::new();
    for &(e, i, _) in &edges {
        if pairs.len() == target {
            break;
        }
        if used_e[e] || used_i[i] {
            continue;
        }
        used_e[e] = true;
        used_i[i] = true;
        if pairs.len() + 1 + max_matching(&plain, ne, ni, &used_e, &used_i) == target {
            pairs.push((e, i));
        } else {
            used_e[e] = false;
            used_i[i] = false;
        }
    }
    Matching {
        pairs,
        unmatched_entries: (0..ne).filter(|&e| !used_e[e]).collect(),
        unmatched_instances: (0..ni).filter(|&i| !used_i[i]).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DetectionTuple {
    pub k: u64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl DetectionTuple {
    pub fn add(&self, o: &DetectionTuple) -> DetectionTuple {
        DetectionTuple {
            k: self.k + o.k,
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl fmt::Display for DetectionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}, {}, {}}}", self.k, self.tp, self.fp, self.fn_)
    }
}

pub fn score_detection(m: &Matching, k: usize, entries: usize) -> DetectionTuple {
    let tp = m.pairs.len() as u64;
    DetectionTuple {
        k: k as u64,
        tp,
        fp: entries as u64 - tp,
        fn_: k as u64 - tp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LineLedger {
    pub tp_trigger: u64,
    pub fp_trigger: u64,
    pub tp_payload: u64,
    pub fp_payload: u64,
    pub tp_clean: u64,
    pub loc: u64,
}

impl LineLedger {
    pub fn add(&self, o: &LineLedger) -> LineLedger {
        LineLedger {
            tp_trigger: self.tp_trigger + o.tp_trigger,
            fp_trigger: self.fp_trigger + o.fp_trigger,
            tp_payload: self.tp_payload + o.tp_payload,
            fp_payload: self.fp_payload + o.fp_payload,
            tp_clean: self.tp_clean + o.tp_clean,
            loc: self.loc + o.loc,
        }
    }

    pub fn tlc(&self) -> Ratio {
        Ratio::new(self.tp_trigger, self.tp_trigger + self.fp_trigger)
    }

    pub fn plc(&self) -> Ratio {
        Ratio::new(self.tp_payload, self.tp_payload + self.fp_payload)
    }

    pub fn ac(&self) -> Ratio {
        Ratio::new(self.tp_trigger + self.tp_payload + self.tp_clean, self.loc)
    }
}

pub fn tlc(l: &LineLedger) -> Result<f64, MetricError> {
    l.tlc().value().ok_or(MetricError::Undefined("TLC"))
}

pub fn plc(l: &LineLedger) -> Result<f64, MetricError> {
    l.plc().value().ok_or(MetricError::Undefined("PLC"))
}

pub fn ac(l: &LineLedger) -> Result<f64, MetricError> {
    l.ac().value().ok_or(MetricError::Undefined("AC"))
}

/// Predicted label of every line 1..=loc.
pub fn predicted_labels(report: &DetectionReport, loc: u32) -> Vec<LineLabel> {
    let trig: BTreeSet<u32> = report.entries.iter().flat_map(|e| e.trigger_lines.iter().copied()).collect();
    let pay: BTreeSet<u32> = report.entries.iter().flat_map(|e| e.payload_lines.iter().copied()).collect();
    (1..=loc)
        .map(|l| {
            if trig.contains(&l) {
                LineLabel::Trigger
            } else if pay.contains(&l) {
                LineLabel::Payload
            } else {
                LineLabel::Clean
            }
        })
        .collect()
}

pub fn score_lines(report: &DetectionReport, ann: &AnnotationSet, loc: u32) -> LineLedger {
    let mut l = LineLedger {
        loc: loc as u64,
        ..LineLedger::default()
    };
    for (i, p) in predicted_labels(report, loc).into_iter().enumerate() {
        let truth = ann.label_of(i as u32 + 1).unwrap_or(LineLabel::Clean);
        match (p, truth == p) {
            (LineLabel::Trigger, true) => l.tp_trigger += 1,
            (LineLabel::Trigger, false) => l.fp_trigger += 1,
            (LineLabel::Payload, true) => l.tp_payload += 1,
            (LineLabel::Payload, false) => l.fp_payload += 1,
            (LineLabel::Clean, true) => l.tp_clean += 1,
            (LineLabel::Clean, false) => {}
        }
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeCounts {
    pub tp: u64,
    pub fp: u64,
}

impl TypeCounts {
    pub fn tcca(&self) -> Ratio {
        Ratio::new(self.tp, self.tp + self.fp)
    }
}

pub type TypeTable = BTreeMap<TrojanType, TypeCounts>;

fn empty_types() -> TypeTable {
    TrojanType::ALL.iter().map(|&t| (t, TypeCounts::default())).collect()
}

/// Per claimed type: correctly typed matches, and claims that are
/// unmatched or matched to an instance of another type.
pub fn score_types(m: &Matching, report: &DetectionReport, ann: &AnnotationSet) -> TypeTable {
    let mut out = empty_types();
    let partner: BTreeMap<usize, usize> = m.pairs.iter().copied().collect();
    for (ei, e) in report.entries.iter().enumerate() {
        let c = out.get_mut(&e.claimed_type).expect("all types present");
        match partner.get(&ei) {
            Some(&ii) if ann.instances[ii].ty == e.claimed_type => c.tp += 1,
            _ => c.fp += 1,
        }
    }
    out
}

pub fn tcca(types: &TypeTable, t: TrojanType) -> Result<f64, MetricError> {
    types
        .get(&t)
        .and_then(|c| c.tcca().value())
        .ok_or(MetricError::Undefined("TCCA"))
}

/// Correct claims over all claims, pooled across types.
pub fn tcca_overall(types: &TypeTable) -> Ratio {
    let tp: u64 = types.values().map(|c| c.tp).sum();
    let fp: u64 = types.values().map(|c| c.fp).sum();
    Ratio::new(tp, tp + fp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub design_id: String,
    pub tuple: DetectionTuple,
    pub ledger: LineLedger,
    pub tlc: Option<f64>,
    pub plc: Option<f64>,
    pub ac: Option<f64>,
    pub tcca: TypeTable,
    pub cost: CostRecord,
}

pub fn score_sample(report: &DetectionReport, ann: &AnnotationSet) -> SampleResult {
    let m = match_instances(report, ann);
    let ledger = score_lines(report, ann, ann.loc);
    SampleResult {
        design_id: ann.design_id.clone(),
        tuple: score_detection(&m, ann.k(), report.entries.len()),
        tlc: ledger.tlc().value(),
        plc: ledger.plc().value(),
        ac: ledger.ac().value(),
        ledger,
        tcca: score_types(&m, report, ann),
        cost: report.cost.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub total_time: f64,
    pub avg_time: f64,
    /// Token and money averages cover only the samples that reported them.
    pub input_tokens_per_sample: Option<f64>,
    pub output_tokens_per_sample: Option<f64>,
    pub total_cost: Option<f64>,
    pub cost_per_sample: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub samples: usize,
    pub tuple: DetectionTuple,
    pub ledger: LineLedger,
    pub tlc: Option<f64>,
    pub plc: Option<f64>,
    pub ac: Option<f64>,
    pub tcca: TypeTable,
    pub tcca_overall: Option<f64>,
    pub cost: CostSummary,
}

/// Order-independent float sum.
fn sum_sorted(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.into_iter().sum()
}

fn mean_present(xs: impl Iterator<Item = Option<u64>>) -> Option<f64> {
    let v: Vec<u64> = xs.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<u64>() as f64 / v.len() as f64)
}

/// Sum counts over samples and recompute every ratio from the sums.
pub fn aggregate(samples: &[SampleResult]) -> Result<AggregateResult, MetricError> {
    if samples.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut tuple = DetectionTuple::default();
    let mut ledger = LineLedger::default();
    let mut types = empty_types();
    for s in samples {
        tuple = tuple.add(&s.tuple);
        ledger = ledger.add(&s.ledger);
        for (t, c) in &s.tcca {
            let a = types.entry(*t).or_default();
            a.tp += c.tp;
            a.fp += c.fp;
        }
    }
    let n = samples.len();
    let total_time = sum_sorted(samples.iter().map(|s| s.cost.wall_time).collect());
    let costs: Vec<f64> = samples.iter().filter_map(|s| s.cost.monetary_cost).collect();
    let priced = costs.len();
    let total_cost = (priced > 0).then(|| sum_sorted(costs));
    Ok(AggregateResult {
        samples: n,
        tuple,
        tlc: ledger.tlc().value(),
        plc: ledger.plc().value(),
        ac: ledger.ac().value(),
        ledger,
        tcca_overall: tcca_overall(&types).value(),
        tcca: types,
        cost: CostSummary {
            total_time,
            avg_time: total_time / n as f64,
            input_tokens_per_sample: mean_present(samples.iter().map(|s| s.cost.input_tokens)),
            output_tokens_per_sample: mean_present(samples.iter().map(|s| s.cost.output_tokens)),
            total_cost,
            cost_per_sample: total_cost.map(|c| c / priced as f64),
        },
    })
}
