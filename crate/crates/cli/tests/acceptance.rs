// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria 1-10. Prints one status line per criterion and exits
//! nonzero when any of them fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::*;
use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use serde_json::Value;
use trojanlens::annotations::{AnnotationSet, LineLabel, TrojanInstance, TrojanType};
use trojanlens::design::DesignUnit;
use trojanlens::detect::{
    build_prompt, detect_sample, DetectionReport, ProviderConfig, ReplayProvider, ReportEntry,
};
use trojanlens::equiv::{compare, tool_available, SimJob, BUILTIN_TEMPLATE, ICARUS_TEMPLATE};
use trojanlens::metrics::{
    aggregate, match_instances, overlap, predicted_labels, render_cost_table, score_sample, tcca, tcca_overall,
    SampleResult,
};
use trojanlens::perturb::{perturb, PerturbConfig};
use trojanlens::rtl::{collect_identifiers, gen::random_source, parse_str, print};
use trojanlens::signatures::{
    integrate_zero_day, merge_refine, rank, weight, Origin, PerfVector, RawSignature, SigKind, SignatureBank,
};
use trojanlens::suite::{BUNDLED, SRAM_MUTANT};

enum Status {
    Pass(String),
    Skipped(String),
}

type Outcome = Result<Status, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn inst(id: &str, ty: TrojanType, t: &[u32], p: &[u32]) -> TrojanInstance {
    TrojanInstance {
        id: id.into(),
        ty,
        trigger_lines: t.iter().copied().collect(),
        payload_lines: p.iter().copied().collect(),
    }
}

fn entry(id: &str, ty: TrojanType, t: &[u32], p: &[u32]) -> ReportEntry {
    ReportEntry {
        entry_id: id.into(),
        claimed_type: ty,
        trigger_lines: t.iter().copied().collect(),
        payload_lines: p.iter().copied().collect(),
        summary: String::new(),
    }
}

fn report(entries: Vec<ReportEntry>) -> DetectionReport {
    DetectionReport {
        entries,
        ..Default::default()
    }
}

/// Six planted Type-2 instances, four found with the right type and two
/// claims on clean lines.
fn criterion_1() -> Outcome {
    use TrojanType::Type2;
    let instances = (1..=6).map(|i| inst(&format!("HT{i}"), Type2, &[2 * i], &[2 * i + 1])).collect();
    let ann = AnnotationSet::new("T", "t.v", instances, 40).map_err(|e| e.to_string())?;
    let mut entries: Vec<_> = (1..=4).map(|i| entry(&format!("E{i}"), Type2, &[2 * i], &[2 * i + 1])).collect();
    entries.push(entry("E5", Type2, &[30], &[31]));
    entries.push(entry("E6", Type2, &[33], &[34]));
    let r = score_sample(&report(entries), &ann);
    let c = r.tcca[&Type2];
    ensure(c.tcca().equals(4, 6), || format!("tcca_2 = {}/{}", c.tp, c.tp + c.fp))?;
    ensure((c.tp, c.fp) == (4, 2), || format!("counts {c:?}"))?;
    ensure(tcca(&r.tcca, Type2) == Ok(4.0 / 6.0), || "tcca value".into())?;
    let shown = tcca_overall(&r.tcca).percent();
    ensure(shown == "66.7%", || format!("rendered {shown}"))?;
    Ok(Status::Pass(format!("tcca_2 = 4/6, {shown}")))
}

/// k = 4 with six entries of which four match, and with two matching.
fn criterion_2() -> Outcome {
    use TrojanType::Type1;
    let instances: Vec<_> = (1..=4).map(|i| inst(&format!("HT{i}"), Type1, &[10 * i], &[10 * i + 1])).collect();
    let ann = AnnotationSet::new("T", "t.v", instances, 60).map_err(|e| e.to_string())?;
    let mut six: Vec<_> = (1..=4).map(|i| entry(&format!("E{i}"), Type1, &[10 * i], &[])).collect();
    six.push(entry("E5", Type1, &[55], &[]));
    six.push(entry("E6", Type1, &[56], &[57]));
    let t = score_sample(&report(six), &ann).tuple;
    ensure((t.k, t.tp, t.fp, t.fn_) == (4, 4, 2, 0), || format!("first scenario {t}"))?;
    let two = vec![entry("E1", Type1, &[10], &[]), entry("E2", Type1, &[], &[21])];
    let t2 = score_sample(&report(two), &ann).tuple;
    ensure((t2.k, t2.tp, t2.fp, t2.fn_) == (4, 2, 0, 2), || format!("second scenario {t2}"))?;
    Ok(Status::Pass(format!("{t} and {t2}")))
}

/// One sample at TLC 1/2, another at 3/3: the suite value is 4/5, not the
/// mean of the two ratios.
fn criterion_3() -> Outcome {
    use TrojanType::Type1;
    let a = AnnotationSet::new("A", "a.v", vec![inst("HT1", Type1, &[1], &[5])], 10).map_err(|e| e.to_string())?;
    let ra = score_sample(&report(vec![entry("E1", Type1, &[1, 2], &[])]), &a);
    let trig: Vec<u32> = (1..=3).collect();
    let b = AnnotationSet::new("B", "b.v", vec![inst("HT1", Type1, &trig, &[9])], 10).map_err(|e| e.to_string())?;
    let rb = score_sample(&report(vec![entry("E1", Type1, &trig, &[])]), &b);
    ensure(ra.ledger.tlc().equals(1, 2) && rb.ledger.tlc().equals(3, 3), || "per-sample TLC".into())?;
    let agg = aggregate(&[ra.clone(), rb.clone()]).map_err(|e| e.to_string())?;
    let mean = (ra.tlc.unwrap() + rb.tlc.unwrap()) / 2.0;
    ensure(agg.ledger.tlc().equals(4, 5), || format!("summed {:?}", agg.ledger.tlc()))?;
    ensure(agg.tlc == Some(0.8), || format!("tlc {:?}", agg.tlc))?;
    ensure(mean == 0.75, || format!("mean {mean}"))?;
    Ok(Status::Pass("summed 0.8, mean would be 0.75".into()))
}

fn ratio_matches(r: trojanlens::metrics::Ratio, want: &Value) -> bool {
    match want.as_array() {
        None => r.den == 0,
        Some(nd) => r.num == nd[0].as_u64().unwrap() && r.den == nd[1].as_u64().unwrap(),
    }
}

fn cells(line: &str) -> Vec<String> {
    line.split('|').map(|c| c.trim().to_string()).collect()
}

/// The CLI run over the bundled suite and authored fixtures against the
/// brute-force oracle's numbers.
fn criterion_4() -> Outcome {
    let t = tempfile::tempdir().map_err(|e| e.to_string())?;
    let samples = bundled_samples(&BUNDLED);
    let refs: Vec<(&Path, &Path, Option<u64>)> = samples.iter().map(|(d, a)| (d.as_path(), a.as_path(), None)).collect();
    let bank = fixtures().join("bank.json");
    let m = write_manifest(t.path(), &refs, "replay", Some(&bank), Some(2));
    let o = run_in(t.path(), &["--config", fixture_config().to_str().unwrap(), "evaluate", m.to_str().unwrap()]);
    ensure(code(&o) == 0, || describe(&o))?;
    let run = single_run(t.path());
    let read = |f: &str| std::fs::read_to_string(run.join(f)).map_err(|e| format!("{f}: {e}"));
    let results: Vec<SampleResult> = serde_json::from_str(&read("results.json")?).map_err(|e| e.to_string())?;
    let agg: trojanlens::metrics::AggregateResult =
        serde_json::from_str(&read("aggregate.json")?).map_err(|e| e.to_string())?;
    let table = read("table.txt")?;
    let expected: Value = serde_json::from_str(
        &std::fs::read_to_string(fixtures().join("oracle/expected.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;

    let want = expected["samples"].as_array().unwrap();
    ensure(results.len() == want.len(), || "sample count".into())?;
    let type_json = |tt: &trojanlens::metrics::TypeTable| -> Value {
        tt.iter()
            .map(|(t, c)| (t.number().to_string(), serde_json::json!({"tp": c.tp, "fp": c.fp})))
            .collect::<serde_json::Map<_, _>>()
            .into()
    };
    let mut checked = 0;
    for (r, w) in results.iter().zip(want) {
        let id = &r.design_id;
        ensure(id == w["design_id"].as_str().unwrap(), || format!("order: {id}"))?;
        ensure(serde_json::to_value(r.tuple).unwrap() == w["tuple"], || format!("{id} tuple {}", r.tuple))?;
        ensure(serde_json::to_value(r.ledger).unwrap() == w["ledger"], || format!("{id} ledger {:?}", r.ledger))?;
        ensure(type_json(&r.tcca) == w["types"], || format!("{id} types"))?;
        ensure(ratio_matches(r.ledger.tlc(), &w["tlc"]), || format!("{id} tlc"))?;
        ensure(ratio_matches(r.ledger.plc(), &w["plc"]), || format!("{id} plc"))?;
        ensure(ratio_matches(r.ledger.ac(), &w["ac"]), || format!("{id} ac"))?;
        ensure(ratio_matches(tcca_overall(&r.tcca), &w["tcca"]), || format!("{id} tcca"))?;
        ensure(r.cost.input_tokens == w["input_tokens"].as_u64(), || format!("{id} input tokens"))?;
        ensure(r.cost.output_tokens == w["output_tokens"].as_u64(), || format!("{id} output tokens"))?;
        ensure(r.cost.monetary_cost == w["monetary_cost"].as_f64(), || format!("{id} cost {:?}", r.cost.monetary_cost))?;
        let row = table.lines().find(|l| cells(l)[0] == *id).ok_or(format!("{id} row missing"))?;
        let want_row: Vec<String> = w["row"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
        ensure(cells(row) == want_row, || format!("{id} row {row}"))?;
        checked += 1;
    }
    let wa = &expected["aggregate"];
    ensure(serde_json::to_value(agg.tuple).unwrap() == wa["tuple"], || "aggregate tuple".into())?;
    ensure(serde_json::to_value(agg.ledger).unwrap() == wa["ledger"], || "aggregate ledger".into())?;
    ensure(type_json(&agg.tcca) == wa["types"], || "aggregate types".into())?;
    ensure(ratio_matches(tcca_overall(&agg.tcca), &wa["tcca"]), || "aggregate tcca".into())?;
    ensure(agg.cost.input_tokens_per_sample == wa["input_tokens_per_sample"].as_f64(), || "input/sample".into())?;
    ensure(agg.cost.output_tokens_per_sample == wa["output_tokens_per_sample"].as_f64(), || "output/sample".into())?;
    ensure(agg.cost.cost_per_sample == wa["cost_per_sample"].as_f64(), || format!("cost/sample {:?}", agg.cost.cost_per_sample))?;
    let row = table.lines().find(|l| l.starts_with("Aggregate")).ok_or("aggregate row missing")?;
    let want_row: Vec<String> = wa["row"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
    ensure(cells(row) == want_row, || format!("aggregate row {row}"))?;
    Ok(Status::Pass(format!("{checked} samples + aggregate match the oracle")))
}

fn quoted(p: &Path) -> String {
    format!("'{}'", p.display())
}

fn equivalence_with(template: &str, testbench: impl Fn(usize) -> std::path::PathBuf) -> Result<(), String> {
    let t = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, b) in BUNDLED.iter().enumerate() {
        let r = perturb(&b.unit(), &PerturbConfig::default()).map_err(|e| e.to_string())?;
        let p = t.path().join(format!("{}_p.v", b.stem));
        std::fs::write(&p, &r.perturbed.text).map_err(|e| e.to_string())?;
        let v = compare(
            &SimJob::new(vec![b.design_path()], testbench(i), template),
            &SimJob::new(vec![p], testbench(i), template),
        )
        .map_err(|e| format!("{}: {e}", b.id))?;
        ensure(v.equal, || format!("{}: {:?}", b.id, v.first_divergence))?;
    }
    let m = t.path().join("mutant.v");
    std::fs::write(&m, SRAM_MUTANT).map_err(|e| e.to_string())?;
    let v = compare(
        &SimJob::new(vec![BUNDLED[0].design_path()], testbench(0), template),
        &SimJob::new(vec![m], testbench(0), template),
    )
    .map_err(|e| e.to_string())?;
    let w = v.first_divergence.ok_or("mutant: no witness")?;
    ensure(!v.equal && w.left != w.right, || "mutant judged equal".into())?;
    Ok(())
}

fn criterion_5() -> Outcome {
    let builtin = BUILTIN_TEMPLATE.replacen("rtlsim", &quoted(&rtlsim()), 1);
    equivalence_with(&builtin, |i| BUNDLED[i].stim_path()).map_err(|e| format!("builtin simulator: {e}"))?;
    if !(tool_available("iverilog") && tool_available("vvp")) {
        return Ok(Status::Skipped(
            "iverilog not installed; builtin simulator route passed (3 designs equal, mutant diverges)".into(),
        ));
    }
    equivalence_with(ICARUS_TEMPLATE, |i| BUNDLED[i].testbench_path()).map_err(|e| format!("iverilog: {e}"))?;
    Ok(Status::Pass("iverilog and builtin simulator agree: 3 equal, mutant diverges".into()))
}

fn criterion_6() -> Outcome {
    let word = regex::Regex::new(r"[A-Za-z_][A-Za-z0-9_$]*").unwrap();
    // Comments are kept as trivia; only code tokens count.
    let comment = regex::Regex::new(r"//[^\n]*|/\*(?s:.*?)\*/").unwrap();
    let mut runs = 0;
    for b in &BUNDLED {
        let d = b.unit();
        let originals: BTreeSet<String> = collect_identifiers(&d.tree).internals.keys().cloned().collect();
        ensure(!originals.is_empty(), || format!("{}: no internals", b.id))?;
        for seed in 0..100 {
            let cfg = PerturbConfig::with_seed(seed);
            let r = perturb(&d, &cfg).map_err(|e| format!("{} seed {seed}: {e}", b.id))?;
            let again = perturb(&d, &cfg).map_err(|e| e.to_string())?;
            ensure(r.perturbed.text == again.perturbed.text, || format!("{} seed {seed}: text differs", b.id))?;
            ensure(r.rename == again.rename && r.line_map == again.line_map, || format!("{} seed {seed}: maps differ", b.id))?;
            let code = comment.replace_all(&r.perturbed.text, " ");
            if let Some(tok) = word.find_iter(&code).find(|m| originals.contains(m.as_str())) {
                return Err(format!("{} seed {seed}: `{}` survives", b.id, tok.as_str()));
            }
            let names: BTreeSet<String> =
                collect_identifiers(&r.tree).all_names().into_iter().map(String::from).collect();
            ensure(names.is_disjoint(&originals), || format!("{} seed {seed}: identifier table", b.id))?;
            runs += 1;
        }
    }
    Ok(Status::Pass(format!("{runs} perturbations deterministic and fully renamed")))
}

fn round_trip(label: &str, src: &str) -> Result<(), String> {
    let t = parse_str(src).map_err(|e| format!("{label}: {e}"))?;
    let out = print(&t);
    let t2 = parse_str(&out).map_err(|e| format!("{label}: reparse {e}"))?;
    ensure(t == t2, || format!("{label}: tree changed"))?;
    ensure(print(&t2) == out, || format!("{label}: formatter not idempotent"))
}

fn criterion_7() -> Outcome {
    for b in &BUNDLED {
        round_trip(b.id, b.source)?;
    }
    round_trip("mutant", SRAM_MUTANT)?;
    for seed in 0..200 {
        round_trip(&format!("fuzz seed {seed}"), &random_source(seed))?;
    }
    Ok(Status::Pass("4 corpus files + 200 generated programs".into()))
}

#[derive(Debug, Clone)]
struct Case {
    loc: u32,
    ann: AnnotationSet,
    report: DetectionReport,
}

type InstSpec = (u8, usize, usize);
type EntrySpec = (u8, Vec<u32>, Vec<u32>);

fn build_case(loc: u32, order: Vec<u32>, specs: Vec<InstSpec>, claims: Vec<EntrySpec>) -> Case {
    let mut pool = order.into_iter().filter(|&l| l <= loc);
    let mut instances = Vec::new();
    for (i, (ty, nt, np)) in specs.into_iter().enumerate() {
        let t: Vec<u32> = pool.by_ref().take(nt).collect();
        let p: Vec<u32> = pool.by_ref().take(np).collect();
        if t.len() < nt || p.len() < np {
            break;
        }
        instances.push(inst(&format!("HT{i}"), TrojanType::from_number(ty as u64).unwrap(), &t, &p));
    }
    let ann = AnnotationSet::new("P", "p.v", instances, loc).unwrap();
    let clamp = |v: Vec<u32>| v.into_iter().map(|l| (l - 1) % loc + 1).collect::<Vec<_>>();
    let entries = claims
        .into_iter()
        .enumerate()
        .map(|(i, (ty, t, p))| entry(&format!("E{i}"), TrojanType::from_number(ty as u64).unwrap(), &clamp(t), &clamp(p)))
        .collect();
    Case {
        loc,
        ann,
        report: report(entries),
    }
}

fn arb_case() -> impl Strategy<Value = Case> {
    let lines = proptest::collection::vec(1u32..=24, 0..4);
    (
        4u32..=24,
        Just((1u32..=24).collect::<Vec<_>>()).prop_shuffle(),
        proptest::collection::vec((1u8..=3, 1usize..=2, 1usize..=2), 0..=6),
        proptest::collection::vec((1u8..=3, lines.clone(), lines), 0..=6),
    )
        .prop_map(|(loc, order, specs, claims)| build_case(loc, order, specs, claims))
}

/// Every matching of maximum size, keeping the one whose pairs rank best
/// under (overlap desc, instance id, instance index, entry index).
fn brute_force(report: &DetectionReport, ann: &AnnotationSet) -> BTreeSet<(usize, usize)> {
    let mut edges = Vec::new();
    for (ei, e) in report.entries.iter().enumerate() {
        for (ii, i) in ann.instances.iter().enumerate() {
            let ov = overlap(e, i);
            if ov > 0 {
                edges.push((ei, ii, ov));
            }
        }
    }
    edges.sort_by(|a, b| {
        b.2.cmp(&a.2)
            .then_with(|| ann.instances[a.1].id.cmp(&ann.instances[b.1].id))
            .then(a.1.cmp(&b.1))
            .then(a.0.cmp(&b.0))
    });
    fn go(
        k: usize,
        edges: &[(usize, usize, usize)],
        used_e: &mut BTreeSet<usize>,
        used_i: &mut BTreeSet<usize>,
        cur: &mut Vec<usize>,
        best: &mut Option<Vec<usize>>,
    ) {
        if k == edges.len() {
            let better = match best {
                None => true,
                Some(b) => cur.len() > b.len() || (cur.len() == b.len() && *cur < *b),
            };
            if better {
                *best = Some(cur.clone());
            }
            return;
        }
        let (e, i, _) = edges[k];
        if !used_e.contains(&e) && !used_i.contains(&i) {
            used_e.insert(e);
            used_i.insert(i);
            cur.push(k);
            go(k + 1, edges, used_e, used_i, cur, best);
            cur.pop();
            used_e.remove(&e);
            used_i.remove(&i);
        }
        go(k + 1, edges, used_e, used_i, cur, best);
    }
    let mut best = None;
    go(0, &edges, &mut BTreeSet::new(), &mut BTreeSet::new(), &mut Vec::new(), &mut best);
    best.unwrap_or_default().into_iter().map(|k| (edges[k].0, edges[k].1)).collect()
}

fn check_case(c: &Case) -> Result<(), TestCaseError> {
    let r = score_sample(&c.report, &c.ann);
    let k = c.ann.k() as u64;
    prop_assert_eq!(r.tuple.tp + r.tuple.fn_, k);
    prop_assert_eq!(r.tuple.tp + r.tuple.fp, c.report.entries.len() as u64);
    for v in [r.tlc, r.plc, r.ac].into_iter().flatten() {
        prop_assert!((0.0..=1.0).contains(&v), "{} out of range", v);
    }
    let truth: Vec<LineLabel> = (1..=c.loc).map(|l| c.ann.label_of(l).unwrap()).collect();
    let same = predicted_labels(&c.report, c.loc) == truth;
    prop_assert_eq!(r.ac == Some(1.0), same);
    let greedy: BTreeSet<(usize, usize)> = match_instances(&c.report, &c.ann).pairs.into_iter().collect();
    prop_assert_eq!(greedy, brute_force(&c.report, &c.ann));
    Ok(())
}

fn criterion_8() -> Outcome {
    let cases = 2000;
    let mut runner = TestRunner::new_with_rng(
        PtConfig {
            cases,
            failure_persistence: None,
            ..PtConfig::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let mut full_ac = 0;
    let counter = std::cell::Cell::new(0u32);
    runner
        .run(&arb_case(), |c| {
            let r = score_sample(&c.report, &c.ann);
            if r.ac == Some(1.0) {
                counter.set(counter.get() + 1);
            }
            check_case(&c)
        })
        .map_err(|e| e.to_string())?;
    full_ac += counter.get();
    // A perfect report is the direct witness for the ac = 1 direction.
    let c = build_case(
        12,
        (1..=12).collect(),
        vec![(1, 1, 2), (3, 2, 1)],
        vec![(1, vec![1], vec![2, 3]), (3, vec![4, 5], vec![6])],
    );
    check_case(&c).map_err(|e| e.to_string())?;
    ensure(score_sample(&c.report, &c.ann).ac == Some(1.0), || "perfect case".into())?;
    Ok(Status::Pass(format!("{cases} generated cases ({full_ac} with AC = 1)")))
}

fn criterion_9() -> Outcome {
    let texts = [
        (SigKind::Trigger, "counter reaches rare value"),
        (SigKind::Trigger, "counter reaches rare value then arms"),
        (SigKind::Trigger, "specific input byte sets sticky flag"),
        (SigKind::Payload, "key bits routed to output"),
        (SigKind::Payload, "key bits routed to debug output"),
        (SigKind::Payload, "output held low while flag set"),
    ];
    let sigs: Vec<RawSignature> = texts.iter().map(|&(k, t)| RawSignature::new(k, t, Origin::Extracted)).collect();
    for theta in [0.2, 0.5, 0.8] {
        let once = merge_refine(&sigs, theta);
        ensure(merge_refine(&once, theta) == once, || format!("not idempotent at theta {theta}"))?;
    }
    let bank = SignatureBank::load(fixtures().join("bank.json")).map_err(|e| e.to_string())?;
    let bs = bank.signatures();
    ensure(merge_refine(&bs, bank.theta) == merge_refine(&merge_refine(&bs, bank.theta), bank.theta), || "fixture bank".into())?;
    let mut by_id = sigs.clone();
    by_id.sort_by(|a, b| a.id.cmp(&b.id));
    ensure(merge_refine(&sigs, 1.0) == by_id, || "theta 1.0 changed distinct texts".into())?;

    let ranked = rank(
        vec![
            (sigs[0].clone(), PerfVector::new(0.75, 0.25, 1.0)),
            (sigs[3].clone(), PerfVector::new(0.5, 0.0, 0.5)),
            (sigs[5].clone(), PerfVector::new(1.0, 0.5, 0.0)),
        ],
        1.0,
        0.5,
    );
    let weights: Vec<f64> = ranked.entries.iter().map(|e| e.weight).collect();
    ensure(weights == [1.0, 0.75, 0.5], || format!("weights {weights:?}"))?;
    ensure(weight(&PerfVector::new(0.75, 0.25, 1.0), 2.0, 0.25) == 0.5, || "weight formula".into())?;
    ensure(ranked.entries[0].sig.id == sigs[0].id, || "rank order".into())?;

    // Zero-day under replay: record heuristic answers, then integrate twice.
    let t = tempfile::tempdir().map_err(|e| e.to_string())?;
    let units: Vec<DesignUnit> = BUNDLED.iter().map(|b| b.unit()).collect();
    let recorder = Recorder {
        replay: ReplayProvider::new("zd", t.path()),
    };
    let recorded = integrate_zero_day(&bank, &units, &recorder).map_err(|e| e.to_string())?;
    let replay = ReplayProvider::new("zd", t.path());
    let once = integrate_zero_day(&bank, &units, &replay).map_err(|e| e.to_string())?;
    let twice = integrate_zero_day(&once, &units, &replay).map_err(|e| e.to_string())?;
    ensure(once == recorded, || "replay differs from the recording".into())?;
    ensure(once.to_json() == twice.to_json(), || "zero-day integration not idempotent".into())?;
    ensure(once.len() > bank.len(), || "zero-day added nothing".into())?;
    Ok(Status::Pass(format!("{} -> {} signatures, stable on repeat", bank.len(), once.len())))
}

fn criterion_10() -> Outcome {
    let t = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = &BUNDLED[1];
    let design = b.unit();
    let empty = SignatureBank::default();
    let fixture = ReplayProvider::new("priced", t.path());
    let text = std::fs::read_to_string(fixtures().join("responses/uart_t200.xml")).map_err(|e| e.to_string())?;
    let (tin, tout) = (2014u64, 268u64);
    fixture
        .record(&build_prompt(&design, &empty, 0), &text, Some((tin, tout)))
        .map_err(|e| e.to_string())?;
    let mut costs = BTreeMap::new();
    for (p_in, p_out) in [(2.5e-6, 1.0e-5), (1.0 / 1024.0, 1.0 / 256.0)] {
        let mut cfg = ProviderConfig::replay("priced", t.path());
        cfg.price_per_input_token = p_in;
        cfg.price_per_output_token = p_out;
        let run = detect_sample(&design, &empty, 0, &cfg, &fixture).map_err(|e| e.to_string())?;
        let want = tin as f64 * p_in + tout as f64 * p_out;
        let got = run.report.cost.monetary_cost.ok_or("cost missing")?;
        ensure(got.to_bits() == want.to_bits(), || format!("cost {got} != {want}"))?;
        ensure(run.report.cost.input_tokens == Some(tin) && run.report.cost.output_tokens == Some(tout), || "tokens".into())?;
        costs.insert(format!("{p_in}"), (got, run));
    }
    let (exact, run) = &costs[&format!("{}", 1.0 / 1024.0)];
    ensure(*exact == 2014.0 / 1024.0 + 268.0 / 256.0, || "dyadic prices".into())?;
    let agg = aggregate(&[score_sample(&run.report, &b.annotations())]).map_err(|e| e.to_string())?;
    let table = render_cost_table(&[("priced", &agg)]);
    let rows: Vec<String> = table.lines().filter(|l| !l.starts_with('-')).map(|l| cells(l)[0].clone()).collect();
    let want = ["Parameter", "Avg Time/Sample (s)", "Input Tokens/Sample", "Output Tokens/Sample", "Cost/Sample ($)"];
    ensure(rows == want, || format!("cost table rows {rows:?}"))?;
    let cost_row = table.lines().find(|l| l.starts_with("Cost/Sample")).unwrap();
    ensure(cells(cost_row)[1] == format!("{exact:.6}"), || cost_row.to_string())?;
    Ok(Status::Pass(format!("{tin}*p_in + {tout}*p_out exact; cost table columns present")))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    // Only the listed criterion numbers when arguments are given.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(Status::Pass(note)) => println!("criterion {n}: PASS ({ms} ms) {note}"),
            Ok(Status::Skipped(why)) => println!("criterion {n}: SKIPPED ({ms} ms) {why}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL ({ms} ms) {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
