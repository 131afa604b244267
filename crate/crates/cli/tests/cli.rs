// SPDX-License-Identifier: Apache-2.0

mod common;

use std::path::{Path, PathBuf};

use common::*;
use trojanlens::annotations::AnnotationSet;
use trojanlens::design::DesignUnit;
use trojanlens::detect::{build_prompt, parse_report_text, serialize_report, DetectionReport, ReplayProvider, ReportEntry};
use trojanlens::metrics::SampleResult;
use trojanlens::rtl::{parse_str, print};
use trojanlens::signatures::{extraction_prompt, SignatureBank};
use trojanlens::suite::{BUNDLED, SRAM_MUTANT};

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn perturb_all(out: &Path, seed: &str) {
    for b in &BUNDLED {
        let o = run_in(
            out.parent().unwrap(),
            &["perturb", s(&b.design_path()), "--seed", seed, "--out", s(out), "--annotations", s(&b.annotation_path())],
        );
        assert_eq!(code(&o), 0, "{}", describe(&o));
    }
}

#[test]
fn perturb_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    perturb_all(&t.path().join("a"), "42");
    perturb_all(&t.path().join("b"), "42");
    perturb_all(&t.path().join("c"), "43");
    let a = read_tree(&t.path().join("a"));
    assert_eq!(a.len(), 12);
    assert_eq!(a, read_tree(&t.path().join("b")));
    assert_ne!(a, read_tree(&t.path().join("c")));
    // The carried annotations load against the perturbed source.
    let ann = AnnotationSet::load(t.path().join("a/sram_t110.annotations.json")).unwrap();
    assert_eq!(ann.k(), 1);
}

#[test]
fn passes_none_only_formats() {
    let t = tempfile::tempdir().unwrap();
    let b = &BUNDLED[1];
    let o = run_in(t.path(), &["perturb", s(&b.design_path()), "--passes", "none", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let out = std::fs::read_to_string(t.path().join("o/uart_t200.v")).unwrap();
    assert_eq!(out, print(&parse_str(b.source).unwrap()));
    assert_eq!(std::fs::read_to_string(t.path().join("o/uart_t200.rename.json")).unwrap().trim(), "{}");
}

#[test]
fn perturb_exit_codes() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("bad.v"), "module m(input a;\nendmodule\n").unwrap();
    let o = run_in(t.path(), &["perturb", "bad.v", "--out", "o"]);
    assert_eq!(code(&o), 2, "{}", describe(&o));
    let o = run_in(t.path(), &["perturb", s(&BUNDLED[0].design_path()), "--density", "2", "--out", "o"]);
    assert_eq!(code(&o), 3, "{}", describe(&o));
    std::fs::write(t.path().join("ok.v"), "module m;\nendmodule\n").unwrap();
    let o = run_in(t.path(), &["perturb", "ok.v", "--out", "."]);
    assert_eq!(code(&o), 1, "{}", describe(&o));
}

#[test]
fn perturb_then_equivcheck() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("p");
    perturb_all(&out, "7");
    for b in &BUNDLED {
        let o = run_in(
            t.path(),
            &[
                "equivcheck",
                s(&b.design_path()),
                s(&out.join(format!("{}.v", b.stem))),
                "--testbench",
                s(&b.stim_path()),
                "--builtin",
            ],
        );
        assert_eq!(code(&o), 0, "{}: {}", b.id, describe(&o));
        assert_eq!(stdout(&o).trim(), "equal");
    }
    let mutant = t.path().join("mutant.v");
    std::fs::write(&mutant, SRAM_MUTANT).unwrap();
    let b = &BUNDLED[0];
    let o = run_in(
        t.path(),
        &["equivcheck", s(&b.design_path()), s(&mutant), "--testbench", s(&b.stim_path()), "--builtin"],
    );
    assert_eq!(code(&o), 1, "{}", describe(&o));
    assert!(stdout(&o).starts_with("not equal: trace line "), "{}", describe(&o));
}

#[test]
fn rtlsim_prints_the_trace() {
    let b = &BUNDLED[2];
    let o = std::process::Command::new(rtlsim())
        .args([s(&b.stim_path()), s(&b.design_path())])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", describe(&o));
    let tree = parse_str(b.source).unwrap();
    let stim = trojanlens::sim::parse_stim(b.stim).unwrap();
    let want = trojanlens::sim::run_stim(&tree, &stim).unwrap().join("\n") + "\n";
    assert_eq!(stdout(&o), want);
}

fn detect_fixture_suite(out: &Path, top_n: &str) -> std::process::Output {
    let mut args: Vec<String> = vec!["--config".into(), s(&fixture_config()).into(), "detect".into()];
    args.extend(BUNDLED.iter().map(|b| s(&b.design_path()).to_string()));
    args.extend(
        [
            "--provider",
            "replay",
            "--bank",
            s(&fixtures().join("bank.json")),
            "--top-n",
            top_n,
            "--out",
            s(out),
        ]
        .map(String::from),
    );
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    run_in(out.parent().unwrap(), &args)
}

#[test]
fn detect_with_replay_writes_valid_reports() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("det");
    let o = detect_fixture_suite(&out, "2");
    assert_eq!(code(&o), 0, "{}", describe(&o));
    for b in &BUNDLED {
        let dir = out.join(b.id);
        let xml = std::fs::read_to_string(dir.join("report.xml")).unwrap();
        let parsed = parse_report_text(&xml, trojanlens::rtl::count_lines(b.source)).unwrap();
        let json: DetectionReport = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(parsed.entries, json.entries);
        assert!(!json.entries.is_empty());
        assert_eq!(json.provider, "replay");
        let raw = std::fs::read_to_string(dir.join("response.xml")).unwrap();
        let authored = std::fs::read_to_string(fixtures().join("responses").join(format!("{}.xml", b.stem))).unwrap();
        assert_eq!(raw, authored);
    }
    // Without signatures the prompts differ and no fixture matches.
    let o = detect_fixture_suite(&t.path().join("det0"), "0");
    assert_eq!(code(&o), 4, "{}", describe(&o));
    let prompt = std::fs::read_to_string(t.path().join("det0/SRAM-T110/prompt.txt")).unwrap();
    assert!(!prompt.contains("Known Trojan signatures"));
    assert!(prompt.contains("Answer with exactly one XML document"));
    let with = std::fs::read_to_string(out.join("SRAM-T110/prompt.txt")).unwrap();
    assert!(with.contains("Known Trojan signatures"));
}

#[test]
fn live_provider_without_key_exits_4() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[provider.live]\nendpoint = \"https://127.0.0.1:9/v1/chat/completions\"\nmodel_id = \"m\"\napi_key_env = \"TROJANLENS_TEST_UNSET_KEY\"\n",
    )
    .unwrap();
    let o = std::process::Command::new(bin())
        .args(["--config", s(&cfg), "detect", s(&BUNDLED[0].design_path()), "--provider", "live", "--out", "o"])
        .current_dir(t.path())
        .env_remove("TROJANLENS_TEST_UNSET_KEY")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4, "{}", describe(&o));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Auth"), "{}", describe(&o));
}

#[test]
fn fixtures_match_their_prompts() {
    // Re-recording the authored responses lands on the checked-in files.
    let t = tempfile::tempdir().unwrap();
    let bank = SignatureBank::load(fixtures().join("bank.json")).unwrap();
    let rec = ReplayProvider::new("replay", t.path());
    let tokens = [Some((1830, 412)), Some((2014, 268)), None];
    for (b, tk) in BUNDLED.iter().zip(tokens) {
        let text = std::fs::read_to_string(fixtures().join("responses").join(format!("{}.xml", b.stem))).unwrap();
        rec.record(&build_prompt(&b.unit(), &bank, 2), &text, tk).unwrap();
    }
    assert_eq!(read_tree(&t.path().join("replay")), read_tree(&fixtures().join("replay/replay")));
}

#[test]
fn oracle_script_reproduces_expected_values() {
    if !trojanlens::equiv::tool_available("python3") {
        eprintln!("python3 not found; expected.json is checked against the run in the acceptance target only");
        return;
    }
    let o = std::process::Command::new("python3")
        .arg(fixtures().join("oracle/score.py"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", describe(&o));
    let fresh: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let stored: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("oracle/expected.json")).unwrap()).unwrap();
    assert_eq!(fresh, stored);
}

/// Writes replay fixtures that answer each design with its own ground truth.
fn perfect_fixtures(dir: &Path) -> PathBuf {
    let replay = ReplayProvider::new("perfect", dir.join("fx"));
    for b in &BUNDLED {
        let ann = b.annotations();
        let report = DetectionReport {
            entries: ann
                .instances
                .iter()
                .map(|i| ReportEntry {
                    entry_id: i.id.clone(),
                    claimed_type: i.ty,
                    trigger_lines: i.trigger_lines.clone(),
                    payload_lines: i.payload_lines.clone(),
                    summary: "planted".into(),
                })
                .collect(),
            ..Default::default()
        };
        let design = DesignUnit::from_text(ann.design_id.clone(), b.design_path(), b.source).unwrap();
        replay
            .record(&build_prompt(&design, &SignatureBank::default(), 0), &serialize_report(&report), Some((10, 5)))
            .unwrap();
    }
    let cfg = dir.join("perfect.toml");
    std::fs::write(&cfg, "[provider.perfect]\nendpoint = \"fx\"\nprice_in = 0.5\nprice_out = 1.0\n").unwrap();
    cfg
}

fn evaluate(dir: &Path, cfg: &Path, manifest: &Path) -> PathBuf {
    let o = run_in(dir, &["--config", s(cfg), "evaluate", s(manifest)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    single_run(dir)
}

#[test]
fn evaluate_perfect_suite() {
    let t = tempfile::tempdir().unwrap();
    let cfg = perfect_fixtures(t.path());
    let samples = bundled_samples(&BUNDLED);
    let refs: Vec<(&Path, &Path, Option<u64>)> = samples.iter().map(|(d, a)| (d.as_path(), a.as_path(), None)).collect();
    let m = write_manifest(t.path(), &refs, "perfect", None, None);
    let run = evaluate(t.path(), &cfg, &m);
    let agg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("aggregate.json")).unwrap()).unwrap();
    assert_eq!(agg["tuple"], serde_json::json!({"k": 3, "tp": 3, "fp": 0, "fn": 0}));
    assert_eq!(agg["ac"], 1.0);
    assert_eq!(agg["cost"]["cost_per_sample"], 10.0);
    let table = std::fs::read_to_string(run.join("table.txt")).unwrap();
    assert!(table.lines().any(|l| l.starts_with("Aggregate") && l.contains("{3, 3, 0, 0}") && l.contains("100.0%")));
    let cost = std::fs::read_to_string(run.join("cost.txt")).unwrap();
    for col in ["Avg Time/Sample (s)", "Input Tokens/Sample", "Output Tokens/Sample", "Cost/Sample ($)"] {
        assert!(cost.contains(col), "{cost}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["timestamp"].is_string());
    for b in &BUNDLED {
        let dir = run.join("samples").read_dir().unwrap().map(|e| e.unwrap().path()).find(|p| p.ends_with(format!("{:02}-{}", BUNDLED.iter().position(|x| x.id == b.id).unwrap() + 1, b.id))).unwrap();
        for f in ["design.v", "annotations.json", "prompt.json", "prompt.txt", "response.xml", "report.xml", "report.json", "cost.json", "result.json"] {
            assert!(dir.join(f).is_file(), "{}", dir.join(f).display());
        }
    }
}

fn tcca_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let mut text = String::from("module tcca(input a, output y);\n");
    for i in 2..=29 {
        text.push_str(&format!("    wire w{i} = a;\n"));
    }
    text.push_str("    assign y = a;\nendmodule\n");
    let design = dir.join("tcca.v");
    std::fs::write(&design, &text).unwrap();
    let trojans: Vec<_> = (1..=6)
        .map(|i| serde_json::json!({"id": format!("HT{i}"), "type": 2, "trigger_lines": [2 * i], "payload_lines": [2 * i + 1]}))
        .collect();
    let ann = dir.join("tcca.json");
    std::fs::write(&ann, serde_json::json!({"design_id": "TCCA-1", "source": "tcca.v", "trojans": trojans}).to_string()).unwrap();
    let claim = |id: &str, t: u32, p: u32| {
        format!("  <trojan id=\"{id}\" type=\"2\"><trigger><line n=\"{t}\"/></trigger><payload><line n=\"{p}\"/></payload><summary>s</summary></trojan>\n")
    };
    let mut resp = String::from("<detection>\n");
    for i in 1..=4 {
        resp.push_str(&claim(&format!("C{i}"), 2 * i, 2 * i + 1));
    }
    resp.push_str(&claim("C5", 20, 21));
    resp.push_str(&claim("C6", 22, 23));
    resp.push_str("</detection>\n");
    let unit = DesignUnit::from_text("TCCA-1", &design, &text).unwrap();
    ReplayProvider::new("fx", dir.join("replay"))
        .record(&build_prompt(&unit, &SignatureBank::default(), 0), &resp, None)
        .unwrap();
    let cfg = dir.join("c.toml");
    std::fs::write(&cfg, "[provider.fx]\nendpoint = \"replay\"\n").unwrap();
    (design, ann, cfg)
}

#[test]
fn evaluate_renders_tcca_worked_example() {
    let t = tempfile::tempdir().unwrap();
    let (design, ann, cfg) = tcca_fixture(t.path());
    let m = write_manifest(t.path(), &[(&design, &ann, None)], "fx", None, None);
    let o = run_in(t.path(), &["--config", s(&cfg), "evaluate", s(&m)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("TCCA-1")).unwrap();
    assert!(row.contains("{6, 4, 2, 2}") && row.contains("66.7%") && row.contains("4/6 Type-2"), "{row}");
    let cost = out.lines().find(|l| l.starts_with("Cost/Sample ($)")).unwrap();
    assert_eq!(cost.rsplit('|').next().unwrap().trim(), "N/A");
}

#[test]
fn evaluate_is_rerunnable() {
    let t = tempfile::tempdir().unwrap();
    let samples = bundled_samples(&BUNDLED);
    let refs: Vec<(&Path, &Path, Option<u64>)> = samples.iter().map(|(d, a)| (d.as_path(), a.as_path(), None)).collect();
    let bank = fixtures().join("bank.json");
    let mut runs = Vec::new();
    for name in ["one", "two"] {
        let dir = t.path().join(name);
        std::fs::create_dir(&dir).unwrap();
        let m = write_manifest(&dir, &refs, "replay", Some(&bank), Some(2));
        runs.push(evaluate(&dir, &fixture_config(), &m));
    }
    let (a, b) = (read_tree(&runs[0]), read_tree(&runs[1]));
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (k, va) in &a {
        let vb = &b[k];
        if k.ends_with(".json") {
            let mut ja: serde_json::Value = serde_json::from_slice(va).unwrap();
            let mut jb: serde_json::Value = serde_json::from_slice(vb).unwrap();
            strip_timing(&mut ja);
            strip_timing(&mut jb);
            if k == "manifest.json" {
                ja["output_dir"] = serde_json::Value::Null;
                jb["output_dir"] = serde_json::Value::Null;
            }
            assert_eq!(ja, jb, "{k}");
        } else if k != "cost.txt" {
            assert_eq!(va, vb, "{k}");
        }
    }
}

#[test]
fn evaluate_perturbed_samples_with_heuristic() {
    let t = tempfile::tempdir().unwrap();
    let samples = bundled_samples(&BUNDLED);
    let mut refs: Vec<(&Path, &Path, Option<u64>)> = samples.iter().map(|(d, a)| (d.as_path(), a.as_path(), Some(5))).collect();
    refs.push((samples[0].0.as_path(), samples[0].1.as_path(), None));
    let m = write_manifest(t.path(), &refs, "heuristic", None, None);
    let cfg = t.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let run = evaluate(t.path(), &cfg, &m);
    let results: Vec<SampleResult> = serde_json::from_str(&std::fs::read_to_string(run.join("results.json")).unwrap()).unwrap();
    assert_eq!(results.len(), 4);
    for r in &results {
        assert_eq!(r.tuple.k, 1);
        assert_eq!(r.tuple.tp + r.tuple.fn_, 1);
    }
    let sram = run.join("samples/01-SRAM-T110");
    let text = std::fs::read_to_string(sram.join("design.v")).unwrap();
    assert_ne!(text, BUNDLED[0].source);
    let ann = AnnotationSet::load(sram.join("annotations.json")).unwrap();
    assert_eq!(ann.loc, trojanlens::rtl::count_lines(&text));
    assert!(sram.join("linemap.json").is_file() && sram.join("rename.json").is_file());
    assert!(!run.join("samples/04-SRAM-T110/linemap.json").exists());
}

#[test]
fn evaluate_exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let b = &BUNDLED[0];
    // Missing inputs are rejected before a run directory exists.
    let m = write_manifest(t.path(), &[(Path::new("/no/such.v"), &b.annotation_path(), None)], "heuristic", None, None);
    let o = run_in(t.path(), &["evaluate", s(&m)]);
    assert_eq!(code(&o), 1, "{}", describe(&o));
    assert!(!t.path().join("runs").exists());
    // A response naming a line past the end of the design is a schema error.
    let cfg = t.path().join("c.toml");
    std::fs::write(&cfg, "[provider.fx]\nendpoint = \"replay\"\n").unwrap();
    let design = b.unit();
    let bad = "<detection><trojan id=\"X\" type=\"1\"><trigger><line n=\"999\"/></trigger><payload/><summary>s</summary></trojan></detection>";
    ReplayProvider::new("fx", t.path().join("replay"))
        .record(&build_prompt(&design, &SignatureBank::default(), 0), bad, None)
        .unwrap();
    let m = write_manifest(t.path(), &[(&b.design_path(), &b.annotation_path(), None)], "fx", None, None);
    let o = run_in(t.path(), &["--config", s(&cfg), "evaluate", s(&m)]);
    assert_eq!(code(&o), 5, "{}", describe(&o));
    let run = single_run(t.path());
    assert_eq!(std::fs::read_to_string(run.join("samples/01-SRAM-T110/response.xml")).unwrap(), bad);
}

fn bank_ids(p: &Path) -> Vec<(String, f64)> {
    SignatureBank::load(p).unwrap().entries.iter().map(|e| (e.sig.id.clone(), e.weight)).collect()
}

#[test]
fn signatures_merge_and_rank() {
    let t = tempfile::tempdir().unwrap();
    let bank = fixtures().join("bank.json");
    let merged = t.path().join("merged.json");
    let o = run_in(t.path(), &["signatures", "merge", s(&bank), "--theta", "1.0", "--out", s(&merged)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let (a, b) = (SignatureBank::load(&bank).unwrap(), SignatureBank::load(&merged).unwrap());
    assert_eq!(a.entries, b.entries);
    assert_eq!(b.theta, 1.0);

    let flat = t.path().join("flat.json");
    let o = run_in(t.path(), &["signatures", "rank", s(&bank), "--lambda", "0", "--mu", "0", "--out", s(&flat)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let back = t.path().join("back.json");
    let o = run_in(t.path(), &["signatures", "rank", s(&flat), "--lambda", "1", "--mu", "0.5", "--out", s(&back)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let flat_ids = bank_ids(&flat);
    assert_ne!(flat_ids, bank_ids(&bank));
    assert_eq!(bank_ids(&back), bank_ids(&bank));
    for e in SignatureBank::load(&back).unwrap().entries {
        assert_eq!(e.weight, e.perf.alpha - e.perf.beta + 0.5 * e.perf.gamma);
    }
    // alpha alone orders the flat ranking.
    let flat_bank = SignatureBank::load(&flat).unwrap();
    assert!(flat_bank.entries.windows(2).all(|w| w[0].perf.alpha >= w[1].perf.alpha));
}

#[test]
fn signatures_generate_is_deterministic_under_replay() {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path();
    std::fs::write(dir.join("infected.v"), BUNDLED[0].source).unwrap();
    std::fs::write(dir.join("uart.v"), BUNDLED[1].source).unwrap();
    std::fs::write(dir.join("clean.v"), "module sram_ctrl(input clk, output reg [7:0] dout);\n    always @(posedge clk)\n        dout <= 8'd0;\nendmodule\n").unwrap();
    std::fs::write(
        dir.join("corpus.json"),
        r#"{"samples": [
            {"id": "SRAM-T110", "clean": "clean.v", "infected": "infected.v", "meta": "leaks memory"},
            {"id": "UART-T200", "clean": "clean.v", "infected": "uart.v"}
        ]}"#,
    )
    .unwrap();
    // Record heuristic answers for the extraction prompts.
    let recorder = Recorder {
        replay: ReplayProvider::new("rp", dir.join("fx")),
    };
    let corpus = trojanlens::signatures::TrainingCorpus::load(dir.join("corpus.json")).unwrap();
    trojanlens::signatures::extract(&corpus, &recorder).unwrap();
    let clean_file = trojanlens::rtl::SourceFile::load(dir.join("clean.v")).unwrap();
    assert!(recorder
        .replay
        .fixture_path(&extraction_prompt(Some(&clean_file), &corpus.samples[0].infected, "leaks memory", &[]))
        .is_file());
    let cfg = dir.join("c.toml");
    std::fs::write(&cfg, "[provider.rp]\nendpoint = \"fx\"\n").unwrap();
    for out in ["a.json", "b.json"] {
        let o = run_in(dir, &["--config", s(&cfg), "signatures", "generate", "--corpus", "corpus.json", "--provider", "rp", "--out", out]);
        assert_eq!(code(&o), 0, "{}", describe(&o));
    }
    let a = std::fs::read(dir.join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.join("b.json")).unwrap());
    assert!(!SignatureBank::load(dir.join("a.json")).unwrap().is_empty());
}

#[test]
fn signatures_zero_day_validate_iterate() {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path();
    let bank = fixtures().join("bank.json");
    let once = dir.join("once.json");
    let dp = BUNDLED[2].design_path();
    let d = s(&dp);
    let twice = dir.join("twice.json");
    let o = run_in(dir, &["signatures", "zero-day", s(&bank), d, "--out", s(&once)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let o = run_in(dir, &["signatures", "zero-day", s(&once), d, "--out", s(&twice)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    assert_eq!(std::fs::read(&once).unwrap(), std::fs::read(&twice).unwrap());
    assert!(SignatureBank::load(&once).unwrap().len() > SignatureBank::load(&bank).unwrap().len());

    let samples = bundled_samples(&BUNDLED);
    let refs: Vec<(&Path, &Path, Option<u64>)> = samples.iter().map(|(d, a)| (d.as_path(), a.as_path(), None)).collect();
    let m = write_manifest(dir, &refs, "heuristic", None, None);
    let validated = dir.join("validated.json");
    let o = run_in(dir, &["signatures", "validate", s(&once), "--val", s(&m), "--out", s(&validated)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let vb = SignatureBank::load(&validated).unwrap();
    assert!(vb.entries.iter().all(|e| e.perf.is_valid()));
    let iterated = dir.join("iterated.json");
    let o = run_in(dir, &["signatures", "iterate", s(&validated), "--val", s(&m), "--top-n", "1", "--out", s(&iterated)]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    SignatureBank::load(&iterated).unwrap();
}

#[test]
fn record_writes_a_fixture() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("c.toml");
    std::fs::write(&cfg, "[provider.fx]\nendpoint = \"fx\"\nprice_in = 0.25\nprice_out = 0.5\n").unwrap();
    let resp = t.path().join("r.xml");
    std::fs::write(&resp, "<detection/>").unwrap();
    let b = &BUNDLED[1];
    let o = run_in(t.path(), &["--config", s(&cfg), "record", s(&b.design_path()), "--provider", "fx", "--response", s(&resp), "--tokens", "8:4"]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let o = run_in(t.path(), &["--config", s(&cfg), "detect", s(&b.design_path()), "--provider", "fx", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", describe(&o));
    let cost: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(t.path().join("o/UART-T200/cost.json")).unwrap()).unwrap();
    assert_eq!(cost["monetary_cost"], 4.0);
    let o = run_in(t.path(), &["record", s(&b.design_path()), "--provider", "heuristic", "--response", s(&resp)]);
    assert_eq!(code(&o), 1, "{}", describe(&o));
}
