// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::json;
use trojanlens::detect::{DetectionProvider, HeuristicProvider, PromptBundle, ProviderError, RawResponse, ReplayProvider};
use trojanlens::suite::BundledDesign;

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_trojanlens"))
}

pub fn rtlsim() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_rtlsim"))
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn fixture_config() -> PathBuf {
    fixtures().join("trojanlens.toml")
}

/// Run the CLI in `cwd` with no config discovery surprises.
pub fn run_in(cwd: &Path, args: &[&str]) -> Output {
    Command::new(bin()).args(args).current_dir(cwd).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn describe(o: &Output) -> String {
    format!(
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    )
}

/// JSON manifest with absolute paths; returns its path.
pub fn write_manifest(
    dir: &Path,
    samples: &[(&Path, &Path, Option<u64>)],
    provider: &str,
    bank: Option<&Path>,
    top_n: Option<usize>,
) -> PathBuf {
    let samples: Vec<_> = samples
        .iter()
        .map(|(d, a, s)| {
            let mut v = json!({"design": d, "annotations": a});
            if let Some(s) = s {
                v["perturb_seed"] = json!(s);
            }
            v
        })
        .collect();
    let mut m = json!({
        "suite_id": "toy",
        "samples": samples,
        "provider": provider,
        "output_dir": dir.join("runs"),
    });
    if let Some(b) = bank {
        m["bank"] = json!(b);
    }
    if let Some(n) = top_n {
        m["top_n"] = json!(n);
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&m).unwrap()).unwrap();
    path
}

pub fn bundled_samples(b: &[BundledDesign]) -> Vec<(PathBuf, PathBuf)> {
    b.iter().map(|d| (d.design_path(), d.annotation_path())).collect()
}

/// The only run directory under `<dir>/runs`.
pub fn single_run(dir: &Path) -> PathBuf {
    let runs: Vec<PathBuf> = std::fs::read_dir(dir.join("runs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(runs.len(), 1, "{runs:?}");
    runs.into_iter().next().unwrap()
}

/// Relative path to contents for every file below `root`.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Answers with the heuristic provider and stores every answer as a
/// replay fixture.
pub struct Recorder {
    pub replay: ReplayProvider,
}

impl DetectionProvider for Recorder {
    fn name(&self) -> &str {
        "recorder"
    }

    fn invoke(&self, bundle: &PromptBundle) -> Result<RawResponse, ProviderError> {
        let text = HeuristicProvider::respond(bundle);
        self.replay.record(bundle, &text, Some((100, 10))).unwrap();
        Ok(RawResponse {
            text,
            input_tokens: Some(100),
            output_tokens: Some(10),
            wall_time: 0.0,
        })
    }
}

/// Drop the timing fields so runs can be compared byte for byte.
pub fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            for k in ["wall_time", "total_time", "avg_time", "timestamp"] {
                m.remove(k);
            }
            m.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
