// SPDX-License-Identifier: Apache-2.0

//! Functional equivalence by comparing simulator output traces.
//!
//! A [`SimJob`] is a shell command template with `{sources}`,
//! `{testbench}` and `{workdir}` placeholders. The command runs in a fresh
//! temporary directory; its stdout, minus lines matching the ignore
//! patterns, is the trace.

use std::fs::File;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Icarus Verilog, compile then run. The compiled image lands in the job's
/// working directory, which is also the current directory.
pub const ICARUS_TEMPLATE: &str = "iverilog -g2005 -o {workdir}/sim.vvp {testbench} {sources} && vvp -n sim.vvp";

/// The bundled simulator; the testbench is a stimulus script.
pub const BUILTIN_TEMPLATE: &str = "rtlsim --workdir {workdir} {testbench} {sources}";

/// Simulator chatter that is not part of the trace.
pub const DEFAULT_IGNORE: &[&str] = &[r"\$finish called at", r"^VCD info:", r"^WARNING: "];

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimJob {
    pub sources: Vec<PathBuf>,
    pub testbench: PathBuf,
    pub command_template: String,
    pub timeout: Duration,
    pub ignore_patterns: Vec<String>,
}

impl SimJob {
    pub fn new(sources: Vec<PathBuf>, testbench: impl Into<PathBuf>, command_template: &str) -> Self {
        SimJob {
            sources,
            testbench: testbench.into(),
            command_template: command_template.to_string(),
            timeout: DEFAULT_TIMEOUT,
            ignore_patterns: DEFAULT_IGNORE.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), EquivError> {
        for p in ["{sources}", "{testbench}", "{workdir}"] {
            let n = self.command_template.matches(p).count();
            if n != 1 {
                return Err(EquivError::Config(format!(
                    "command template must contain {p} exactly once, found {n}"
                )));
            }
        }
        for p in &self.ignore_patterns {
            Regex::new(p).map_err(|e| EquivError::Config(format!("bad ignore pattern `{p}`: {e}")))?;
        }
        if self.sources.is_empty() {
            return Err(EquivError::Config("no source files".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub stdout_lines: Vec<String>,
    pub exit_code: i32,
    /// Seconds.
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// 1-based line of the filtered trace.
    pub line_no: usize,
    /// `None` when that side's trace already ended.
    pub left: Option<String>,
    pub right: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivVerdict {
    pub equal: bool,
    pub first_divergence: Option<Divergence>,
}

#[derive(Debug, thiserror::Error)]
pub enum EquivError {
    #[error("simulation config: {0}")]
    Config(String),
    #[error("testbench is not deterministic: {0}")]
    Lint(String),
    #[error("simulation timed out after {0:?}")]
    Timeout(Duration),
    #[error("simulation failed with exit code {code}: {stderr}")]
    Failure { code: i32, stderr: String },
    #[error("simulator not found: {0}")]
    ToolNotFound(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

fn absolute(p: &Path) -> std::io::Result<PathBuf> {
    if !p.exists() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} does not exist", p.display()),
        ));
    }
    p.canonicalize()
}

/// `$random` and `$urandom` calls without a seed argument.
pub fn lint_testbench(text: &str) -> Result<(), EquivError> {
    let re = Regex::new(r"\$(u?random)\b(\s*\(\s*\))?").expect("valid regex");
    for (i, line) in text.lines().enumerate() {
        let code = line.split("//").next().unwrap_or("");
        for m in re.captures_iter(code) {
            let rest = &code[m.get(0).expect("whole match").end()..];
            if m.get(2).is_some() || !rest.trim_start().starts_with('(') {
                return Err(EquivError::Lint(format!("line {}: unseeded ${}", i + 1, &m[1])));
            }
        }
    }
    Ok(())
}

fn excerpt(text: &str) -> String {
    let lines: Vec<&str> = text.lines().rev().take(10).collect();
    lines.into_iter().rev().collect::<Vec<_>>().join("\n")
}

fn kill_group(pid: u32) {
    // SAFETY: plain syscall on a process group we created.
    unsafe {
        libc::killpg(pid as libc::pid_t, libc::SIGKILL);
    }
}

pub fn run_sim(job: &SimJob) -> Result<SimOutput, EquivError> {
    job.validate()?;
    let testbench = absolute(&job.testbench)?;
    let tb_text = std::fs::read_to_string(&testbench)?;
    lint_testbench(&tb_text)?;
    let sources = job
        .sources
        .iter()
        .map(|p| absolute(p))
        .collect::<Result<Vec<_>, _>>()?;
    let ignore: Vec<Regex> = job
        .ignore_patterns
        .iter()
        .map(|p| Regex::new(p).expect("validated"))
        .collect();

    let work = tempfile::tempdir()?;
    let cmd = job
        .command_template
        .replace("{sources}", &sources.iter().map(|p| quote(p)).collect::<Vec<_>>().join(" "))
        .replace("{testbench}", &quote(&testbench))
        .replace("{workdir}", &quote(work.path()));
    let out_path = work.path().join(".stdout");
    let err_path = work.path().join(".stderr");

    let start = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .current_dir(work.path())
        .stdin(Stdio::null())
        .stdout(File::create(&out_path)?)
        .stderr(File::create(&err_path)?)
        .process_group(0)
        .spawn()?;
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break s;
        }
        if start.elapsed() >= job.timeout {
            kill_group(child.id());
            let _ = child.wait();
            return Err(EquivError::Timeout(job.timeout));
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    let duration = start.elapsed().as_secs_f64();
    let stdout = std::fs::read_to_string(&out_path)?;
    let stderr = std::fs::read_to_string(&err_path).unwrap_or_default();
    let code = status.code().unwrap_or(-1);
    if code == 127 {
        return Err(EquivError::ToolNotFound(excerpt(&stderr)));
    }
    if code != 0 {
        return Err(EquivError::Failure {
            code,
            stderr: excerpt(&stderr),
        });
    }
    Ok(SimOutput {
        stdout_lines: stdout
            .lines()
            .filter(|l| !ignore.iter().any(|r| r.is_match(l)))
            .map(str::to_string)
            .collect(),
        exit_code: code,
        duration,
    })
}

/// First position where two traces differ.
pub fn diff_traces(left: &[String], right: &[String]) -> Option<Divergence> {
    let n = left.len().max(right.len());
    (0..n).find(|&i| left.get(i) != right.get(i)).map(|i| Divergence {
        line_no: i + 1,
        left: left.get(i).cloned(),
        right: right.get(i).cloned(),
    })
}

pub fn compare(original: &SimJob, perturbed: &SimJob) -> Result<EquivVerdict, EquivError> {
    if absolute(&original.testbench)? != absolute(&perturbed.testbench)? {
        return Err(EquivError::Config("both jobs must use the same testbench".into()));
    }
    let a = run_sim(original)?;
    let b = run_sim(perturbed)?;
    let first_divergence = diff_traces(&a.stdout_lines, &b.stdout_lines);
    Ok(EquivVerdict {
        equal: first_divergence.is_none(),
        first_divergence,
    })
}

/// Is a command resolvable on `PATH`?
pub fn tool_available(name: &str) -> bool {
    std::env::var_os("PATH")
        .map(|paths| std::env::split_paths(&paths).any(|d| d.join(name).is_file()))
        .unwrap_or(false)
}
