// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Result;
use clap::Args;
use trojanlens::equiv::{compare, SimJob, BUILTIN_TEMPLATE, ICARUS_TEMPLATE};

use crate::config::Config;
use crate::exit;

#[derive(Debug, Args)]
pub struct EquivArgs {
    pub original: PathBuf,
    pub perturbed: PathBuf,
    /// Testbench for the external simulator, or a stimulus script with
    /// `--builtin`.
    #[arg(long)]
    pub testbench: PathBuf,
    /// Shell template with `{sources}`, `{testbench}` and `{workdir}`.
    #[arg(long, conflicts_with = "builtin")]
    pub template: Option<String>,
    /// Use the bundled `rtlsim` simulator.
    #[arg(long)]
    pub builtin: bool,
    /// Seconds per simulation.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
    /// Extra regexes for trace lines to drop.
    #[arg(long)]
    pub ignore: Vec<String>,
}

fn quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

/// The builtin template with `rtlsim` resolved next to this executable
/// when it is there.
pub fn builtin_template() -> String {
    let sibling = std::env::current_exe()
        .ok()
        .and_then(|e| e.parent().map(|d| d.join("rtlsim")))
        .filter(|p| p.is_file());
    match sibling {
        Some(p) => BUILTIN_TEMPLATE.replacen("rtlsim", &quote(&p), 1),
        None => BUILTIN_TEMPLATE.to_string(),
    }
}

/// Exit 0 when the traces agree and 1 with a witness when they differ.
pub fn run(cfg: &Config, a: &EquivArgs) -> Result<i32> {
    let template = if a.builtin {
        builtin_template()
    } else {
        a.template
            .clone()
            .or_else(|| cfg.simulator.command_template.clone())
            .unwrap_or_else(|| ICARUS_TEMPLATE.to_string())
    };
    let job = |src: &Path| {
        let mut j = SimJob::new(vec![src.to_path_buf()], &a.testbench, &template);
        j.timeout = Duration::from_secs(a.timeout);
        j.ignore_patterns.extend(a.ignore.iter().cloned());
        j
    };
    let v = compare(&job(&a.original), &job(&a.perturbed))?;
    match v.first_divergence {
        None => {
            println!("equal");
            Ok(exit::OK)
        }
        Some(d) => {
            let show = |s: &Option<String>| s.clone().unwrap_or_else(|| "<end of trace>".into());
            println!(
                "not equal: trace line {}\n  original:  {}\n  perturbed: {}",
                d.line_no,
                show(&d.left),
                show(&d.right)
            );
            Ok(exit::OTHER)
        }
    }
}
