// SPDX-License-Identifier: Apache-2.0

//! Run manifests for `evaluate`, in JSON or TOML.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub design: PathBuf,
    pub annotations: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub suite_id: String,
    pub samples: Vec<SampleSpec>,
    pub provider: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bank: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_n: Option<usize>,
    /// Filled in when the run starts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunManifest {
    /// Parse by extension (`.toml`, otherwise JSON) and resolve relative
    /// paths against the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let mut m: RunManifest = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).with_context(|| format!("manifest {}", path.display()))?
        } else {
            serde_json::from_str(&text).with_context(|| format!("manifest {}", path.display()))?
        };
        let base = path.parent().unwrap_or(Path::new(""));
        for s in &mut m.samples {
            resolve(base, &mut s.design);
            resolve(base, &mut s.annotations);
        }
        if let Some(b) = &mut m.bank {
            resolve(base, b);
        }
        resolve(base, &mut m.output_dir);
        Ok(m)
    }

    /// Referenced inputs must exist before anything is written.
    pub fn check(&self) -> Result<()> {
        if self.suite_id.is_empty() || self.suite_id.contains(['/', '\\']) {
            bail!("suite_id must be a non-empty name without path separators");
        }
        if self.samples.is_empty() {
            bail!("manifest has no samples");
        }
        let mut files: Vec<&Path> = Vec::new();
        for s in &self.samples {
            files.push(&s.design);
            files.push(&s.annotations);
        }
        if let Some(b) = &self.bank {
            files.push(b);
        }
        for f in files {
            if !f.is_file() {
                bail!("{} does not exist", f.display());
            }
        }
        Ok(())
    }
}
