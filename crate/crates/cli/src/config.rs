// SPDX-License-Identifier: Apache-2.0

//! The TOML config file. Every key is optional; command-line flags win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use trojanlens::detect::{ProviderConfig, ProviderKind};
use trojanlens::perturb::{parse_passes, PerturbConfig};
use trojanlens::signatures::{DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_THETA};

/// Looked up in the working directory when `--config` is not given.
pub const DEFAULT_CONFIG_FILE: &str = "trojanlens.toml";
pub const DEFAULT_TOP_N: usize = 5;
pub const DEFAULT_IN_FLIGHT: usize = 4;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderEntry {
    pub endpoint: String,
    pub model_id: Option<String>,
    pub temperature: Option<f64>,
    pub top_p: Option<f64>,
    pub max_output_tokens: Option<u32>,
    pub api_key_env: Option<String>,
    pub price_in: Option<f64>,
    pub price_out: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatorSection {
    pub command_template: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbSection {
    pub seed: Option<u64>,
    pub passes: Option<String>,
    pub redundant_density: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectSection {
    pub top_n: Option<usize>,
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureSection {
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub provider: BTreeMap<String, ProviderEntry>,
    #[serde(default)]
    pub simulator: SimulatorSection,
    #[serde(default)]
    pub perturb: PerturbSection,
    #[serde(default)]
    pub detect: DetectSection,
    #[serde(default)]
    pub signatures: SignatureSection,
    /// Directory relative replay endpoints are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Config {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut c: Config = toml::from_str(text)?;
        c.base_dir = base_dir.into();
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Config::parse(&text, base).with_context(|| format!("config {}", path.display()))
    }

    /// The explicit file, else `trojanlens.toml` if present, else defaults.
    pub fn discover(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Config::load(p),
            None if Path::new(DEFAULT_CONFIG_FILE).is_file() => Config::load(Path::new(DEFAULT_CONFIG_FILE)),
            None => Ok(Config {
                base_dir: PathBuf::from("."),
                ..Default::default()
            }),
        }
    }

    /// Resolve a provider by name. `heuristic` is always available unless
    /// the config overrides it.
    pub fn provider(&self, name: &str) -> Result<ProviderConfig> {
        let cfg = match self.provider.get(name) {
            Some(e) => {
                let mut c = ProviderConfig::replay(name, &e.endpoint);
                if c.kind() == ProviderKind::Replay && Path::new(&e.endpoint).is_relative() {
                    c.endpoint = self.base_dir.join(&e.endpoint).display().to_string();
                }
                if let Some(v) = &e.model_id {
                    c.model_id = v.clone();
                }
                if let Some(v) = e.temperature {
                    c.temperature = v;
                }
                if let Some(v) = e.top_p {
                    c.top_p = v;
                }
                if let Some(v) = e.max_output_tokens {
                    c.max_output_tokens = v;
                }
                if let Some(v) = &e.api_key_env {
                    c.api_key_env = v.clone();
                }
                c.price_per_input_token = e.price_in.unwrap_or(0.0);
                c.price_per_output_token = e.price_out.unwrap_or(0.0);
                c
            }
            None if name == "heuristic" => ProviderConfig::heuristic(),
            None => {
                let known: Vec<&str> = self.provider.keys().map(String::as_str).collect();
                bail!("unknown provider `{name}` (configured: {})", known.join(", "))
            }
        };
        if let Err(e) = cfg.validate() {
            bail!("provider `{name}`: {e}");
        }
        Ok(cfg)
    }

    /// Perturbation settings with per-flag overrides applied.
    pub fn perturb_config(&self, seed: Option<u64>, passes: Option<&str>, density: Option<f64>) -> Result<PerturbConfig> {
        let mut c = PerturbConfig::with_seed(seed.or(self.perturb.seed).unwrap_or(0));
        if let Some(p) = passes.or(self.perturb.passes.as_deref()) {
            c.passes = parse_passes(p).map_err(anyhow::Error::msg)?;
        }
        if let Some(d) = density.or(self.perturb.redundant_density) {
            c.redundant_density = d;
        }
        Ok(c)
    }

    pub fn top_n(&self, flag: Option<usize>) -> Option<usize> {
        flag.or(self.detect.top_n)
    }

    pub fn in_flight(&self, flag: Option<usize>) -> usize {
        flag.or(self.detect.max_in_flight).unwrap_or(DEFAULT_IN_FLIGHT).max(1)
    }

    pub fn theta(&self, flag: Option<f64>) -> f64 {
        flag.or(self.signatures.theta).unwrap_or(DEFAULT_THETA)
    }

    pub fn lambda(&self, flag: Option<f64>) -> f64 {
        flag.or(self.signatures.lambda).unwrap_or(DEFAULT_LAMBDA)
    }

    pub fn mu(&self, flag: Option<f64>) -> f64 {
        flag.or(self.signatures.mu).unwrap_or(DEFAULT_MU)
    }
}
