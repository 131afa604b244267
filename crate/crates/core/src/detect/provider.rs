// SPDX-License-Identifier: Apache-2.0

//! Detection backends.
//!
//! * replay: fixture files keyed by the prompt digest,
//!   `<endpoint>/<name>/<digest>.xml`, with optional token counts in
//!   `<digest>.tokens.json`.
//! * heuristic: the offline rule set in [`super::heuristic`].
//! * http: a chat-completion endpoint. Gemini endpoints get their own
//!   request shape, everything else speaks the OpenAI wire format.

use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::heuristic;
use super::prompt::{PromptBundle, PromptTask};
use super::report::{serialize_report, DetectionReport};
use crate::rtl::parse_str;

fn default_one() -> f64 {
    1.0
}

fn default_max_tokens() -> u32 {
    4096
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub name: String,
    /// URL for live providers, fixture root for replay, `builtin:heuristic`.
    pub endpoint: String,
    #[serde(default)]
    pub model_id: String,
    #[serde(default = "default_one")]
    pub temperature: f64,
    #[serde(default = "default_one")]
    pub top_p: f64,
    #[serde(default = "default_max_tokens")]
    pub max_output_tokens: u32,
    #[serde(default)]
    pub api_key_env: String,
    #[serde(default, alias = "price_in")]
    pub price_per_input_token: f64,
    #[serde(default, alias = "price_out")]
    pub price_per_output_token: f64,
}

impl ProviderConfig {
    pub fn replay(name: impl Into<String>, fixtures: impl AsRef<Path>) -> Self {
        ProviderConfig {
            name: name.into(),
            endpoint: fixtures.as_ref().display().to_string(),
            model_id: String::new(),
            temperature: 1.0,
            top_p: 1.0,
            max_output_tokens: default_max_tokens(),
            api_key_env: String::new(),
            price_per_input_token: 0.0,
            price_per_output_token: 0.0,
        }
    }

    pub fn heuristic() -> Self {
        ProviderConfig {
            endpoint: HEURISTIC_ENDPOINT.to_string(),
            ..ProviderConfig::replay("heuristic", "")
        }
    }

    pub fn kind(&self) -> ProviderKind {
        if self.endpoint == HEURISTIC_ENDPOINT {
            ProviderKind::Heuristic
        } else if self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://") {
            ProviderKind::Http
        } else {
            ProviderKind::Replay
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.name.is_empty() {
            return Err("provider name is empty".into());
        }
        if !(self.temperature >= 0.0) {
            return Err(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(format!("top_p must be in (0, 1], got {}", self.top_p));
        }
        if self.price_per_input_token < 0.0 || self.price_per_output_token < 0.0 {
            return Err("prices must be >= 0".into());
        }
        Ok(())
    }
}

pub const HEURISTIC_ENDPOINT: &str = "builtin:heuristic";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    Replay,
    Heuristic,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub text: String,
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
    /// Seconds, retries included.
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderErrorKind {
    Auth,
    RateLimit,
    Transport,
    FixtureMissing,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("provider error ({kind:?}): {detail}")]
pub struct ProviderError {
    pub kind: ProviderErrorKind,
    pub detail: String,
}

impl ProviderError {
    pub fn new(kind: ProviderErrorKind, detail: impl Into<String>) -> Self {
        ProviderError {
            kind,
            detail: detail.into(),
        }
    }
}

pub trait DetectionProvider: Send + Sync {
    fn name(&self) -> &str;
    fn invoke(&self, bundle: &PromptBundle) -> Result<RawResponse, ProviderError>;
}

/// Backend for a config.
pub fn connect(cfg: &ProviderConfig) -> Box<dyn DetectionProvider> {
    match cfg.kind() {
        ProviderKind::Replay => Box::new(ReplayProvider::new(&cfg.name, &cfg.endpoint)),
        ProviderKind::Heuristic => Box::new(HeuristicProvider {
            name: cfg.name.clone(),
        }),
        ProviderKind::Http => Box::new(HttpProvider::new(cfg.clone())),
    }
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64().max(1e-9)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TokenCounts {
    input_tokens: Option<u64>,
    output_tokens: Option<u64>,
}

pub struct ReplayProvider {
    name: String,
    dir: PathBuf,
}

impl ReplayProvider {
    /// Fixtures live in `<root>/<name>/`.
    pub fn new(name: &str, root: impl AsRef<Path>) -> Self {
        ReplayProvider {
            name: name.to_string(),
            dir: root.as_ref().join(name),
        }
    }

    pub fn fixture_path(&self, bundle: &PromptBundle) -> PathBuf {
        self.dir.join(format!("{}.xml", bundle.digest()))
    }

    /// Store a response for `bundle`.
    pub fn record(&self, bundle: &PromptBundle, text: &str, tokens: Option<(u64, u64)>) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.fixture_path(bundle);
        std::fs::write(&path, text)?;
        let sidecar = path.with_extension("tokens.json");
        if sidecar.exists() {
            std::fs::remove_file(&sidecar)?;
        }
        if let Some((i, o)) = tokens {
            let counts = TokenCounts {
                input_tokens: Some(i),
                output_tokens: Some(o),
            };
            std::fs::write(
                sidecar,
                serde_json::to_string_pretty(&counts).expect("serializes"),
            )?;
        }
        Ok(path)
    }
}

impl DetectionProvider for ReplayProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn invoke(&self, bundle: &PromptBundle) -> Result<RawResponse, ProviderError> {
        let start = Instant::now();
        let path = self.fixture_path(bundle);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ProviderError::new(ProviderErrorKind::FixtureMissing, format!("{}: {e}", path.display())))?;
        let counts = match std::fs::read_to_string(path.with_extension("tokens.json")) {
            Ok(s) => serde_json::from_str::<TokenCounts>(&s).map_err(|e| {
                ProviderError::new(ProviderErrorKind::FixtureMissing, format!("bad token file for {}: {e}", path.display()))
            })?,
            Err(_) => TokenCounts {
                input_tokens: None,
                output_tokens: None,
            },
        };
        Ok(RawResponse {
            text,
            input_tokens: counts.input_tokens,
            output_tokens: counts.output_tokens,
            wall_time: elapsed(start),
        })
    }
}

pub struct HeuristicProvider {
    pub name: String,
}

impl HeuristicProvider {
    pub fn respond(bundle: &PromptBundle) -> String {
        let Ok(tree) = parse_str(&bundle.source) else {
            return match bundle.task {
                PromptTask::Detection => "<detection/>\n".to_string(),
                _ => "<signatures/>\n".to_string(),
            };
        };
        let findings = heuristic::analyze(&tree);
        match bundle.task {
            PromptTask::Detection => serialize_report(&DetectionReport {
                entries: heuristic::entries(&findings),
                ..DetectionReport::default()
            }),
            PromptTask::Extraction | PromptTask::ZeroDay => {
                crate::signatures::serialize_signature_list(&heuristic::signatures(&findings))
            }
        }
    }
}

impl DetectionProvider for HeuristicProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn invoke(&self, bundle: &PromptBundle) -> Result<RawResponse, ProviderError> {
        let start = Instant::now();
        let text = HeuristicProvider::respond(bundle);
        Ok(RawResponse {
            text,
            input_tokens: None,
            output_tokens: None,
            wall_time: elapsed(start),
        })
    }
}

pub struct HttpProvider {
    cfg: ProviderConfig,
    backoff: Vec<Duration>,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(cfg: ProviderConfig) -> Self {
        HttpProvider {
            cfg,
            backoff: [1, 2, 4].into_iter().map(Duration::from_secs).collect(),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(300))
                .build()
                .expect("http client"),
        }
    }

    /// Replace the retry delays; one retry per entry.
    pub fn with_backoff(mut self, backoff: Vec<Duration>) -> Self {
        self.backoff = backoff;
        self
    }

    fn is_gemini(&self) -> bool {
        self.cfg.endpoint.contains("generativelanguage.googleapis.com")
    }

    fn body(&self, bundle: &PromptBundle) -> Value {
        let c = &self.cfg;
        if self.is_gemini() {
            json!({
                "systemInstruction": {"parts": [{"text": bundle.system_text}]},
                "contents": [{"role": "user", "parts": [{"text": bundle.user_text()}]}],
                "generationConfig": {
                    "temperature": c.temperature,
                    "topP": c.top_p,
                    "maxOutputTokens": c.max_output_tokens,
                },
            })
        } else {
            json!({
                "model": c.model_id,
                "messages": [
                    {"role": "system", "content": bundle.system_text},
                    {"role": "user", "content": bundle.user_text()},
                ],
                "temperature": c.temperature,
                "top_p": c.top_p,
                "max_tokens": c.max_output_tokens,
            })
        }
    }

    fn extract(&self, v: &Value) -> Result<(String, Option<u64>, Option<u64>), ProviderError> {
        let bad = || ProviderError::new(ProviderErrorKind::Transport, format!("unexpected response shape: {v}"));
        if self.is_gemini() {
            let parts = v["candidates"][0]["content"]["parts"].as_array().ok_or_else(bad)?;
            let text: String = parts.iter().filter_map(|p| p["text"].as_str()).collect();
            let u = &v["usageMetadata"];
            Ok((text, u["promptTokenCount"].as_u64(), u["candidatesTokenCount"].as_u64()))
        } else {
            let text = v["choices"][0]["message"]["content"].as_str().ok_or_else(bad)?;
            let u = &v["usage"];
            Ok((text.to_string(), u["prompt_tokens"].as_u64(), u["completion_tokens"].as_u64()))
        }
    }

    /// One request. The flag on errors says whether a retry may help.
    fn attempt(&self, key: &str, body: &Value) -> Result<(String, Option<u64>, Option<u64>), (ProviderError, bool)> {
        let mut req = self.client.post(&self.cfg.endpoint).json(body);
        req = if self.is_gemini() {
            req.header("x-goog-api-key", key)
        } else {
            req.bearer_auth(key)
        };
        let transport = |e: reqwest::Error| (ProviderError::new(ProviderErrorKind::Transport, e.to_string()), true);
        let resp = req.send().map_err(transport)?;
        let status = resp.status();
        let text = resp.text().map_err(transport)?;
        let kind = match status.as_u16() {
            200..=299 => None,
            401 | 403 => Some(ProviderErrorKind::Auth),
            429 => Some(ProviderErrorKind::RateLimit),
            _ => Some(ProviderErrorKind::Transport),
        };
        if let Some(kind) = kind {
            let err = ProviderError::new(kind, format!("HTTP {status}: {}", excerpt(&text)));
            // A rejected request fails the same way on every retry.
            let retry = kind != ProviderErrorKind::Auth && (status.is_server_error() || status.as_u16() == 429);
            return Err((err, retry));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| {
            let err = ProviderError::new(ProviderErrorKind::Transport, format!("response is not JSON: {e}"));
            (err, false)
        })?;
        self.extract(&v).map_err(|e| (e, false))
    }
}

fn excerpt(s: &str) -> String {
    s.chars().take(200).collect()
}

impl DetectionProvider for HttpProvider {
    fn name(&self) -> &str {
        &self.cfg.name
    }

    fn invoke(&self, bundle: &PromptBundle) -> Result<RawResponse, ProviderError> {
        let start = Instant::now();
        let key = std::env::var(&self.cfg.api_key_env).map_err(|_| {
            ProviderError::new(
                ProviderErrorKind::Auth,
                format!("environment variable `{}` is not set", self.cfg.api_key_env),
            )
        })?;
        let body = self.body(bundle);
        let mut delays = self.backoff.iter();
        loop {
            match self.attempt(&key, &body) {
                Ok((text, input_tokens, output_tokens)) => {
                    return Ok(RawResponse {
                        text,
                        input_tokens,
                        output_tokens,
                        wall_time: elapsed(start),
                    })
                }
                Err((e, true)) => match delays.next() {
                    Some(d) => {
                        log::warn!("{}: {e}; retrying in {d:?}", self.cfg.name);
                        thread::sleep(*d);
                    }
                    None => return Err(e),
                },
                Err((e, false)) => return Err(e),
            }
        }
    }
}
