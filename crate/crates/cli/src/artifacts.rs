// SPDX-License-Identifier: Apache-2.0

//! Loading inputs and writing per-design run artifacts.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use trojanlens::design::DesignUnit;
use trojanlens::detect::{
    build_prompt, parse_report, serialize_report, CostRecord, DetectionProvider, DetectionReport, ProviderConfig,
};
use trojanlens::rtl::SourceFile;
use trojanlens::signatures::SignatureBank;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `sram_t110.v` becomes `SRAM-T110`.
pub fn design_id_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_uppercase().replace('_', "-"))
        .unwrap_or_default()
}

pub fn load_design(path: &Path, id: &str) -> Result<DesignUnit> {
    let file = SourceFile::load(path).with_context(|| format!("reading {}", path.display()))?;
    DesignUnit::new(id, file).with_context(|| format!("parsing {}", path.display()))
}

/// The bank at `path`, or an empty bank.
pub fn load_bank(path: Option<&Path>) -> Result<SignatureBank> {
    match path {
        Some(p) => SignatureBank::load(p).with_context(|| format!("loading bank {}", p.display())),
        None => Ok(SignatureBank::default()),
    }
}

/// Signatures are only requested when a bank has some. Asking for them
/// from an empty bank is an error.
pub fn effective_top_n(bank: &SignatureBank, requested: Option<usize>, default: usize) -> Result<usize> {
    match requested {
        Some(n) if n > 0 && bank.is_empty() => bail!("--top-n {n} needs a non-empty signature bank"),
        Some(n) => Ok(n),
        None if bank.is_empty() => Ok(0),
        None => Ok(default),
    }
}

#[derive(Serialize)]
struct ResponseMeta<'a> {
    provider: &'a str,
    digest: &'a str,
    input_tokens: Option<u64>,
    output_tokens: Option<u64>,
    wall_time: f64,
}

/// Prompt, call and parse one design, keeping every intermediate file in
/// `dir`: `prompt.json`, `prompt.txt`, `response.xml`, `response.json`,
/// `report.xml`, `report.json` and `cost.json`. The raw response is on
/// disk before parsing starts.
pub fn detect_into(
    dir: &Path,
    design: &DesignUnit,
    bank: &SignatureBank,
    top_n: usize,
    cfg: &ProviderConfig,
    provider: &dyn DetectionProvider,
) -> Result<DetectionReport> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let bundle = build_prompt(design, bank, top_n);
    let digest = bundle.digest();
    write_json(&dir.join("prompt.json"), &bundle)?;
    write_text(&dir.join("prompt.txt"), &format!("{}\n{}", bundle.system_text, bundle.user_text()))?;
    let response = provider
        .invoke(&bundle)
        .with_context(|| format!("provider `{}` on {}", provider.name(), design.id))?;
    write_text(&dir.join("response.xml"), &response.text)?;
    write_json(
        &dir.join("response.json"),
        &ResponseMeta {
            provider: provider.name(),
            digest: &digest,
            input_tokens: response.input_tokens,
            output_tokens: response.output_tokens,
            wall_time: response.wall_time,
        },
    )?;
    let mut report = parse_report(&response, design).with_context(|| format!("response for {}", design.id))?;
    report.provider = provider.name().to_string();
    report.cost = CostRecord::priced(&response, cfg);
    write_text(&dir.join("report.xml"), &serialize_report(&report))?;
    write_json(&dir.join("report.json"), &report)?;
    write_json(&dir.join("cost.json"), &report.cost)?;
    Ok(report)
}

/// `<out>/<stem><suffix>`
pub fn sibling(out: &Path, stem: &str, suffix: &str) -> PathBuf {
    out.join(format!("{stem}{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_from_paths() {
        assert_eq!(design_id_from_path(Path::new("x/sram_t110.v")), "SRAM-T110");
        assert_eq!(design_id_from_path(Path::new("top.v")), "TOP");
    }

    #[test]
    fn top_n_needs_signatures() {
        let empty = SignatureBank::default();
        assert_eq!(effective_top_n(&empty, None, 5).unwrap(), 0);
        assert_eq!(effective_top_n(&empty, Some(0), 5).unwrap(), 0);
        assert!(effective_top_n(&empty, Some(2), 5).is_err());
    }
}
