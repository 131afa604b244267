// SPDX-License-Identifier: Apache-2.0

//! Prompt construction, provider calls and report parsing.

pub mod heuristic;
mod prompt;
mod provider;
mod report;

pub use prompt::{build_prompt, numbered, PromptBundle, PromptTask, SYSTEM_TEXT, TYPE_EXAMPLES};
pub use provider::{
    connect, DetectionProvider, HeuristicProvider, HttpProvider, ProviderConfig, ProviderError, ProviderErrorKind,
    ProviderKind, RawResponse, ReplayProvider, HEURISTIC_ENDPOINT,
};
pub use report::{
    parse_report, parse_report_text, serialize_report, CostRecord, DetectionReport, ReportEntry, ReportError,
    SCHEMA_TEXT,
};
pub(crate) use report::first_element;

use crate::design::DesignUnit;
use crate::signatures::SignatureBank;

#[derive(Debug, thiserror::Error)]
pub enum DetectError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Everything one detection call produced.
#[derive(Debug, Clone)]
pub struct DetectionRun {
    pub bundle: PromptBundle,
    pub response: RawResponse,
    pub report: DetectionReport,
}

/// Prompt, invoke, parse and price one design.
pub fn detect_sample(
    design: &DesignUnit,
    bank: &SignatureBank,
    top_n: usize,
    cfg: &ProviderConfig,
    provider: &dyn DetectionProvider,
) -> Result<DetectionRun, DetectError> {
    let bundle = build_prompt(design, bank, top_n);
    let response = provider.invoke(&bundle)?;
    let mut report = parse_report(&response, design)?;
    report.provider = provider.name().to_string();
    report.cost = CostRecord::priced(&response, cfg);
    Ok(DetectionRun {
        bundle,
        response,
        report,
    })
}
