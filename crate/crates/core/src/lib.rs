// SPDX-License-Identifier: Apache-2.0

//! Perturbation of Trojan-infected RTL, signature-driven detection through
//! pluggable providers, and line-level scoring of the results.

pub mod annotations;
pub mod design;
pub mod detect;
pub mod equiv;
pub mod metrics;
pub mod perturb;
pub mod rtl;
pub mod signatures;
pub mod sim;
pub mod suite;

/// Any error the library reports, grouped the way the command line maps
/// them to exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] rtl::ParseError),
    #[error(transparent)]
    Perturb(#[from] perturb::PerturbError),
    #[error(transparent)]
    Provider(#[from] detect::ProviderError),
    #[error(transparent)]
    Report(#[from] detect::ReportError),
    #[error(transparent)]
    Metric(#[from] metrics::MetricError),
    #[error(transparent)]
    Annotation(#[from] annotations::AnnotationError),
    #[error(transparent)]
    Signature(#[from] signatures::SignatureError),
    #[error(transparent)]
    Equiv(#[from] equiv::EquivError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<detect::DetectError> for Error {
    fn from(e: detect::DetectError) -> Self {
        match e {
            detect::DetectError::Provider(p) => Error::Provider(p),
            detect::DetectError::Report(r) => Error::Report(r),
        }
    }
}
