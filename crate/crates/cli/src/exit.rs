// SPDX-License-Identifier: Apache-2.0

//! Process exit codes.

use std::error::Error as StdError;

use trojanlens::annotations::AnnotationError;
use trojanlens::detect::{DetectError, ProviderError, ReportError};
use trojanlens::metrics::MetricError;
use trojanlens::perturb::{PerturbError, RemapError};
use trojanlens::rtl::ParseError;
use trojanlens::signatures::SignatureError;

pub const OK: i32 = 0;
pub const OTHER: i32 = 1;
pub const PARSE: i32 = 2;
pub const TRANSFORM: i32 = 3;
pub const PROVIDER: i32 = 4;
pub const SCHEMA: i32 = 5;

fn classify(e: &(dyn StdError + 'static)) -> Option<i32> {
    if e.is::<ParseError>() {
        return Some(PARSE);
    }
    if e.is::<PerturbError>() || e.is::<RemapError>() {
        return Some(TRANSFORM);
    }
    if e.is::<ProviderError>() {
        return Some(PROVIDER);
    }
    if e.is::<ReportError>() || e.is::<MetricError>() || e.is::<AnnotationError>() {
        return Some(SCHEMA);
    }
    if let Some(d) = e.downcast_ref::<DetectError>() {
        return Some(match d {
            DetectError::Provider(_) => PROVIDER,
            DetectError::Report(_) => SCHEMA,
        });
    }
    if let Some(s) = e.downcast_ref::<SignatureError>() {
        return match s {
            SignatureError::Provider(_) => Some(PROVIDER),
            SignatureError::Report(_) | SignatureError::Parse(_) | SignatureError::Bank(_) => Some(SCHEMA),
            SignatureError::Invalid(_) => None,
        };
    }
    if let Some(t) = e.downcast_ref::<trojanlens::Error>() {
        use trojanlens::Error as E;
        return match t {
            E::Parse(_) => Some(PARSE),
            E::Perturb(_) => Some(TRANSFORM),
            E::Provider(_) => Some(PROVIDER),
            E::Report(_) | E::Metric(_) | E::Annotation(_) => Some(SCHEMA),
            E::Signature(s) => classify(s),
            E::Equiv(_) | E::Sim(_) | E::Io(_) => None,
        };
    }
    None
}

/// The code for the first cause in the chain that has one.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    err.chain().find_map(classify).unwrap_or(OTHER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;
    use trojanlens::detect::ProviderErrorKind;

    #[test]
    fn codes_follow_the_cause() {
        let parse: anyhow::Error = ParseError::TooLarge { bytes: 2, limit: 1 }.into();
        assert_eq!(exit_code(&parse), PARSE);
        let wrapped = Err::<(), _>(ProviderError::new(ProviderErrorKind::Auth, "no key"))
            .context("detecting")
            .unwrap_err();
        assert_eq!(exit_code(&wrapped), PROVIDER);
        let sig: anyhow::Error = SignatureError::Provider(ProviderError::new(ProviderErrorKind::Transport, "x")).into();
        assert_eq!(exit_code(&sig), PROVIDER);
        assert_eq!(exit_code(&anyhow::Error::from(MetricError::Empty)), SCHEMA);
        assert_eq!(exit_code(&anyhow::Error::from(PerturbError::Config("x".into()))), TRANSFORM);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), OTHER);
    }
}
