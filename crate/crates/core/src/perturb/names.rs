// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use rand::Rng;

use super::{PerturbConfig, PerturbError};
use crate::rtl::is_reserved;

/// Draw identifiers uniformly over the configured alphabet and lengths,
/// rejecting keywords and anything in `taken`.
pub(crate) struct NameGen<'a> {
    cfg: &'a PerturbConfig,
    pub taken: BTreeSet<String>,
}

pub(crate) const MAX_DRAWS: u32 = 1000;

impl<'a> NameGen<'a> {
    pub fn new(cfg: &'a PerturbConfig, taken: BTreeSet<String>) -> Self {
        NameGen { cfg, taken }
    }

    pub fn fresh(&mut self, rng: &mut impl Rng, for_name: &str) -> Result<String, PerturbError> {
        for _ in 0..MAX_DRAWS {
            let len = rng.gen_range(self.cfg.name_min_len..=self.cfg.name_max_len);
            let s: String = (0..len)
                .map(|_| self.cfg.name_alphabet[rng.gen_range(0..self.cfg.name_alphabet.len())])
                .collect();
            if is_reserved(&s) || self.taken.contains(&s) {
                continue;
            }
            self.taken.insert(s.clone());
            return Ok(s);
        }
        Err(PerturbError::NameCollision {
            name: for_name.to_string(),
            draws: MAX_DRAWS,
        })
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(f) if f.is_ascii_alphabetic() || f == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '$')
}
