// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::names::{is_identifier, NameGen};
use super::{Pass, PerturbConfig, PerturbError, RenameTable};
use crate::rtl::{self, is_reserved, visit, SyntaxTree};

/// Rename every internal identifier (nets, variables, body parameters,
/// instance names). Ports, header parameters and module names are kept.
pub fn obfuscate_identifiers(
    tree: &SyntaxTree,
    cfg: &PerturbConfig,
) -> Result<(SyntaxTree, RenameTable), PerturbError> {
    let ids = rtl::collect_identifiers(tree);
    let existing: BTreeSet<String> = ids.all_names().into_iter().map(String::from).collect();
    let mut gen = NameGen::new(cfg, existing.clone());
    let mut table = RenameTable::default();

    for (from, to) in &cfg.rename_overrides {
        if !ids.is_internal(from) {
            continue;
        }
        let reason = if !is_identifier(to) {
            Some("not an identifier")
        } else if is_reserved(to) {
            Some("reserved word")
        } else if gen.taken.contains(to) {
            Some("name already in use")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(PerturbError::InvalidOverride {
                from: from.clone(),
                to: to.clone(),
                reason: reason.into(),
            });
        }
        gen.taken.insert(to.clone());
        table.entries.insert(from.clone(), to.clone());
    }

    let mut rng = cfg.rng(Pass::Rename);
    for name in ids.internals.keys() {
        if table.entries.contains_key(name) {
            continue;
        }
        let fresh = gen.fresh(&mut rng, name)?;
        table.entries.insert(name.clone(), fresh);
    }

    let mut out = tree.clone();
    for m in &mut out.modules {
        visit::for_each_ident_mut(m, &mut |_, id| {
            if let Some(n) = table.entries.get(&id.name) {
                id.name = n.clone();
            }
        });
    }
    Ok((out, table))
}
