// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ast::SyntaxTree;
use super::visit::{for_each_ident, IdentRole};

/// Declaration and reference lines of one identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IdentSites {
    pub decls: Vec<u32>,
    /// One entry per occurrence, so a name used twice on a line appears twice.
    pub refs: Vec<u32>,
}

/// Identifiers of a tree split into module names, interface names and
/// internal names. The three maps have disjoint key sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IdentifierTable {
    pub modules: BTreeMap<String, IdentSites>,
    /// Ports, header parameters and names used as `.port` connections.
    pub ports: BTreeMap<String, IdentSites>,
    /// Nets, variables, body parameters and instance names.
    pub internals: BTreeMap<String, IdentSites>,
}

impl IdentifierTable {
    pub fn all_names(&self) -> BTreeSet<&str> {
        self.modules
            .keys()
            .chain(self.ports.keys())
            .chain(self.internals.keys())
            .map(String::as_str)
            .collect()
    }

    pub fn is_internal(&self, name: &str) -> bool {
        self.internals.contains_key(name)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Class {
    Internal,
    Port,
    Module,
}

pub fn collect_identifiers(tree: &SyntaxTree) -> IdentifierTable {
    let mut class: BTreeMap<String, Class> = BTreeMap::new();
    let mut sites: BTreeMap<String, IdentSites> = BTreeMap::new();
    for m in &tree.modules {
        for_each_ident(m, &mut |role, id| {
            let (c, decl) = match role {
                IdentRole::ModuleName => (Some(Class::Module), true),
                IdentRole::InstanceType => (Some(Class::Module), false),
                IdentRole::HeaderPort | IdentRole::HeaderParam => (Some(Class::Port), true),
                IdentRole::ConnectionPort => (Some(Class::Port), false),
                IdentRole::PortDecl => (Some(Class::Port), true),
                IdentRole::NetDecl | IdentRole::ParamDecl | IdentRole::InstanceName => {
                    (Some(Class::Internal), true)
                }
                IdentRole::Reference => (None, false),
            };
            if let Some(c) = c {
                let e = class.entry(id.name.clone()).or_insert(c);
                *e = (*e).max(c);
            }
            let s = sites.entry(id.name.clone()).or_default();
            if decl {
                s.decls.push(id.tag.line);
            } else {
                s.refs.push(id.tag.line);
            }
        });
    }
    let mut table = IdentifierTable::default();
    for (name, s) in sites {
        let Some(c) = class.get(&name) else {
            continue;
        };
        let dst = match c {
            Class::Module => &mut table.modules,
            Class::Port => &mut table.ports,
            Class::Internal => &mut table.internals,
        };
        dst.insert(name, s);
    }
    table
}
