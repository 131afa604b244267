// SPDX-License-Identifier: Apache-2.0

//! Functionality-preserving transformations: identifier obfuscation,
//! redundant logic and control restructuring.
//!
//! Every pass rewrites the tree, prints it, and reparses the result. The
//! printer's line map for each pass is composed into one map from the input
//! file's lines to the output file's lines.

mod names;
mod redundant;
mod rename;
mod restructure;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotations::{AnnotationError, AnnotationSet, TrojanInstance};
use crate::design::DesignUnit;
use crate::rtl::{self, LineMap, ParseError, SourceFile, SyntaxTree};

pub use redundant::insert_redundant_logic;
pub use rename::obfuscate_identifiers;
pub use restructure::restructure_control;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pass {
    Rename,
    Redundant,
    Restructure,
}

impl Pass {
    pub const ALL: [Pass; 3] = [Pass::Rename, Pass::Redundant, Pass::Restructure];

    pub fn name(self) -> &'static str {
        match self {
            Pass::Rename => "rename",
            Pass::Redundant => "redundant",
            Pass::Restructure => "restructure",
        }
    }

    fn stream(self) -> u64 {
        match self {
            Pass::Rename => 1,
            Pass::Redundant => 2,
            Pass::Restructure => 3,
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rename" => Ok(Pass::Rename),
            "redundant" => Ok(Pass::Redundant),
            "restructure" => Ok(Pass::Restructure),
            other => Err(format!("unknown pass `{other}`")),
        }
    }
}

/// Parse a comma-separated pass list; `none` or an empty string is no passes.
/// Passes always run in the fixed order rename, redundant, restructure.
pub fn parse_passes(s: &str) -> Result<Vec<Pass>, String> {
    let s = s.trim();
    if s.is_empty() || s == "none" {
        return Ok(Vec::new());
    }
    if s == "all" {
        return Ok(Pass::ALL.to_vec());
    }
    let set: BTreeSet<Pass> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()?;
    Ok(set.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbConfig {
    pub seed: u64,
    pub passes: Vec<Pass>,
    /// Fraction of always blocks that receive one redundant construct.
    pub redundant_density: f64,
    pub name_alphabet: Vec<char>,
    pub name_min_len: usize,
    pub name_max_len: usize,
    /// Fixed replacements for chosen internal identifiers; the rest are drawn.
    pub rename_overrides: BTreeMap<String, String>,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            seed: 0,
            passes: Pass::ALL.to_vec(),
            redundant_density: 0.3,
            name_alphabet: ('a'..='z').collect(),
            name_min_len: 3,
            name_max_len: 5,
            rename_overrides: BTreeMap::new(),
        }
    }
}

impl PerturbConfig {
    pub fn with_seed(seed: u64) -> Self {
        PerturbConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), PerturbError> {
        let bad = |m: &str| Err(PerturbError::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.redundant_density) {
            return bad("redundant_density must be in [0, 1]");
        }
        if self.name_alphabet.is_empty() || !self.name_alphabet.iter().all(|c| c.is_ascii_lowercase()) {
            return bad("name_alphabet must be non-empty lowercase letters");
        }
        if self.name_min_len == 0 || self.name_min_len > self.name_max_len {
            return bad("name lengths must satisfy 1 <= min <= max");
        }
        Ok(())
    }

    pub(crate) fn rng(&self, pass: Pass) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(pass.stream());
        r
    }
}

/// Original identifier to replacement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RenameTable {
    pub entries: BTreeMap<String, String>,
}

impl RenameTable {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries.get(name).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerturbError {
    #[error("no fresh name for `{name}` after {draws} draws")]
    NameCollision { name: String, draws: u32 },
    #[error("invalid rename override `{from}` -> `{to}`: {reason}")]
    InvalidOverride {
        from: String,
        to: String,
        reason: String,
    },
    #[error("invalid perturbation config: {0}")]
    Config(String),
    #[error("transformed design failed to reparse: {0}")]
    Reparse(ParseError),
}

#[derive(Debug, Clone)]
pub struct PerturbResult {
    pub perturbed: SourceFile,
    pub tree: SyntaxTree,
    pub rename: RenameTable,
    pub line_map: LineMap,
}

/// Print a transformed tree and reparse it so later passes see fresh tags.
pub(crate) fn reprint(tree: &SyntaxTree) -> Result<(SyntaxTree, String, LineMap), PerturbError> {
    let (text, map) = rtl::print_with_map(tree);
    let t = rtl::parse_str(&text).map_err(PerturbError::Reparse)?;
    Ok((t, text, map))
}

pub fn perturb(design: &DesignUnit, cfg: &PerturbConfig) -> Result<PerturbResult, PerturbError> {
    cfg.validate()?;
    let mut tree = design.tree.clone();
    tree.source_lines = design.file.lines;
    let original_names: BTreeSet<String> = rtl::collect_identifiers(&tree)
        .all_names()
        .into_iter()
        .map(String::from)
        .collect();
    let mut map = LineMap::identity(design.file.lines);
    let mut rename = RenameTable::default();
    let mut text = None;
    for pass in Pass::ALL {
        if !cfg.passes.contains(&pass) {
            continue;
        }
        let transformed = match pass {
            Pass::Rename => {
                let (t, table) = obfuscate_identifiers(&tree, cfg)?;
                rename = table;
                t
            }
            Pass::Redundant => redundant::transform(&tree, cfg, &original_names)?,
            Pass::Restructure => restructure::transform(&tree, cfg),
        };
        let (t, out, m) = reprint(&transformed)?;
        map = map.compose(&m);
        tree = t;
        text = Some(out);
    }
    let text = match text {
        Some(t) => t,
        None => {
            let (out, m) = rtl::print_with_map(&tree);
            map = map.compose(&m);
            tree = rtl::parse_str(&out).map_err(PerturbError::Reparse)?;
            out
        }
    };
    let perturbed = SourceFile::new(design.file.path.clone(), text);
    Ok(PerturbResult {
        perturbed,
        tree,
        rename,
        line_map: map,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RemapError {
    #[error("annotated line {0} has no entry in the line map")]
    UnmappedLine(u32),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

/// Carry annotations across a line map. A labeled line's label goes to all
/// of its new lines; inserted lines stay clean.
pub fn remap_annotations(ann: &AnnotationSet, map: &LineMap) -> Result<AnnotationSet, RemapError> {
    let mut instances = Vec::with_capacity(ann.instances.len());
    let image = |lines: &BTreeSet<u32>| -> Result<BTreeSet<u32>, RemapError> {
        let mut out = BTreeSet::new();
        for l in lines {
            let img = map.get(*l);
            if img.is_empty() {
                return Err(RemapError::UnmappedLine(*l));
            }
            out.extend(img.iter().copied());
        }
        Ok(out)
    };
    for inst in &ann.instances {
        instances.push(TrojanInstance {
            id: inst.id.clone(),
            ty: inst.ty,
            trigger_lines: image(&inst.trigger_lines)?,
            payload_lines: image(&inst.payload_lines)?,
        });
    }
    let new_loc = map
        .entries
        .values()
        .flatten()
        .chain(map.inserted.iter())
        .copied()
        .max()
        .unwrap_or(0);
    Ok(AnnotationSet::new(
        ann.design_id.clone(),
        ann.source.clone(),
        instances,
        new_loc.max(if map.entries.is_empty() { ann.loc } else { 0 }),
    )?)
}
