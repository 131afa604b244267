// SPDX-License-Identifier: Apache-2.0

//! Line-level ground truth for Trojan-infected designs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrojanType {
    /// Functionality change.
    Type1,
    /// Information leakage.
    Type2,
    /// Denial of service.
    Type3,
}

impl TrojanType {
    pub const ALL: [TrojanType; 3] = [TrojanType::Type1, TrojanType::Type2, TrojanType::Type3];

    pub fn number(self) -> u8 {
        match self {
            TrojanType::Type1 => 1,
            TrojanType::Type2 => 2,
            TrojanType::Type3 => 3,
        }
    }

    pub fn from_number(n: u64) -> Option<Self> {
        match n {
            1 => Some(TrojanType::Type1),
            2 => Some(TrojanType::Type2),
            3 => Some(TrojanType::Type3),
            _ => None,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            TrojanType::Type1 => "functionality change",
            TrojanType::Type2 => "information leakage",
            TrojanType::Type3 => "denial of service",
        }
    }
}

impl fmt::Display for TrojanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type-{}", self.number())
    }
}

impl Serialize for TrojanType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for TrojanType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = u64::deserialize(d)?;
        TrojanType::from_number(n)
            .ok_or_else(|| serde::de::Error::custom(format!("trojan type must be 1, 2 or 3, got {n}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrojanInstance {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: TrojanType,
    pub trigger_lines: BTreeSet<u32>,
    pub payload_lines: BTreeSet<u32>,
}

impl TrojanInstance {
    pub fn lines(&self) -> impl Iterator<Item = u32> + '_ {
        self.trigger_lines.iter().chain(self.payload_lines.iter()).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineLabel {
    Trigger,
    Payload,
    Clean,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("annotation format error: {0}")]
    Format(String),
    #[error("line {line} is labeled by both `{a}` and `{b}`")]
    Overlap { line: u32, a: String, b: String },
    #[error("line {line} is outside 1..={loc}")]
    OutOfRange { line: u32, loc: u32 },
}

#[derive(Serialize, Deserialize)]
struct AnnotationFile {
    design_id: String,
    source: PathBuf,
    trojans: Vec<TrojanInstance>,
}

/// Ground truth for one design. Labeled line sets are pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    pub design_id: String,
    pub source: PathBuf,
    pub instances: Vec<TrojanInstance>,
    /// Physical line count of the annotated source.
    pub loc: u32,
    labels: BTreeMap<u32, LineLabel>,
}

impl AnnotationSet {
    /// Validate instances against a design of `loc` lines.
    pub fn new(
        design_id: impl Into<String>,
        source: impl Into<PathBuf>,
        instances: Vec<TrojanInstance>,
        loc: u32,
    ) -> Result<Self, AnnotationError> {
        let mut owner: BTreeMap<u32, &str> = BTreeMap::new();
        let mut labels = BTreeMap::new();
        let mut ids = BTreeSet::new();
        for inst in &instances {
            if inst.id.is_empty() {
                return Err(AnnotationError::Format("empty trojan id".into()));
            }
            if !ids.insert(inst.id.as_str()) {
                return Err(AnnotationError::Format(format!("duplicate trojan id `{}`", inst.id)));
            }
            if inst.trigger_lines.is_empty() || inst.payload_lines.is_empty() {
                return Err(AnnotationError::Format(format!(
                    "trojan `{}` needs non-empty trigger_lines and payload_lines",
                    inst.id
                )));
            }
            for (set, label) in [
                (&inst.trigger_lines, LineLabel::Trigger),
                (&inst.payload_lines, LineLabel::Payload),
            ] {
                for &line in set {
                    if line == 0 || line > loc {
                        return Err(AnnotationError::OutOfRange { line, loc });
                    }
                    if let Some(prev) = owner.insert(line, &inst.id) {
                        return Err(AnnotationError::Overlap {
                            line,
                            a: prev.to_string(),
                            b: inst.id.clone(),
                        });
                    }
                    labels.insert(line, label);
                }
            }
        }
        Ok(AnnotationSet {
            design_id: design_id.into(),
            source: source.into(),
            instances,
            loc,
            labels,
        })
    }

    /// Parse annotation JSON for a design with `loc` lines.
    pub fn from_json_str(text: &str, loc: u32) -> Result<Self, AnnotationError> {
        let f: AnnotationFile =
            serde_json::from_str(text).map_err(|e| AnnotationError::Format(e.to_string()))?;
        AnnotationSet::new(f.design_id, f.source, f.trojans, loc)
    }

    /// Load an annotation file. `source` is resolved relative to the file and
    /// read to learn the design's line count.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, AnnotationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AnnotationError::Format(format!("{}: {e}", path.display())))?;
        let f: AnnotationFile =
            serde_json::from_str(&text).map_err(|e| AnnotationError::Format(e.to_string()))?;
        let src = resolve(path, &f.source);
        let design = std::fs::read_to_string(&src)
            .map_err(|e| AnnotationError::Format(format!("source {}: {e}", src.display())))?;
        AnnotationSet::new(f.design_id, src, f.trojans, crate::rtl::count_lines(&design))
    }

    pub fn to_json(&self) -> String {
        let f = AnnotationFile {
            design_id: self.design_id.clone(),
            source: self.source.clone(),
            trojans: self.instances.clone(),
        };
        serde_json::to_string_pretty(&f).expect("annotation serializes")
    }

    pub fn k(&self) -> usize {
        self.instances.len()
    }

    pub fn label_of(&self, line: u32) -> Result<LineLabel, AnnotationError> {
        if line == 0 || line > self.loc {
            return Err(AnnotationError::OutOfRange {
                line,
                loc: self.loc,
            });
        }
        Ok(self.labels.get(&line).copied().unwrap_or(LineLabel::Clean))
    }

    pub fn instance(&self, id: &str) -> Option<&TrojanInstance> {
        self.instances.iter().find(|i| i.id == id)
    }

    /// Design family: the design id up to its first `-`.
    pub fn family(&self) -> &str {
        family_of(&self.design_id)
    }
}

pub fn family_of(design_id: &str) -> &str {
    design_id.split('-').next().unwrap_or(design_id)
}

fn resolve(base_file: &Path, rel: &Path) -> PathBuf {
    if rel.is_absolute() {
        rel.to_path_buf()
    } else {
        base_file.parent().unwrap_or(Path::new(".")).join(rel)
    }
}
