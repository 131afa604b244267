// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Relation from original line numbers to printed line numbers.
///
/// Every original line maps to at least one new line, and no new line has
/// two origins. New lines with no origin are listed in `inserted`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineMap {
    pub entries: BTreeMap<u32, Vec<u32>>,
    pub inserted: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    orig: u32,
    new: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    entries: Vec<Entry>,
    inserted: Vec<u32>,
}

impl Serialize for LineMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            entries: self
                .entries
                .iter()
                .map(|(o, n)| Entry {
                    orig: *o,
                    new: n.clone(),
                })
                .collect(),
            inserted: self.inserted.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LineMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        Ok(LineMap {
            entries: w.entries.into_iter().map(|e| (e.orig, e.new)).collect(),
            inserted: w.inserted,
        })
    }
}

impl LineMap {
    pub fn identity(lines: u32) -> Self {
        LineMap {
            entries: (1..=lines).map(|l| (l, vec![l])).collect(),
            inserted: Vec::new(),
        }
    }

    /// New lines for an original line; empty when the line is unknown.
    pub fn get(&self, orig: u32) -> &[u32] {
        self.entries.get(&orig).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Chain `self` (a to b) with `next` (b to c) into a map from a to c.
    pub fn compose(&self, next: &LineMap) -> LineMap {
        let entries = self
            .entries
            .iter()
            .map(|(o, mids)| {
                let mut out: Vec<u32> = mids.iter().flat_map(|m| next.get(*m).to_vec()).collect();
                out.sort_unstable();
                out.dedup();
                (*o, out)
            })
            .collect();
        let mut inserted: BTreeSet<u32> = next.inserted.iter().copied().collect();
        for m in &self.inserted {
            inserted.extend(next.get(*m).iter().copied());
        }
        LineMap {
            entries,
            inserted: inserted.into_iter().collect(),
        }
    }

    /// Map a set of original lines to the union of their images.
    pub fn map_lines(&self, lines: &[u32]) -> Vec<u32> {
        let set: BTreeSet<u32> = lines.iter().flat_map(|l| self.get(*l).to_vec()).collect();
        set.into_iter().collect()
    }

    /// Check totality over `1..=orig_lines` and disjointness of images.
    pub fn check(&self, orig_lines: u32, new_lines: u32) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for l in 1..=orig_lines {
            let img = self.get(l);
            if img.is_empty() {
                return Err(format!("original line {l} has no image"));
            }
            for n in img {
                if *n == 0 || *n > new_lines {
                    return Err(format!("line {l} maps outside the output ({n})"));
                }
                if !seen.insert(*n) {
                    return Err(format!("new line {n} has two origins"));
                }
            }
        }
        for n in &self.inserted {
            if !seen.insert(*n) {
                return Err(format!("inserted line {n} also has an origin"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_chains_images() {
        let a = LineMap {
            entries: [(1, vec![1]), (2, vec![2, 3])].into_iter().collect(),
            inserted: vec![4],
        };
        let b = LineMap {
            entries: [(1, vec![2]), (2, vec![3]), (3, vec![4]), (4, vec![1])]
                .into_iter()
                .collect(),
            inserted: vec![5],
        };
        let c = a.compose(&b);
        assert_eq!(c.get(1), &[2]);
        assert_eq!(c.get(2), &[3, 4]);
        assert_eq!(c.inserted, vec![1, 5]);
        c.check(2, 5).unwrap();
    }

    #[test]
    fn json_shape() {
        let m = LineMap::identity(2);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"entries":[{"orig":1,"new":[1]},{"orig":2,"new":[2]}],"inserted":[]}"#
        );
        let back: LineMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
