//! Offline gazetteer: maps free-text user locations onto canonical paths.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::fold::{fold, normalize_place};
use super::location::LocationPath;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub pattern: String,
    pub canonical: LocationPath,
    pub priority: i64,
}

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    by_pattern: HashMap<String, Vec<usize>>,
}

impl Gazetteer {
    /// Validate entries and index them. Each distinct canonical path also
    /// becomes an implicit pattern (its own normalized text), so that a
    /// canonical location string always resolves to itself.
    pub fn new(entries: Vec<GazetteerEntry>) -> Result<Self> {
        let countries: BTreeSet<String> = entries
            .iter()
            .filter(|e| e.canonical.components().len() == 1)
            .map(|e| fold(e.canonical.country()))
            .collect();
        for e in &entries {
            if e.pattern.is_empty() || e.pattern != normalize_place(&e.pattern) {
                return Err(Error::Invalid(format!(
                    "gazetteer pattern '{}' is not normalized (expected '{}')",
                    e.pattern,
                    normalize_place(&e.pattern)
                )));
            }
            if !countries.contains(&fold(e.canonical.country())) {
                return Err(Error::Invalid(format!(
                    "gazetteer canonical '{}' does not end in a known country",
                    e.canonical
                )));
            }
        }
        let mut all = entries;
        let canonicals: BTreeSet<LocationPath> = all.iter().map(|e| e.canonical.clone()).collect();
        for c in canonicals {
            let pattern = normalize_place(&c.to_string());
            if !all.iter().any(|e| e.pattern == pattern && e.canonical == c) {
                all.push(GazetteerEntry {
                    pattern,
                    canonical: c,
                    priority: i64::MAX,
                });
            }
        }
        let mut by_pattern: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in all.iter().enumerate() {
            by_pattern.entry(e.pattern.clone()).or_default().push(i);
        }
        Ok(Gazetteer {
            entries: all,
            by_pattern,
        })
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    /// TSV with header `pattern\tcanonical\tpriority`; `#` lines are comments.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let mut entries = Vec::new();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if !header_seen {
                header_seen = true;
                if cols == ["pattern", "canonical", "priority"] {
                    continue;
                }
            }
            let bad = |reason: &str| Error::MalformedLine {
                path: path.display().to_string(),
                line: i + 1,
                reason: reason.to_string(),
            };
            if cols.len() != 3 {
                return Err(bad("expected 3 tab-separated columns"));
            }
            let canonical: LocationPath = cols[1].parse().map_err(|_| bad("empty canonical"))?;
            let priority: i64 = cols[2]
                .trim()
                .parse()
                .map_err(|_| bad("priority is not an integer"))?;
            entries.push(GazetteerEntry {
                pattern: cols[0].trim().to_string(),
                canonical,
                priority,
            });
        }
        Gazetteer::new(entries)
    }

    /// Resolve a free-text location. The normalized text and each of its
    /// comma-separated tokens are candidate keys; the longest matching pattern
    /// wins, then the highest priority, then the lexicographically smallest
    /// canonical path.
    pub fn normalize(&self, raw: &str) -> Option<LocationPath> {
        let norm = normalize_place(raw);
        if norm.is_empty() {
            return None;
        }
        let mut keys: Vec<&str> = vec![norm.as_str()];
        keys.extend(norm.split(", "));
        keys.iter()
            .filter_map(|k| self.by_pattern.get(*k))
            .flatten()
            .map(|&i| &self.entries[i])
            .min_by(|a, b| {
                b.pattern
                    .chars()
                    .count()
                    .cmp(&a.pattern.chars().count())
                    .then(b.priority.cmp(&a.priority))
                    .then(a.canonical.to_string().cmp(&b.canonical.to_string()))
            })
            .map(|e| e.canonical.clone())
    }

    /// True when `path` is exactly one of the gazetteer's canonical paths.
    pub fn is_canonical(&self, path: &LocationPath) -> bool {
        self.entries.iter().any(|e| &e.canonical == path)
    }
}

pub fn normalize_location(raw: &str, gazetteer: &Gazetteer) -> Option<LocationPath> {
    gazetteer.normalize(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(p: &str, c: &str, prio: i64) -> GazetteerEntry {
        GazetteerEntry {
            pattern: p.into(),
            canonical: c.parse().unwrap(),
            priority: prio,
        }
    }

    fn fixture() -> Gazetteer {
        Gazetteer::new(vec![
            entry("france", "France", 0),
            entry("belgium", "Belgium", 0),
            entry("luxembourg", "Luxembourg", 10),
            entry("luxembourg", "Luxembourg, Wallonia, Belgium", 1),
            entry("moselle", "Moselle, Lorraine, France", 0),
            entry("metz", "Metz, Lorraine, France", 0),
            entry("lorraine", "Lorraine, France", 0),
            entry("arlon", "Arlon, Wallonia, Belgium", 0),
            entry("wallonia", "Wallonia, Belgium", 0),
            entry("paris", "Paris, Ile-de-France, France", 0),
            entry("paris", "Paris, Texas, France", 0),
        ])
        .unwrap()
    }

    #[test]
    fn moselle_resolves() {
        let g = fixture();
        assert_eq!(
            g.normalize("Moselle").unwrap().to_string(),
            "Moselle, Lorraine, France"
        );
        assert_eq!(
            g.normalize("  MOSELLE!!").unwrap().to_string(),
            "Moselle, Lorraine, France"
        );
    }

    #[test]
    fn empty_and_absent() {
        let g = fixture();
        assert_eq!(g.normalize(""), None);
        assert_eq!(g.normalize("Atlantis-99"), None);
    }

    #[test]
    fn longest_token_then_priority_then_lexicographic() {
        let g = fixture();
        // "lorraine" (8) beats "metz" (4) and "france" (6)
        assert_eq!(
            g.normalize("Metz, Lorraine ❤").unwrap().to_string(),
            "Lorraine, France"
        );
        assert_eq!(g.normalize("metz, france").unwrap().to_string(), "France");
        assert_eq!(g.normalize("Luxembourg").unwrap().to_string(), "Luxembourg");
        assert_eq!(
            g.normalize("Paris").unwrap().to_string(),
            "Paris, Ile-de-France, France"
        );
    }

    #[test]
    fn canonical_strings_are_fixed_points() {
        let g = fixture();
        for e in g.entries() {
            let c = e.canonical.to_string();
            assert_eq!(g.normalize(&c).unwrap().to_string(), c);
        }
    }

    #[test]
    fn rejects_unnormalized_pattern_and_unknown_country() {
        assert!(Gazetteer::new(vec![entry("France", "France", 0)]).is_err());
        assert!(Gazetteer::new(vec![entry("metz", "Metz, Lorraine, France", 0)]).is_err());
    }
}
