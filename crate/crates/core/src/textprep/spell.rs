//! Symmetric-delete spelling correction at edit distance 1.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct SpellDictionary {
    freq: BTreeMap<String, u64>,
    deletes: HashMap<String, Vec<String>>,
}

fn single_deletes(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    (0..chars.len())
        .map(|i| {
            chars
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| c)
                .collect()
        })
        .collect()
}

/// Optimal-string-alignment distance of at most 1.
fn within_one(a: &str, b: &str) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    if n.abs_diff(m) > 1 {
        return false;
    }
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        d[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut v = (d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1)
                .min(d[i - 1][j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(d[i - 2][j - 2] + 1);
            }
            d[i][j] = v;
        }
    }
    d[n][m] <= 1
}

impl SpellDictionary {
    pub fn new(entries: impl IntoIterator<Item = (String, u64)>) -> Self {
        let mut freq = BTreeMap::new();
        for (w, f) in entries {
            *freq.entry(w).or_insert(0) += f;
        }
        let mut deletes: HashMap<String, Vec<String>> = HashMap::new();
        for w in freq.keys() {
            deletes.entry(w.clone()).or_default().push(w.clone());
            for d in single_deletes(w) {
                deletes.entry(d).or_default().push(w.clone());
            }
        }
        SpellDictionary { freq, deletes }
    }

    /// TSV `word<TAB>frequency`, no header. Words are lowercased; entries
    /// with non-alphabetic characters are ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(w), Some(f)) = (parts.next(), parts.next()) else {
                return Err(Error::MalformedLine {
                    path: path.display().to_string(),
                    line: i + 1,
                    reason: "expected word<TAB>frequency".into(),
                });
            };
            let f: u64 = f.trim().parse().map_err(|_| Error::MalformedLine {
                path: path.display().to_string(),
                line: i + 1,
                reason: format!("bad frequency {f:?}"),
            })?;
            let w = w.trim().to_lowercase();
            if !w.is_empty() && w.chars().all(char::is_alphabetic) {
                entries.push((w, f));
            }
        }
        Ok(Self::new(entries))
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    /// Known words are returned as-is. Otherwise the most frequent dictionary
    /// word within one edit wins (ties lexicographic); with no candidate the
    /// word is returned unchanged.
    pub fn correct(&self, word: &str) -> String {
        if self.freq.contains_key(word) {
            return word.to_string();
        }
        let mut keys = single_deletes(word);
        keys.push(word.to_string());
        let mut best: Option<(&String, u64)> = None;
        for key in &keys {
            let Some(cands) = self.deletes.get(key) else {
                continue;
            };
            for c in cands {
                if !within_one(word, c) {
                    continue;
                }
                let f = self.freq[c];
                best = match best {
                    Some((b, bf)) if bf > f || (bf == f && b <= c) => Some((b, bf)),
                    _ => Some((c, f)),
                };
            }
        }
        best.map(|(w, _)| w.clone())
            .unwrap_or_else(|| word.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> SpellDictionary {
        SpellDictionary::new([
            ("lockdown".to_string(), 50),
            ("border".to_string(), 40),
            ("boarder".to_string(), 2),
            ("mask".to_string(), 30),
            ("task".to_string(), 30),
        ])
    }

    #[test]
    fn known_words_kept() {
        assert_eq!(dict().correct("boarder"), "boarder");
    }

    #[test]
    fn each_edit_kind() {
        let d = dict();
        assert_eq!(d.correct("lockdwn"), "lockdown"); // insertion
        assert_eq!(d.correct("lockdowns"), "lockdown"); // deletion
        assert_eq!(d.correct("lockdovn"), "lockdown"); // substitution
        assert_eq!(d.correct("lcokdown"), "lockdown"); // transposition
        assert_eq!(d.correct("bordr"), "border");
    }

    #[test]
    fn frequency_then_lexicographic() {
        // "bask" is one edit from both mask and task at equal frequency
        assert_eq!(dict().correct("bask"), "mask");
        assert_eq!(dict().correct("zzzz"), "zzzz");
    }

    #[test]
    fn brute_force_agrees() {
        let d = dict();
        for w in ["masks", "tsk", "ask", "bordre", "boader", "x", "lockdon"] {
            let mut cands: Vec<(&String, u64)> = d
                .freq
                .iter()
                .filter(|(c, _)| within_one(w, c))
                .map(|(c, f)| (c, *f))
                .collect();
            cands.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            let expect = if d.freq.contains_key(w) {
                w.to_string()
            } else {
                cands
                    .first()
                    .map(|c| c.0.clone())
                    .unwrap_or_else(|| w.to_string())
            };
            assert_eq!(d.correct(w), expect, "{w}");
        }
    }
}
