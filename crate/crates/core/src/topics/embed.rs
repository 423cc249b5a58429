//! Sentence embeddings: precomputed vectors from a file, or a deterministic
//! hashed 1-/2-gram fallback.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingProvider {
    Precomputed {
        dim: usize,
        vectors: BTreeMap<String, Vec<f64>>,
    },
    HashedNgram {
        dim: usize,
        seed: u64,
    },
}

impl EmbeddingProvider {
    pub fn hashed(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("embedding dim must be ≥ 1".into()));
        }
        Ok(EmbeddingProvider::HashedNgram { dim, seed })
    }

    pub fn dim(&self) -> usize {
        match self {
            EmbeddingProvider::Precomputed { dim, .. }
            | EmbeddingProvider::HashedNgram { dim, .. } => *dim,
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            EmbeddingProvider::Precomputed { .. } => "precomputed",
            EmbeddingProvider::HashedNgram { .. } => "hashed_ngram",
        }
    }

    pub fn embed(&self, tweet_id: &str, tokens: &[String]) -> Result<Vec<f64>> {
        match self {
            EmbeddingProvider::Precomputed { vectors, .. } => vectors
                .get(tweet_id)
                .cloned()
                .ok_or_else(|| Error::MissingEmbedding(tweet_id.to_string())),
            EmbeddingProvider::HashedNgram { dim, seed } => {
                Ok(hashed_embedding(tokens, *dim, *seed))
            }
        }
    }

    /// Header `dim=<D>`, then `tweet_id,f1,...,fD` per line.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        let bad = |line: usize, reason: String| Error::MalformedLine {
            path: path.display().to_string(),
            line,
            reason,
        };
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        let dim: usize = header
            .strip_prefix("dim=")
            .and_then(|d| d.trim().parse().ok())
            .filter(|d| *d > 0)
            .ok_or_else(|| bad(1, format!("expected dim=<D> header, got {header:?}")))?;
        let mut vectors = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let id = parts.next().unwrap_or("").trim().to_string();
            let v: Vec<f64> = parts
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(i + 2, e.to_string()))?;
            if v.len() != dim {
                return Err(bad(i + 2, format!("{} values, expected {dim}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(bad(i + 2, "non-finite value".into()));
            }
            vectors.insert(id, v);
        }
        Ok(EmbeddingProvider::Precomputed { dim, vectors })
    }
}

/// Writes vectors in the format `load` reads. Values use Rust's shortest
/// round-trip formatting, so reading them back is bit-exact.
pub fn write_embeddings(
    path: &Path,
    dim: usize,
    vectors: &BTreeMap<String, Vec<f64>>,
) -> Result<()> {
    let mut out = format!("dim={dim}\n");
    for (id, v) in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        out.push_str(id);
        for x in v {
            write!(out, ",{x:?}").expect("string write");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn bucket(gram: &str, dim: usize, seed: u64) -> usize {
    (seed::derive(seed, &[seed::tag(gram)]) % dim as u64) as usize
}

/// L2-normalized mean of one-hot bucket vectors over all unigrams and
/// bigrams; the empty token list maps to the zero vector.
pub fn hashed_embedding(tokens: &[String], dim: usize, seed: u64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    let mut n = 0usize;
    for t in tokens {
        v[bucket(t, dim, seed)] += 1.0;
        n += 1;
    }
    for pair in tokens.windows(2) {
        v[bucket(&format!("{} {}", pair[0], pair[1]), dim, seed)] += 1.0;
        n += 1;
    }
    if n == 0 {
        return v;
    }
    for x in v.iter_mut() {
        *x /= n as f64;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn hashed_properties() {
        let p = EmbeddingProvider::hashed(16, 7).unwrap();
        assert_eq!(p.embed("a", &[]).unwrap(), vec![0.0; 16]);
        let a = p.embed("a", &toks("border closed today")).unwrap();
        let b = p.embed("b", &toks("border closed today")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);
        assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.iter().all(|x| x.is_finite() && *x >= 0.0));
        // word order matters through the bigrams
        let c = p.embed("c", &toks("today closed border")).unwrap();
        assert_ne!(a, c);
        assert!(EmbeddingProvider::hashed(0, 1).is_err());
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.csv");
        let mut vectors = BTreeMap::new();
        vectors.insert("1".to_string(), vec![0.1, -1.0 / 3.0, 1e-300]);
        vectors.insert("2".to_string(), vec![std::f64::consts::PI, 0.0, -0.0]);
        vectors.insert(
            "3".to_string(),
            vec![f64::MAX, f64::MIN_POSITIVE, 123456789.123456789],
        );
        write_embeddings(&path, 3, &vectors).unwrap();
        let p = EmbeddingProvider::load(&path).unwrap();
        assert_eq!(p.dim(), 3);
        for (id, v) in &vectors {
            let got = p.embed(id, &[]).unwrap();
            let bits: Vec<u64> = got.iter().map(|x| x.to_bits()).collect();
            let want: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            assert_eq!(bits, want);
        }
        match p.embed("404", &[]) {
            Err(Error::MissingEmbedding(id)) => assert_eq!(id, "404"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        std::fs::write(&path, "dim=2\nx,1.0\n").unwrap();
        assert!(matches!(
            EmbeddingProvider::load(&path),
            Err(Error::MalformedLine { line: 2, .. })
        ));
        std::fs::write(&path, "2\nx,1.0,2.0\n").unwrap();
        assert!(matches!(
            EmbeddingProvider::load(&path),
            Err(Error::MalformedLine { line: 1, .. })
        ));
    }
}
