use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::textprep::TokenizedTweet;

/// Token lists indexed against a sorted vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub ids: Vec<String>,
    pub documents: Vec<Vec<usize>>,
    pub vocab: Vec<String>,
    pub doc_freq: Vec<usize>,
    /// Sorted document indices per vocabulary word.
    postings: Vec<Vec<usize>>,
}

impl Corpus {
    pub fn new(docs: &[TokenizedTweet]) -> Self {
        let mut vocab: Vec<String> = docs.iter().flat_map(|d| d.tokens.iter().cloned()).collect();
        vocab.sort();
        vocab.dedup();
        let index: BTreeMap<&str, usize> = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        let documents: Vec<Vec<usize>> = docs
            .iter()
            .map(|d| d.tokens.iter().map(|t| index[t.as_str()]).collect())
            .collect();
        let mut postings = vec![Vec::new(); vocab.len()];
        for (d, doc) in documents.iter().enumerate() {
            let mut seen: Vec<usize> = doc.clone();
            seen.sort_unstable();
            seen.dedup();
            for w in seen {
                postings[w].push(d);
            }
        }
        let doc_freq = postings.iter().map(Vec::len).collect();
        Corpus {
            ids: docs.iter().map(|d| d.tweet_id.clone()).collect(),
            documents,
            vocab,
            doc_freq,
            postings,
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn word_index(&self, w: &str) -> Option<usize> {
        self.vocab.binary_search_by(|v| v.as_str().cmp(w)).ok()
    }

    /// Number of documents containing both words.
    pub fn co_doc_freq(&self, a: usize, b: usize) -> usize {
        let (x, y) = (&self.postings[a], &self.postings[b]);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Per document, `(word index, weight)` sorted by word index.
pub type TfIdf = Vec<Vec<(usize, f64)>>;

/// `tf(w, d) · ln(N / df(w))` with raw counts as tf.
pub fn compute_tfidf(corpus: &Corpus) -> Result<TfIdf> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n = corpus.len() as f64;
    Ok(corpus
        .documents
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for w in doc {
                *counts.entry(*w).or_insert(0) += 1;
            }
            counts
                .into_iter()
                .map(|(w, c)| (w, c as f64 * (n / corpus.doc_freq[w] as f64).ln()))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&[&str]]) -> Vec<TokenizedTweet> {
        raw.iter()
            .enumerate()
            .map(|(i, d)| TokenizedTweet {
                tweet_id: format!("t{i}"),
                tokens: d.iter().map(|s| s.to_string()).collect(),
            })
            .collect()
    }

    #[test]
    fn vocabulary_and_frequencies() {
        let c = Corpus::new(&docs(&[&["b", "a", "a"], &["c", "a"], &[]]));
        assert_eq!(c.vocab, vec!["a", "b", "c"]);
        assert_eq!(c.doc_freq, vec![2, 1, 1]);
        assert_eq!(c.co_doc_freq(0, 2), 1);
        assert_eq!(c.co_doc_freq(1, 2), 0);
        assert_eq!(c.word_index("c"), Some(2));
        assert_eq!(c.word_index("z"), None);
    }

    #[test]
    fn tfidf_hand_values() {
        let c = Corpus::new(&docs(&[&["x", "x", "y"], &["y", "z"]]));
        let t = compute_tfidf(&c).unwrap();
        // x only in doc 0, twice: 2·ln 2; y everywhere: 0
        assert_eq!(t[0], vec![(0, 2.0 * 2f64.ln()), (1, 0.0)]);
        assert_eq!(t[1], vec![(1, 0.0), (2, 2f64.ln())]);

        let single = compute_tfidf(&Corpus::new(&docs(&[&["p", "q", "q"]]))).unwrap();
        assert!(single[0].iter().all(|(_, w)| *w == 0.0));
        assert!(matches!(
            compute_tfidf(&Corpus::new(&[])),
            Err(Error::EmptyCorpus)
        ));
    }
}
