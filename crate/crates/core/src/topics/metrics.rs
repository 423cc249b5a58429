use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub mean: f64,
    /// `None` for topics with fewer than two in-vocabulary words.
    pub per_topic: Vec<Option<f64>>,
}

impl Coherence {
    pub fn skipped(&self) -> Vec<usize> {
        self.per_topic
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(|(i, _)| i)
            .collect()
    }
}

/// UMass coherence of one ranked word list: the mean over pairs i < j of
/// `ln((D(w_i, w_j) + 1) / D(w_j))`.
pub fn umass(words: &[usize], corpus: &Corpus) -> Option<f64> {
    if words.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..words.len() {
        for j in (i + 1)..words.len() {
            let co = corpus.co_doc_freq(words[i], words[j]) as f64;
            total += ((co + 1.0) / corpus.doc_freq[words[j]] as f64).ln();
            pairs += 1;
        }
    }
    Some(total / pairs as f64)
}

/// Average UMass coherence over topics given as ranked word lists. Words
/// outside the vocabulary are dropped first.
pub fn coherence(topics: &[Vec<String>], corpus: &Corpus) -> Result<Coherence> {
    let per_topic: Vec<Option<f64>> = topics
        .iter()
        .map(|t| {
            let idx: Vec<usize> = t.iter().filter_map(|w| corpus.word_index(w)).collect();
            umass(&idx, corpus)
        })
        .collect();
    let scored: Vec<f64> = per_topic.iter().flatten().copied().collect();
    if scored.is_empty() {
        return Err(Error::Invalid(
            "no topic has two in-vocabulary words".into(),
        ));
    }
    Ok(Coherence {
        mean: scored.iter().sum::<f64>() / scored.len() as f64,
        per_topic,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Mean silhouette with Euclidean distance. Points in singleton clusters
/// score 0, as does any point with a = b = 0.
pub fn silhouette(vectors: &[Vec<f64>], assignments: &[usize]) -> Result<f64> {
    if vectors.len() != assignments.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            got: assignments.len(),
        });
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for a in assignments {
        *sizes.entry(*a).or_insert(0) += 1;
    }
    if sizes.len() < 2 {
        return Err(Error::SilhouetteUndefined);
    }
    let n = vectors.len();
    let mut total = 0.0;
    for i in 0..n {
        let own = assignments[i];
        if sizes[&own] == 1 {
            continue;
        }
        let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
        for j in 0..n {
            if j != i {
                *sums.entry(assignments[j]).or_insert(0.0) += dist(&vectors[i], &vectors[j]);
            }
        }
        let a = sums[&own] / (sizes[&own] - 1) as f64;
        let b = sums
            .iter()
            .filter(|(c, _)| **c != own)
            .map(|(c, s)| s / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::TokenizedTweet;

    fn corpus(raw: &[&str]) -> Corpus {
        let docs: Vec<TokenizedTweet> = raw
            .iter()
            .enumerate()
            .map(|(i, d)| TokenizedTweet {
                tweet_id: i.to_string(),
                tokens: d.split_whitespace().map(str::to_string).collect(),
            })
            .collect();
        Corpus::new(&docs)
    }

    fn s(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn three_document_hand_score() {
        let c = corpus(&["mask shop", "mask shop border", "border open"]);
        // D(mask)=2 D(shop)=2 D(border)=2 D(open)=1
        // topic [mask, shop, border]:
        //   (mask, shop)   ln((2+1)/2)
        //   (mask, border) ln((1+1)/2) = 0
        //   (shop, border) ln((1+1)/2) = 0
        // topic [open, mask]: ln((0+1)/2)
        let t1 = (1.5f64.ln() + 0.0 + 0.0) / 3.0;
        let t2 = 0.5f64.ln();
        let got = coherence(&[s(&["mask", "shop", "border"]), s(&["open", "mask"])], &c).unwrap();
        assert!((got.mean - (t1 + t2) / 2.0).abs() < 1e-12);
        assert!(got.per_topic[0].unwrap() > 0.0);
        assert!(got.per_topic[1].unwrap() < 0.0);
    }

    #[test]
    fn out_of_vocab_topics_skipped() {
        let c = corpus(&["a b", "b c"]);
        let got = coherence(&[s(&["a", "zzz"]), s(&["a", "b"])], &c).unwrap();
        assert_eq!(got.skipped(), vec![0]);
        assert!((got.mean - (2.0f64 / 2.0).ln()).abs() < 1e-12);
        assert!(coherence(&[s(&["zzz", "a"])], &c).is_err());
    }

    #[test]
    fn silhouette_cases() {
        let blobs = vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![0.0, 0.1],
            vec![50.0, 50.0],
            vec![50.1, 50.0],
            vec![50.0, 50.1],
        ];
        assert!(silhouette(&blobs, &[0, 0, 0, 1, 1, 1]).unwrap() > 0.9);
        assert_eq!(
            silhouette(&vec![vec![1.0, 1.0]; 4], &[0, 0, 1, 1]).unwrap(),
            0.0
        );
        assert!(matches!(
            silhouette(&blobs, &[0; 6]),
            Err(Error::SilhouetteUndefined)
        ));
        // a singleton contributes 0 but still counts in the mean
        let pts = vec![vec![0.0], vec![1.0], vec![10.0]];
        // point 0: a = 1, b = 10 → 0.9; point 1: a = 1, b = 9 → 8/9
        let want = (0.9 + 8.0 / 9.0 + 0.0) / 3.0;
        assert!((silhouette(&pts, &[0, 0, 1]).unwrap() - want).abs() < 1e-12);
    }
}
