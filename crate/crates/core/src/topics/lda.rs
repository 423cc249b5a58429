//! LDA fitted by collapsed Gibbs sampling on TF-IDF pseudo-counts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::corpus::{Corpus, TfIdf};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub n_topics: usize,
    /// Defaults to 50 / n_topics.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub quantization: f64,
}

impl LdaConfig {
    pub fn new(n_topics: usize) -> Self {
        LdaConfig {
            n_topics,
            alpha: None,
            beta: 0.01,
            iterations: 500,
            quantization: 10.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.n_topics as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub n_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub topic_word: Vec<Vec<f64>>,
    pub doc_topic: Vec<Vec<f64>>,
    pub seed: u64,
}

impl LdaModel {
    /// The `n` most probable word indices of a topic (ties to lower index).
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<usize> {
        let row = &self.topic_word[topic];
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|a, b| row[*b].total_cmp(&row[*a]).then(a.cmp(b)));
        idx.truncate(n);
        idx
    }
}

/// Integer pseudo-counts `round(Q·w / max_w)` per document. A document left
/// empty keeps its highest-weight word (lowest index on ties) at count 1.
pub fn quantize(tfidf: &TfIdf, q: f64) -> Vec<Vec<(usize, u32)>> {
    let max_w = tfidf.iter().flatten().map(|(_, w)| *w).fold(0.0, f64::max);
    tfidf
        .iter()
        .map(|doc| {
            let mut out: Vec<(usize, u32)> = if max_w > 0.0 {
                doc.iter()
                    .map(|(t, w)| (*t, (q * w / max_w).round() as u32))
                    .filter(|(_, c)| *c > 0)
                    .collect()
            } else {
                Vec::new()
            };
            if out.is_empty() {
                let best = doc
                    .iter()
                    .fold(None::<(usize, f64)>, |best, (t, w)| match best {
                        Some((_, bw)) if bw >= *w => best,
                        _ => Some((*t, *w)),
                    });
                if let Some((t, _)) = best {
                    out.push((t, 1));
                }
            }
            out
        })
        .collect()
}

pub fn lda_fit(corpus: &Corpus, tfidf: &TfIdf, cfg: &LdaConfig, seed: u64) -> Result<LdaModel> {
    let k = cfg.n_topics;
    if k == 0 {
        return Err(Error::Invalid("n_topics must be ≥ 1".into()));
    }
    if corpus.is_empty() || tfidf.len() != corpus.len() {
        return Err(Error::EmptyCorpus);
    }
    let counts = quantize(tfidf, cfg.quantization);
    if counts.iter().all(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let v = corpus.vocab.len();
    let alpha = cfg.alpha();
    let beta = cfg.beta;
    let mut rng = seed::rng(seed);

    let words: Vec<Vec<usize>> = counts
        .iter()
        .map(|doc| {
            doc.iter()
                .flat_map(|(t, c)| std::iter::repeat_n(*t, *c as usize))
                .collect()
        })
        .collect();
    let mut z: Vec<Vec<usize>> = words
        .iter()
        .map(|doc| doc.iter().map(|_| rng.random_range(0..k)).collect())
        .collect();
    let mut n_dk = vec![vec![0u32; k]; words.len()];
    let mut n_kw = vec![vec![0u32; v]; k];
    let mut n_k = vec![0u32; k];
    for (d, doc) in words.iter().enumerate() {
        for (i, w) in doc.iter().enumerate() {
            let t = z[d][i];
            n_dk[d][t] += 1;
            n_kw[t][*w] += 1;
            n_k[t] += 1;
        }
    }

    let vbeta = v as f64 * beta;
    let mut p = vec![0.0; k];
    for _ in 0..cfg.iterations {
        for (d, doc) in words.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = z[d][i];
                n_dk[d][old] -= 1;
                n_kw[old][w] -= 1;
                n_k[old] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (n_dk[d][t] as f64 + alpha) * (n_kw[t][w] as f64 + beta)
                        / (n_k[t] as f64 + vbeta);
                    p[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = p.iter().position(|c| u < *c).unwrap_or(k - 1);
                z[d][i] = new;
                n_dk[d][new] += 1;
                n_kw[new][w] += 1;
                n_k[new] += 1;
            }
        }
    }

    let doc_topic = words
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            let denom = doc.len() as f64 + k as f64 * alpha;
            (0..k)
                .map(|t| (n_dk[d][t] as f64 + alpha) / denom)
                .collect()
        })
        .collect();
    let topic_word = (0..k)
        .map(|t| {
            let denom = n_k[t] as f64 + vbeta;
            (0..v).map(|w| (n_kw[t][w] as f64 + beta) / denom).collect()
        })
        .collect();
    Ok(LdaModel {
        n_topics: k,
        alpha,
        beta,
        topic_word,
        doc_topic,
        seed,
    })
}
