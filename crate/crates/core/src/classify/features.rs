use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Country, LabeledTopic};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountryEncoding {
    #[default]
    OneHot,
    /// Single column holding the alphabetical label code.
    Integer,
}

/// Fitted topic-word vocabulary with idf weights; reused to transform
/// unseen topics. Out-of-vocabulary words are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub vocab: Vec<String>,
    pub idf: Vec<f64>,
    pub encoding: CountryEncoding,
}

impl FeatureSpace {
    pub fn fit(topics: &[LabeledTopic], encoding: CountryEncoding) -> Result<Self> {
        if topics.is_empty() {
            return Err(Error::InsufficientSamples("no labeled topics".into()));
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for t in topics {
            let mut words: Vec<&str> = t.top_words.iter().map(String::as_str).collect();
            words.sort_unstable();
            words.dedup();
            for w in words {
                *df.entry(w).or_insert(0) += 1;
            }
        }
        let n = topics.len() as f64;
        Ok(FeatureSpace {
            vocab: df.keys().map(|w| w.to_string()).collect(),
            idf: df.values().map(|d| (n / *d as f64).ln()).collect(),
            encoding,
        })
    }

    pub fn dim(&self) -> usize {
        self.vocab.len() + self.country_dim()
    }

    fn country_dim(&self) -> usize {
        match self.encoding {
            CountryEncoding::OneHot => Country::ALL.len(),
            CountryEncoding::Integer => 1,
        }
    }

    pub fn transform(&self, words: &[String], country: Country) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for w in words {
            if let Ok(i) = self.vocab.binary_search(w) {
                v[i] += 1.0;
            }
        }
        for (x, idf) in v.iter_mut().zip(&self.idf) {
            *x *= idf;
        }
        let base = self.vocab.len();
        match self.encoding {
            CountryEncoding::OneHot => v[base + country.code()] = 1.0,
            CountryEncoding::Integer => v[base] = country.code() as f64,
        }
        v
    }

    pub fn transform_topic(&self, topic: &LabeledTopic) -> Vec<f64> {
        self.transform(&topic.top_words, topic.country)
    }
}

/// TF-IDF over topic word lists (one topic per document, raw counts times
/// ln(N/df)) with the country block appended.
pub fn build_features(
    topics: &[LabeledTopic],
    encoding: CountryEncoding,
) -> Result<(Vec<Vec<f64>>, FeatureSpace)> {
    let space = FeatureSpace::fit(topics, encoding)?;
    Ok((
        topics.iter().map(|t| space.transform_topic(t)).collect(),
        space,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn topic(words: &str, country: Country, category: u8) -> LabeledTopic {
        LabeledTopic::new(
            words.split_whitespace().map(str::to_string).collect(),
            country,
            category,
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_weights() {
        let topics = vec![
            topic("mask mask school", Country::Gr, 1),
            topic("mask border", Country::France, 2),
            topic("border vaccine", Country::Luxembourg, 3),
        ];
        let (x, space) = build_features(&topics, CountryEncoding::OneHot).unwrap();
        assert_eq!(space.vocab, vec!["border", "mask", "school", "vaccine"]);
        let l32 = (1.5f64).ln();
        let l3 = (3.0f64).ln();
        let want = [
            [0.0, 2.0 * l32, l3, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [l32, l32, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [l32, 0.0, 0.0, l3, 0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        for (row, w) in x.iter().zip(&want) {
            for (a, b) in row.iter().zip(w) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn disjoint_topics_are_orthogonal_and_repeats_identical() {
        let topics = vec![
            topic("a b", Country::Gr, 1),
            topic("c d", Country::Gr, 2),
            topic("a b", Country::Gr, 1),
        ];
        let (x, space) = build_features(&topics, CountryEncoding::OneHot).unwrap();
        let n = space.vocab.len();
        let dot: f64 = x[0][..n].iter().zip(&x[1][..n]).map(|(a, b)| a * b).sum();
        assert_eq!(dot, 0.0);
        assert_eq!(x[0], x[2]);
    }

    #[test]
    fn integer_mode_and_unknown_words() {
        let topics = vec![
            topic("a b", Country::Germany, 1),
            topic("b c", Country::Belgium, 2),
        ];
        let (x, space) = build_features(&topics, CountryEncoding::Integer).unwrap();
        assert_eq!(x[0].len(), space.vocab.len() + 1);
        assert_eq!(*x[0].last().unwrap(), 3.0);
        let oov = space.transform(&["zzz".to_string()], Country::Luxembourg);
        assert!(oov[..space.vocab.len()].iter().all(|v| *v == 0.0));
        assert_eq!(*oov.last().unwrap(), 4.0);
        let onehot = FeatureSpace::fit(&topics, CountryEncoding::OneHot)
            .unwrap()
            .transform_topic(&topics[0]);
        assert_eq!(onehot[space.vocab.len()..].iter().sum::<f64>(), 1.0);
    }
}
