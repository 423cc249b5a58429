use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::textprep::TokenizedTweet;

pub const TOP_WORDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCluster {
    pub cluster_id: usize,
    pub members: Vec<String>,
    pub top_words: Vec<(String, usize)>,
    pub day: NaiveDate,
    pub region: String,
    /// More than two member tweets.
    pub valid: bool,
}

impl TopicCluster {
    pub fn words(&self) -> Vec<String> {
        self.top_words.iter().map(|(w, _)| w.clone()).collect()
    }
}

/// One cluster per non-empty assignment label, in label order. Top words are
/// ranked by total count across members, ties lexicographic.
pub fn extract_topics(
    assignments: &[usize],
    tweets: &[TokenizedTweet],
    day: NaiveDate,
    region: &str,
) -> Vec<TopicCluster> {
    assert_eq!(
        assignments.len(),
        tweets.len(),
        "assignments must cover all tweets"
    );
    let mut groups: BTreeMap<usize, Vec<&TokenizedTweet>> = BTreeMap::new();
    for (a, t) in assignments.iter().zip(tweets) {
        groups.entry(*a).or_default().push(t);
    }
    groups
        .into_iter()
        .map(|(cluster_id, members)| {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for t in &members {
                for w in &t.tokens {
                    *counts.entry(w.as_str()).or_insert(0) += 1;
                }
            }
            let mut ranked: Vec<(String, usize)> = counts
                .into_iter()
                .map(|(w, c)| (w.to_string(), c))
                .collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ranked.truncate(TOP_WORDS);
            TopicCluster {
                cluster_id,
                valid: members.len() > 2,
                members: members.iter().map(|t| t.tweet_id.clone()).collect(),
                top_words: ranked,
                day,
                region: region.to_string(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tw(id: &str, words: &str) -> TokenizedTweet {
        TokenizedTweet {
            tweet_id: id.into(),
            tokens: words.split_whitespace().map(str::to_string).collect(),
        }
    }

    #[test]
    fn counting_validity_and_ties() {
        let day = NaiveDate::from_ymd_opt(2020, 4, 1).unwrap();
        let tweets = vec![
            tw("1", "lockdown border"),
            tw("2", "lockdown border"),
            tw("3", "lockdown border"),
            tw("4", "zeta alpha"),
            tw("5", "mask"),
        ];
        let topics = extract_topics(&[0, 0, 0, 1, 1], &tweets, day, "GR");
        assert_eq!(topics.len(), 2);
        assert!(topics[0].valid);
        assert_eq!(
            topics[0].top_words,
            vec![("border".to_string(), 3), ("lockdown".to_string(), 3)]
        );
        assert!(!topics[1].valid);
        assert_eq!(topics[1].words(), vec!["alpha", "mask", "zeta"]);
        assert_eq!(topics[1].members, vec!["4", "5"]);
    }

    #[test]
    fn at_most_ten_words() {
        let day = NaiveDate::from_ymd_opt(2020, 4, 1).unwrap();
        let words: Vec<String> = (0..15).map(|i| format!("w{i:02}")).collect();
        let t = tw("1", &words.join(" "));
        let topics = extract_topics(&[0], &[t], day, "GR");
        assert_eq!(topics[0].top_words.len(), 10);
        assert_eq!(topics[0].top_words[0].0, "w00");
    }
}
