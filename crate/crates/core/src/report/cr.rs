use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::series::DateInterval;

/// A valid topic with its predicted category and member-tweet count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedTopic {
    pub topic_id: String,
    pub region: String,
    pub day: NaiveDate,
    pub category: u8,
    pub tweets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRateRow {
    pub day: NaiveDate,
    /// Percent of the day's classified topic-tweet volume per category 1..7;
    /// `None` on days without classified tweets.
    pub shares: Option<[f64; 7]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRateSeries {
    pub region: String,
    pub rows: Vec<CategoryRateRow>,
}

/// CR(c, d) = 100 · (tweets in valid topics of category c on day d) /
/// (tweets in all valid topics on day d), one row per day of `days`.
pub fn category_rate(
    topics: &[ClassifiedTopic],
    region: &str,
    days: &DateInterval,
) -> CategoryRateSeries {
    let rows = days
        .days()
        .map(|day| {
            let mut volume = [0usize; 7];
            for t in topics.iter().filter(|t| t.region == region && t.day == day) {
                if (1..=7).contains(&t.category) {
                    volume[usize::from(t.category) - 1] += t.tweets;
                }
            }
            let total: usize = volume.iter().sum();
            CategoryRateRow {
                day,
                shares: (total > 0).then(|| volume.map(|v| 100.0 * v as f64 / total as f64)),
            }
        })
        .collect();
    CategoryRateSeries {
        region: region.to_string(),
        rows,
    }
}
