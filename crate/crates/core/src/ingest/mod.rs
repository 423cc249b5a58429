//! Tweet and case-count ingestion, offline location normalization and
//! region aggregation.

mod cases;
mod fold;
mod gazetteer;
mod location;
mod regions;
mod tweets;

use std::collections::{BTreeMap, BTreeSet};

pub use cases::{aggregate_region_cases, load_cases, pad_to, CaseRecord, CaseSeries};
pub use fold::{fold, normalize_place};
pub use gazetteer::{normalize_location, Gazetteer, GazetteerEntry};
pub use location::LocationPath;
pub use regions::{assign_region, load_region_specs, RegionSpec};
pub use tweets::{
    load_tweets, resolve_tweets, LoadedTweets, ResolveStats, TweetFormat, TweetRecord,
};

use crate::series::{DailySeries, DateInterval};

/// Tweets per calendar day assigned to `region`, zero-filled across `window`.
/// `assignments[i]` holds the region names of `tweets[i]`.
pub fn daily_volume(
    tweets: &[TweetRecord],
    assignments: &[Vec<String>],
    region: &str,
    window: &DateInterval,
) -> DailySeries {
    let mut series = DailySeries::zeros(*window);
    for (t, regions) in tweets.iter().zip(assignments) {
        if regions.iter().any(|r| r == region) {
            if let Some(i) = series.index_of(t.date) {
                series.values[i] += 1.0;
            }
        }
    }
    series
}

/// Tweet and distinct-user totals per region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSummary {
    pub region: String,
    pub tweets: usize,
    pub users: usize,
}

pub fn summarize(
    tweets: &[TweetRecord],
    assignments: &[Vec<String>],
    regions: &[String],
) -> Vec<RegionSummary> {
    let mut counts: BTreeMap<&str, (usize, BTreeSet<&str>)> = BTreeMap::new();
    for (t, rs) in tweets.iter().zip(assignments) {
        for r in rs {
            let e = counts.entry(r.as_str()).or_default();
            e.0 += 1;
            e.1.insert(t.user_id.as_str());
        }
    }
    regions
        .iter()
        .map(|r| {
            let (n, users) = counts.get(r.as_str()).cloned().unwrap_or_default();
            RegionSummary {
                region: r.clone(),
                tweets: n,
                users: users.len(),
            }
        })
        .collect()
}
