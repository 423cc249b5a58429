//! Day-indexed series and half-open date intervals.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

/// Half-open calendar interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateInterval {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateInterval {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        DateInterval { start, end }
    }

    /// Interval covering `first..=last`.
    pub fn inclusive(first: NaiveDate, last: NaiveDate) -> Self {
        DateInterval {
            start: first,
            end: last + Duration::days(1),
        }
    }

    pub fn len_days(&self) -> i64 {
        (self.end - self.start).num_days().max(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len_days() == 0
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        d >= self.start && d < self.end
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        let start = self.start;
        (0..self.len_days()).map(move |i| start + Duration::days(i))
    }

    pub fn overlaps(&self, other: &DateInterval) -> bool {
        !self.is_empty() && !other.is_empty() && self.start < other.end && other.start < self.end
    }

    pub fn shift(&self, days: i64) -> Self {
        DateInterval {
            start: self.start + Duration::days(days),
            end: self.end + Duration::days(days),
        }
    }
}

/// Contiguous daily series starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub start: NaiveDate,
    pub values: Vec<f64>,
}

impl DailySeries {
    pub fn new(start: NaiveDate, values: Vec<f64>) -> Self {
        DailySeries { start, values }
    }

    pub fn zeros(window: DateInterval) -> Self {
        DailySeries {
            start: window.start,
            values: vec![0.0; window.len_days() as usize],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date(&self, i: usize) -> NaiveDate {
        self.start + Duration::days(i as i64)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.len()).map(move |i| self.date(i))
    }

    pub fn span(&self) -> DateInterval {
        DateInterval {
            start: self.start,
            end: self.start + Duration::days(self.len() as i64),
        }
    }

    pub fn index_of(&self, d: NaiveDate) -> Option<usize> {
        let off = (d - self.start).num_days();
        (off >= 0 && (off as usize) < self.len()).then_some(off as usize)
    }

    pub fn get(&self, d: NaiveDate) -> Option<f64> {
        self.index_of(d).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (self.date(i), *v))
    }

    /// Restrict to the days of `window` that the series covers.
    pub fn slice(&self, window: &DateInterval) -> DailySeries {
        let start = window.start.max(self.start);
        let end = window.end.min(self.span().end);
        if end <= start {
            return DailySeries::new(start, Vec::new());
        }
        let a = self.index_of(start).unwrap_or(0);
        let b = a + (end - start).num_days() as usize;
        DailySeries::new(start, self.values[a..b].to_vec())
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}
