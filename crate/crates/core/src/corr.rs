//! Lagged Pearson correlation between tweet volume and case counts, strength
//! classes, and the Mann-Kendall trend test.
//!
//! A lag of `-5` pairs the cases of day `d` with the volume of day `d - 5`,
//! i.e. a five-day lead of tweets over cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{DailySeries, DateInterval};
use crate::stats::{normal_two_sided_p, student_t_two_sided_p};

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub lag: i64,
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrengthClass {
    Strong,
    Moderate,
    Weak,
    NotSignificant,
}

impl StrengthClass {
    pub fn name(self) -> &'static str {
        match self {
            StrengthClass::Strong => "strong",
            StrengthClass::Moderate => "moderate",
            StrengthClass::Weak => "weak",
            StrengthClass::NotSignificant => "not_significant",
        }
    }
}

/// Strength by magnitude: strong above 0.8, moderate in (0.3, 0.8], weak at
/// or below 0.3, each only when p < 0.05.
pub fn classify_strength(r: f64, p: f64) -> StrengthClass {
    let a = r.abs();
    if !(p < SIGNIFICANCE) {
        StrengthClass::NotSignificant
    } else if a > 0.8 {
        StrengthClass::Strong
    } else if a > 0.3 {
        StrengthClass::Moderate
    } else {
        StrengthClass::Weak
    }
}

/// Pairs `(cases[d], volume[d + lag])` for every day `d` of `cases` where
/// both exist, in date order.
pub fn align_with_lag(
    cases: &DailySeries,
    volume: &DailySeries,
    lag: i64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (d, c) in cases.iter() {
        if let Some(v) = volume.get(d + chrono::Duration::days(lag)) {
            xs.push(c);
            ys.push(v);
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientOverlap(xs.len()));
    }
    Ok((xs, ys))
}

/// Product-moment correlation with its two-sided p-value from
/// `t = r·sqrt((n-2)/(1-r²))` on n-2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientOverlap(n));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        if df == 0.0 {
            1.0
        } else {
            student_t_two_sided_p(r * (df / (1.0 - r * r)).sqrt(), df)
        }
    };
    Ok((r, p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagScan {
    pub entries: Vec<LagCorrelation>,
    /// Lags that could not be evaluated (too little overlap, zero variance).
    pub skipped: Vec<i64>,
    pub best_lead: Option<i64>,
}

impl LagScan {
    pub fn best(&self) -> Option<&LagCorrelation> {
        self.best_lead
            .and_then(|l| self.entries.iter().find(|e| e.lag == l))
    }
}

/// Correlate cases inside `period` against volume at every lag. The best lead
/// is the significant lag with the largest |r|, ties going to the smaller
/// |lag| (then the more negative lag).
pub fn lag_scan(
    cases: &DailySeries,
    volume: &DailySeries,
    lags: impl IntoIterator<Item = i64>,
    period: &DateInterval,
) -> LagScan {
    let in_period = cases.slice(period);
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for lag in lags {
        match align_with_lag(&in_period, volume, lag)
            .and_then(|(x, y)| pearson(&x, &y).map(|rp| (rp, x.len())))
        {
            Ok(((r, p), n)) => entries.push(LagCorrelation { lag, r, p, n }),
            Err(_) => skipped.push(lag),
        }
    }
    let best_lead = entries
        .iter()
        .filter(|e| e.p < SIGNIFICANCE)
        .min_by(|a, b| {
            b.r.abs()
                .total_cmp(&a.r.abs())
                .then(a.lag.abs().cmp(&b.lag.abs()))
                .then(a.lag.cmp(&b.lag))
        })
        .map(|e| e.lag);
    LagScan {
        entries,
        skipped,
        best_lead,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendDirection {
    Up,
    Down,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub direction: TrendDirection,
    pub p: f64,
    pub s: i64,
    pub z: f64,
}

/// Mann-Kendall monotone trend test (normal approximation, tie-corrected
/// variance, continuity correction).
pub fn trend_test(values: &[f64]) -> Result<TrendResult> {
    let n = values.len();
    if n < 8 {
        return Err(Error::TooFewObservations(n));
    }
    let mut s: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += match values[j].partial_cmp(&values[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j + 1;
    }
    let nf = n as f64;
    let var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0;
    let z = if var <= 0.0 || s == 0 {
        0.0
    } else if s > 0 {
        (s as f64 - 1.0) / var.sqrt()
    } else {
        (s as f64 + 1.0) / var.sqrt()
    };
    let p = if z == 0.0 { 1.0 } else { normal_two_sided_p(z) };
    let direction = if p < SIGNIFICANCE {
        if s > 0 {
            TrendDirection::Up
        } else {
            TrendDirection::Down
        }
    } else {
        TrendDirection::None
    };
    Ok(TrendResult { direction, p, s, z })
}
