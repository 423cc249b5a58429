//! Recursive Bayesian estimate of the effective reproduction number.
//!
//! Daily counts are modelled as `k_t ~ Poisson(k_{t-1} · exp((R - 1) / SI))`
//! with SI the serial interval. The posterior over a discrete R grid is
//! carried from day to day; between days it diffuses through a Gaussian
//! random walk of standard deviation `sigma_rw`.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::DailySeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub step: f64,
}

impl Default for RtGrid {
    fn default() -> Self {
        RtGrid {
            r_min: 0.0,
            r_max: 6.0,
            step: 0.01,
        }
    }
}

impl RtGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_min < self.r_max && self.step > 0.0) {
            return Err(Error::Invalid(format!("invalid R grid {self:?}")));
        }
        if self.r_max < 3.0 {
            return Err(Error::Invalid(format!(
                "R grid must reach at least 3, got r_max = {}",
                self.r_max
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.r_max - self.r_min) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// Index of the grid point nearest to `r`.
    pub fn index_of(&self, r: f64) -> usize {
        (((r - self.r_min) / self.step).round().max(0.0) as usize).min(self.len() - 1)
    }

    /// Replace `r` by the nearest grid value.
    pub fn snap(&self, r: f64) -> f64 {
        self.value(self.index_of(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtConfig {
    pub grid: RtGrid,
    pub sigma_rw: f64,
    pub serial_interval: f64,
    pub ci_mass: f64,
}

impl Default for RtConfig {
    fn default() -> Self {
        RtConfig {
            grid: RtGrid::default(),
            sigma_rw: 0.15,
            serial_interval: 7.0,
            ci_mass: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtPosterior {
    pub start: NaiveDate,
    pub grid: RtGrid,
    /// Per-day probability vector over the grid.
    pub posterior: Vec<Vec<f64>>,
    pub map_estimate: Vec<f64>,
    pub credible_interval: Vec<(f64, f64)>,
    pub ci_mass: f64,
    /// Days whose previous count was below 1 and was floored to 1.
    pub floored: Vec<bool>,
}

impl RtPosterior {
    pub fn len(&self) -> usize {
        self.map_estimate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map_estimate.is_empty()
    }

    pub fn date(&self, i: usize) -> NaiveDate {
        self.start + Duration::days(i as i64)
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.len()).map(|i| self.date(i)).collect()
    }

    pub fn map_series(&self) -> DailySeries {
        DailySeries::new(self.start, self.map_estimate.clone())
    }
}

/// Row-stochastic banded Gaussian transition over the grid.
struct RandomWalk {
    rows: Vec<(usize, Vec<f64>)>,
}

impl RandomWalk {
    fn new(grid: &RtGrid, sigma: f64) -> Self {
        let n = grid.len();
        let band = ((6.0 * sigma / grid.step).ceil() as usize).max(1);
        let rows = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(band);
                let hi = (i + band).min(n - 1);
                let mut w: Vec<f64> = (lo..=hi)
                    .map(|j| {
                        let d = (j as f64 - i as f64) * grid.step;
                        (-d * d / (2.0 * sigma * sigma)).exp()
                    })
                    .collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= s);
                (lo, w)
            })
            .collect();
        RandomWalk { rows }
    }

    fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        for (i, (lo, w)) in self.rows.iter().enumerate() {
            let mass = p[i];
            if mass == 0.0 {
                continue;
            }
            for (k, wk) in w.iter().enumerate() {
                out[lo + k] += mass * wk;
            }
        }
        let s: f64 = out.iter().sum();
        out.iter_mut().for_each(|x| *x /= s);
        out
    }
}

fn normalize_log(logp: &[f64]) -> Vec<f64> {
    let m = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logp.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Shortest contiguous grid interval holding at least `mass`, widened if
/// needed so that it contains the MAP index.
fn credible_interval(p: &[f64], mass: f64, map_idx: usize) -> (usize, usize) {
    let n = p.len();
    let mut best = (0, n - 1);
    let mut lo = 0;
    let mut acc = 0.0;
    for hi in 0..n {
        acc += p[hi];
        while lo < hi && acc - p[lo] >= mass {
            acc -= p[lo];
            lo += 1;
        }
        if acc >= mass && hi - lo < best.1 - best.0 {
            best = (lo, hi);
        }
    }
    (best.0.min(map_idx), best.1.max(map_idx))
}

pub fn estimate_rt(series: &DailySeries, cfg: &RtConfig) -> Result<RtPosterior> {
    cfg.grid.validate()?;
    if !(cfg.sigma_rw > 0.0 && cfg.serial_interval > 0.0 && cfg.ci_mass > 0.0 && cfg.ci_mass <= 1.0)
    {
        return Err(Error::Invalid(
            "sigma_rw, serial_interval and ci_mass must be positive (ci_mass ≤ 1)".into(),
        ));
    }
    if series.is_empty() {
        return Err(Error::Invalid("empty case series".into()));
    }
    let ks = &series.values;
    if ks.iter().any(|k| *k < 0.0 || !k.is_finite()) {
        return Err(Error::Invalid(
            "case series must be finite and nonnegative".into(),
        ));
    }
    let first = ks
        .iter()
        .position(|k| *k >= 1.0)
        .ok_or(Error::NoEpidemicSignal)?;
    if first + 1 >= ks.len() {
        return Err(Error::Invalid(
            "case series ends on its first positive day".into(),
        ));
    }

    let grid = cfg.grid;
    let rs = grid.values();
    let gamma = 1.0 / cfg.serial_interval;
    let growth: Vec<f64> = rs.iter().map(|r| gamma * (r - 1.0)).collect();
    let walk = RandomWalk::new(&grid, cfg.sigma_rw);

    let days = ks.len() - first - 1;
    let mut out = RtPosterior {
        start: series.date(first + 1),
        grid,
        posterior: Vec::with_capacity(days),
        map_estimate: Vec::with_capacity(days),
        credible_interval: Vec::with_capacity(days),
        ci_mass: cfg.ci_mass,
        floored: Vec::with_capacity(days),
    };
    let mut prior = vec![1.0 / rs.len() as f64; rs.len()];
    for t in (first + 1)..ks.len() {
        let (prev, floored) = if ks[t - 1] < 1.0 {
            (1.0, true)
        } else {
            (ks[t - 1], false)
        };
        let k = ks[t];
        let ln_prev = prev.ln();
        let logp: Vec<f64> = prior
            .iter()
            .zip(&growth)
            .map(|(p, g)| {
                // log λ = ln k_{t-1} + γ (R - 1)
                let ln_lambda = ln_prev + g;
                p.max(f64::MIN_POSITIVE).ln() + k * ln_lambda - ln_lambda.exp()
            })
            .collect();
        let post = normalize_log(&logp);
        let map_idx = post
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v > post[best] { i } else { best });
        let (lo, hi) = credible_interval(&post, cfg.ci_mass, map_idx);
        out.map_estimate.push(grid.value(map_idx));
        out.credible_interval.push((grid.value(lo), grid.value(hi)));
        out.floored.push(floored);
        prior = walk.apply(&post);
        out.posterior.push(post);
    }
    Ok(out)
}
