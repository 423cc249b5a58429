//! Four-period segmentation of an epidemic wave from its R(t) trajectory.
//!
//! With R₀ bounds `[r0_min, r0_max]`:
//! * t0 is the first peak of R(t) above `r0_max`, t1 the first day on or
//!   after t0 with R(t) < `r0_max`;
//! * pre-peak is the 30 days before t1;
//! * free-contagious runs from t1 until R(t) first drops below `r0_min`;
//! * measures runs from there until R(t) first drops below 1;
//! * decay runs from there to the end of the series.
//!
//! All crossings are first crossings: later oscillations never reopen a
//! period.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::rt::RtPosterior;
use crate::error::{Error, Result};
use crate::series::DateInterval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakRule {
    /// First local maximum above `r0_max`.
    #[default]
    FirstLocal,
    /// Global maximum of the trajectory.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodConfig {
    pub r0_min: f64,
    pub r0_max: f64,
    pub pre_peak_days: i64,
    pub peak_rule: PeakRule,
}

impl Default for PeriodConfig {
    fn default() -> Self {
        PeriodConfig {
            r0_min: 1.4,
            r0_max: 2.5,
            pre_peak_days: 30,
            peak_rule: PeakRule::FirstLocal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PeriodFlags {
    /// Pre-peak would start before the first R(t) day and was clipped.
    pub pre_peak_clipped: bool,
    /// R(t) never dropped below `r0_min` after t1.
    pub measures_empty: bool,
    /// R(t) never dropped below 1.
    pub decay_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PandemicPeriods {
    pub t0: NaiveDate,
    pub t1: NaiveDate,
    /// The other peak reading, for comparison (global max when the first
    /// local max is used, and vice versa).
    pub t0_alternative: NaiveDate,
    pub pre_peak: DateInterval,
    pub free_contagious: DateInterval,
    pub measures: DateInterval,
    pub decay: DateInterval,
    pub flags: PeriodFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    PrePeak,
    FreeContagious,
    Measures,
    Decay,
}

impl Period {
    pub const ALL: [Period; 4] = [
        Period::PrePeak,
        Period::FreeContagious,
        Period::Measures,
        Period::Decay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Period::PrePeak => "pre_peak",
            Period::FreeContagious => "free_contagious",
            Period::Measures => "measures",
            Period::Decay => "decay",
        }
    }
}

impl PandemicPeriods {
    pub fn interval(&self, p: Period) -> DateInterval {
        match p {
            Period::PrePeak => self.pre_peak,
            Period::FreeContagious => self.free_contagious,
            Period::Measures => self.measures,
            Period::Decay => self.decay,
        }
    }

    pub fn period_of(&self, d: NaiveDate) -> Option<Period> {
        Period::ALL
            .into_iter()
            .find(|p| self.interval(*p).contains(d))
    }
}

fn first_local_peak_above(map: &[f64], level: f64) -> Option<usize> {
    let n = map.len();
    let mut i = 0;
    while i < n {
        // plateau [i, j]
        let mut j = i;
        while j + 1 < n && map[j + 1] == map[i] {
            j += 1;
        }
        let rises_in = i == 0 || map[i - 1] < map[i];
        let falls_out = j + 1 < n && map[j + 1] < map[i];
        if map[i] > level && rises_in && falls_out {
            return Some(i);
        }
        i = j + 1;
    }
    None
}

fn global_peak(map: &[f64]) -> usize {
    map.iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > map[best] { i } else { best })
}

/// Segment a MAP trajectory whose first value is dated `start`.
pub fn slice_trajectory(
    start: NaiveDate,
    map: &[f64],
    cfg: &PeriodConfig,
) -> Result<PandemicPeriods> {
    let n = map.len();
    let day = |i: usize| start + Duration::days(i as i64);
    let end = day(n);
    if !map.iter().any(|m| *m > cfg.r0_max) {
        return Err(Error::NoPeak(cfg.r0_max));
    }
    let local = first_local_peak_above(map, cfg.r0_max);
    let global = global_peak(map);
    let t0 = match cfg.peak_rule {
        PeakRule::FirstLocal => local.ok_or(Error::NoDescent(cfg.r0_max))?,
        PeakRule::Global => global,
    };
    let alternative = match cfg.peak_rule {
        PeakRule::FirstLocal => global,
        PeakRule::Global => local.unwrap_or(global),
    };
    let first_below = |from: usize, level: f64| (from..n).find(|&i| map[i] < level);
    let t1 = first_below(t0, cfg.r0_max).ok_or(Error::NoDescent(cfg.r0_max))?;

    let mut flags = PeriodFlags::default();
    let mut pre_start = day(t1) - Duration::days(cfg.pre_peak_days);
    if pre_start < start {
        pre_start = start;
        flags.pre_peak_clipped = true;
    }
    let f = first_below(t1, cfg.r0_min);
    let m = f.and_then(|f| first_below(f, 1.0));
    flags.measures_empty = f.is_none();
    flags.decay_empty = m.is_none();
    let f_day = f.map(day).unwrap_or(end);
    let m_day = m.map(day).unwrap_or(end);
    Ok(PandemicPeriods {
        t0: day(t0),
        t1: day(t1),
        t0_alternative: day(alternative),
        pre_peak: DateInterval::new(pre_start, day(t1)),
        free_contagious: DateInterval::new(day(t1), f_day),
        measures: DateInterval::new(f_day, m_day),
        decay: DateInterval::new(m_day, end),
        flags,
    })
}

pub fn slice_periods(rt: &RtPosterior, cfg: &PeriodConfig) -> Result<PandemicPeriods> {
    slice_trajectory(rt.start, &rt.map_estimate, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 2, 1).unwrap()
    }

    #[test]
    fn hand_walked_vector() {
        // days are 1-based in the walk-through: ten days at 3.0, then
        // 2.6 (day 11), 2.4 (12), 1.6 (13), 1.2 (14), 0.8 (15), 0.5 ...
        let mut map = vec![3.0; 10];
        map.extend([2.6, 2.4, 1.6, 1.2, 0.8, 0.5, 0.5]);
        let p = slice_trajectory(start(), &map, &PeriodConfig::default()).unwrap();
        let day = |one_based: i64| start() + Duration::days(one_based - 1);
        assert_eq!(p.t0, day(1));
        assert_eq!(p.t1, day(12));
        assert_eq!(p.free_contagious, DateInterval::new(day(12), day(14)));
        assert_eq!(p.measures, DateInterval::new(day(14), day(15)));
        assert_eq!(p.decay, DateInterval::new(day(15), day(18)));
        // pre-peak would start 30 days before day 12 but data starts at day 1
        assert_eq!(p.pre_peak, DateInterval::new(day(1), day(12)));
        assert!(p.flags.pre_peak_clipped);
        assert!(!p.flags.decay_empty);
    }

    #[test]
    fn no_peak() {
        assert!(matches!(
            slice_trajectory(start(), &[0.5; 20], &PeriodConfig::default()),
            Err(Error::NoPeak(_))
        ));
    }

    #[test]
    fn decay_never_reached() {
        let mut map = vec![1.0; 35];
        map.extend([3.0, 2.0, 1.2, 1.1, 1.05]);
        let p = slice_trajectory(start(), &map, &PeriodConfig::default()).unwrap();
        assert!(p.flags.decay_empty);
        assert!(p.decay.is_empty());
        assert!(!p.flags.pre_peak_clipped);
        assert_eq!(p.pre_peak.len_days(), 30);
    }

    #[test]
    fn global_rule_is_retrievable() {
        let mut map = vec![1.0; 5];
        map.extend([2.8, 2.6, 2.7, 3.5, 2.0, 1.2, 0.9]);
        let local = slice_trajectory(start(), &map, &PeriodConfig::default()).unwrap();
        let global = slice_trajectory(
            start(),
            &map,
            &PeriodConfig {
                peak_rule: PeakRule::Global,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(local.t0, start() + Duration::days(5));
        assert_eq!(local.t0_alternative, start() + Duration::days(8));
        assert_eq!(global.t0, start() + Duration::days(8));
        assert_eq!(global.t1, start() + Duration::days(9));
        // first-crossing semantics: local rule never reopens after 2.6 -> 2.7
        assert_eq!(local.t1, start() + Duration::days(9));
    }

    proptest! {
        #[test]
        fn shift_equivariance(
            map in proptest::collection::vec(0.2f64..4.0, 40..80),
            shift in -200i64..200,
        ) {
            let cfg = PeriodConfig::default();
            let a = slice_trajectory(start(), &map, &cfg);
            let b = slice_trajectory(start() + Duration::days(shift), &map, &cfg);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    for p in Period::ALL {
                        prop_assert_eq!(a.interval(p).shift(shift), b.interval(p));
                    }
                    prop_assert_eq!(a.t0 + Duration::days(shift), b.t0);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "shift changed success"),
            }
        }

        #[test]
        fn periods_are_disjoint_and_contiguous(map in proptest::collection::vec(0.2f64..4.0, 40..80)) {
            if let Ok(p) = slice_trajectory(start(), &map, &PeriodConfig::default()) {
                prop_assert_eq!(p.pre_peak.end, p.free_contagious.start);
                prop_assert_eq!(p.free_contagious.end, p.measures.start);
                prop_assert_eq!(p.measures.end, p.decay.start);
                prop_assert_eq!(p.decay.end, start() + Duration::days(map.len() as i64));
                for a in Period::ALL {
                    for b in Period::ALL {
                        if a != b {
                            prop_assert!(!p.interval(a).overlaps(&p.interval(b)));
                        }
                    }
                }
            }
        }
    }
}
