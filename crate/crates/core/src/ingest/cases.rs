use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::fold::fold;
use super::location::LocationPath;
use super::regions::RegionSpec;
use crate::error::{Error, Result};
use crate::series::DailySeries;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub date: NaiveDate,
    /// Location path (`Lorraine, France`) or a region name (`GR`).
    pub region: String,
    /// Raw daily count; data revisions can make it negative.
    pub new_cases: i64,
    pub deaths: i64,
}

/// Load `date,region,new_cases,deaths`. Duplicate (date, region) rows are
/// rejected.
pub fn load_cases(path: &Path) -> Result<Vec<CaseRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in rdr.deserialize::<CaseRecord>().enumerate() {
        let line = i + 2;
        let bad = |reason: String| Error::MalformedLine {
            path: path.display().to_string(),
            line,
            reason,
        };
        let rec = row.map_err(|e| bad(e.to_string()))?;
        if rec.deaths < 0 {
            return Err(bad("negative deaths".into()));
        }
        if !seen.insert((rec.date, region_key(&rec.region))) {
            return Err(bad(format!(
                "duplicate record for {} on {}",
                rec.region, rec.date
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

fn region_key(s: &str) -> String {
    match s.parse::<LocationPath>() {
        Ok(p) => p
            .components()
            .iter()
            .map(|c| fold(c))
            .collect::<Vec<_>>()
            .join(","),
        Err(_) => fold(s.trim()),
    }
}

/// Per-region daily new cases after cleaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSeries {
    pub region: String,
    /// Cleaned counts (zero-filled, negatives clamped to 0).
    pub cases: DailySeries,
    /// Raw sums after zero-fill, before clamping (may be negative).
    pub raw: Vec<i64>,
    pub deaths: Vec<i64>,
    /// (date, member) pairs whose negative value was clamped to 0.
    pub clamped: Vec<(NaiveDate, String)>,
}

impl CaseSeries {
    pub fn from_counts(region: impl Into<String>, start: NaiveDate, counts: &[f64]) -> Self {
        CaseSeries {
            region: region.into(),
            cases: DailySeries::new(start, counts.to_vec()),
            raw: counts.iter().map(|v| v.round() as i64).collect(),
            deaths: vec![0; counts.len()],
            clamped: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

/// Sum the constituent members of `spec` day by day. Records are matched to a
/// member by exact location path, or to the spec by its name. Days with no
/// record count as zero; a member listed in `zero_fill_before` contributes
/// zero before that date; a negative member value is clamped to zero and
/// recorded in [`CaseSeries::clamped`].
pub fn aggregate_region_cases(
    records: &[CaseRecord],
    spec: &RegionSpec,
    zero_fill_before: &BTreeMap<String, NaiveDate>,
) -> Result<CaseSeries> {
    let zero_fill: Vec<(LocationPath, NaiveDate)> = zero_fill_before
        .iter()
        .filter_map(|(k, d)| k.parse::<LocationPath>().ok().map(|p| (p, *d)))
        .collect();
    let name_key = fold(spec.name.trim());

    // member label for each matching record
    let matched: Vec<(&CaseRecord, String, Option<NaiveDate>)> = records
        .iter()
        .filter_map(|r| {
            let path = r.region.parse::<LocationPath>().ok()?;
            let member = spec.members.iter().find(|m| path.same_place(m));
            match member {
                Some(m) => {
                    let fill = zero_fill
                        .iter()
                        .find(|(p, _)| p.same_place(m))
                        .map(|(_, d)| *d);
                    Some((r, m.to_string(), fill))
                }
                None if fold(r.region.trim()) == name_key => Some((r, spec.name.clone(), None)),
                None => None,
            }
        })
        .collect();
    if matched.is_empty() {
        return Err(Error::EmptyRegion(spec.name.clone()));
    }
    let first = matched
        .iter()
        .map(|(r, _, _)| r.date)
        .min()
        .unwrap_or_default();
    let last = matched
        .iter()
        .map(|(r, _, _)| r.date)
        .max()
        .unwrap_or_default();
    let n = (last - first).num_days() as usize + 1;

    let mut cleaned = vec![0.0; n];
    let mut raw = vec![0i64; n];
    let mut deaths = vec![0i64; n];
    let mut clamped = Vec::new();
    for (r, member, fill) in &matched {
        if fill.is_some_and(|d| r.date < d) {
            continue;
        }
        let i = (r.date - first).num_days() as usize;
        raw[i] += r.new_cases;
        deaths[i] += r.deaths;
        if r.new_cases < 0 {
            clamped.push((r.date, member.clone()));
        } else {
            cleaned[i] += r.new_cases as f64;
        }
    }
    clamped.sort();
    Ok(CaseSeries {
        region: spec.name.clone(),
        cases: DailySeries::new(first, cleaned),
        raw,
        deaths,
        clamped,
    })
}

/// Extend a series with zeros so it covers `first..=last`.
pub fn pad_to(series: &CaseSeries, first: NaiveDate, last: NaiveDate) -> CaseSeries {
    let start = first.min(series.cases.start);
    let end = last.max(series.cases.span().end - Duration::days(1));
    let n = (end - start).num_days() as usize + 1;
    let off = (series.cases.start - start).num_days() as usize;
    let mut cases = vec![0.0; n];
    let mut raw = vec![0; n];
    let mut deaths = vec![0; n];
    cases[off..off + series.len()].copy_from_slice(&series.cases.values);
    raw[off..off + series.len()].copy_from_slice(&series.raw);
    deaths[off..off + series.len()].copy_from_slice(&series.deaths);
    CaseSeries {
        region: series.region.clone(),
        cases: DailySeries::new(start, cases),
        raw,
        deaths,
        clamped: series.clamped.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn rec(date: &str, region: &str, n: i64) -> CaseRecord {
        CaseRecord {
            date: d(date),
            region: region.into(),
            new_cases: n,
            deaths: 0,
        }
    }

    fn gr() -> RegionSpec {
        RegionSpec::new(
            "GR",
            [
                "Luxembourg",
                "Wallonia, Belgium",
                "Saarland, Germany",
                "Lorraine, France",
            ]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lorraine_zero_fill() {
        let records = vec![
            rec("2020-03-10", "Lorraine, France", 12),
            rec("2020-03-10", "Luxembourg", 3),
            rec("2020-03-18", "Lorraine, France", 40),
        ];
        let fill = BTreeMap::from([("Lorraine, France".to_string(), d("2020-03-18"))]);
        let s = aggregate_region_cases(&records, &gr(), &fill).unwrap();
        assert_eq!(s.cases.get(d("2020-03-10")), Some(3.0));
        assert_eq!(s.cases.get(d("2020-03-18")), Some(40.0));
        // gap days are zero
        assert_eq!(s.cases.get(d("2020-03-12")), Some(0.0));
    }

    #[test]
    fn additivity_and_clamp() {
        let records = vec![
            rec("2020-04-01", "Luxembourg", 5),
            rec("2020-04-01", "Saarland, Germany", 5),
            rec("2020-04-02", "Luxembourg", -7),
            rec("2020-04-02", "Saarland, Germany", 0),
            rec("2020-04-02", "Berlin, Germany", 99),
        ];
        let s = aggregate_region_cases(&records, &gr(), &BTreeMap::new()).unwrap();
        assert_eq!(s.cases.values, vec![10.0, 0.0]);
        assert_eq!(s.raw, vec![10, -7]);
        assert_eq!(s.clamped, vec![(d("2020-04-02"), "Luxembourg".to_string())]);
    }

    #[test]
    fn no_matching_records_names_spec() {
        let err = aggregate_region_cases(
            &[rec("2020-04-01", "Berlin, Germany", 1)],
            &gr(),
            &BTreeMap::new(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("GR"));
    }

    #[test]
    fn spec_name_records_match() {
        let spec = RegionSpec::new("Germany", vec!["Germany".parse().unwrap()]).unwrap();
        let s = aggregate_region_cases(&[rec("2020-04-01", "Germany", 4)], &spec, &BTreeMap::new())
            .unwrap();
        assert_eq!(s.cases.values, vec![4.0]);
    }

    proptest! {
        // pointwise sum over members after zero-fill and clamping, checked
        // against a direct per-member tally
        #[test]
        fn aggregate_matches_member_sum(
            values in proptest::collection::vec(proptest::collection::vec(-20i64..200, 30), 1..=5),
            fill_day in proptest::option::of(0usize..30),
        ) {
            let names = ["Luxembourg", "Wallonia, Belgium", "Saarland, Germany", "Rhineland-Palatinate, Germany", "Lorraine, France"];
            let members: Vec<LocationPath> = names[..values.len()].iter().map(|s| s.parse().unwrap()).collect();
            let spec = RegionSpec::new("GR", members).unwrap();
            let start = d("2020-03-01");
            let mut records = Vec::new();
            for (m, vals) in values.iter().enumerate() {
                for (t, v) in vals.iter().enumerate() {
                    records.push(rec(&(start + Duration::days(t as i64)).to_string(), names[m], *v));
                }
            }
            let mut fill = BTreeMap::new();
            if let Some(fd) = fill_day {
                fill.insert(names[values.len() - 1].to_string(), start + Duration::days(fd as i64));
            }
            let s = aggregate_region_cases(&records, &spec, &fill).unwrap();
            for t in 0..30 {
                let mut want = 0.0;
                for (m, vals) in values.iter().enumerate() {
                    let filled = m == values.len() - 1 && fill_day.is_some_and(|fd| t < fd);
                    if !filled {
                        want += vals[t].max(0) as f64;
                    }
                }
                prop_assert_eq!(s.cases.values[t], want);
            }
        }
    }
}
