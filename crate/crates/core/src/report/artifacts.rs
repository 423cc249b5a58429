//! Artifact writers and the readers staged runs use to pick up upstream
//! results. CSV floats use `numfmt::fmt_f64`; JSON floats are rounded the
//! same way before pretty-printing. All files end with a single LF.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::cr::{CategoryRateSeries, ClassifiedTopic};
use super::pipeline::{
    DayEntry, DayStatus, IngestOutput, MapTrajectory, PeriodCorrelation, RegionPeriods, RegionRt,
};
use crate::classify::{CvScore, Evaluation, Kernel};
use crate::corr::classify_strength;
use crate::error::{Error, Result};
use crate::numfmt::{fmt_f64, json_f64};
use crate::series::DailySeries;
use crate::topics::DayTopics;

/// Filesystem-safe form of a region or period name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map(json_f64).unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&round_floats(serde_json::to_value(value)?))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(csv::Reader::from_path(path)?)
}

fn bad(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedLine {
        path: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

// ---- ingest ----

pub fn write_summary(dir: &Path, ingest: &IngestOutput) -> Result<()> {
    let mut w = csv_writer(&dir.join("summary.csv"))?;
    w.write_record(["region", "tweets", "users", "cases"])?;
    for s in &ingest.summary {
        let cases = ingest
            .region(&s.region)
            .map(|r| r.cases.cases.total())
            .unwrap_or(0.0);
        w.write_record([
            s.region.clone(),
            s.tweets.to_string(),
            s.users.to_string(),
            fmt_f64(cases),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_daily(dir: &Path, ingest: &IngestOutput) -> Result<()> {
    for r in &ingest.regions {
        let mut w = csv_writer(&dir.join(format!("daily_{}.csv", slug(&r.name))))?;
        w.write_record(["date", "raw_cases", "cases", "smoothed", "tweets"])?;
        for (i, (d, c)) in r.cases.cases.iter().enumerate() {
            w.write_record([
                d.to_string(),
                r.cases.raw[i].to_string(),
                fmt_f64(c),
                r.smoothed.get(d).map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.volume.get(d).unwrap_or(0.0)),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct IngestReport<'a> {
    skipped_lines: usize,
    duplicates: usize,
    out_of_window: usize,
    geocoded: usize,
    unresolved: usize,
    clamped: Vec<ClampEntry<'a>>,
}

#[derive(Serialize)]
struct ClampEntry<'a> {
    region: &'a str,
    date: NaiveDate,
    member: &'a str,
}

pub fn write_ingest_report(dir: &Path, ingest: &IngestOutput) -> Result<()> {
    let clamped = ingest
        .regions
        .iter()
        .flat_map(|r| {
            r.cases.clamped.iter().map(move |(d, m)| ClampEntry {
                region: &r.name,
                date: *d,
                member: m,
            })
        })
        .collect();
    write_json(
        &dir.join("ingest_report.json"),
        &IngestReport {
            skipped_lines: ingest.skipped_lines,
            duplicates: ingest.resolve.duplicates,
            out_of_window: ingest.resolve.out_of_window,
            geocoded: ingest.resolve.geocoded,
            unresolved: ingest.resolve.unresolved,
            clamped,
        },
    )
}

// ---- rt ----

#[derive(Debug, Serialize, Deserialize)]
struct RtStatus {
    region: String,
    days: usize,
    error: Option<String>,
}

pub fn write_rt(dir: &Path, rts: &[RegionRt]) -> Result<()> {
    let mut status = Vec::new();
    for r in rts {
        match &r.result {
            Ok(post) => {
                let mut w = csv_writer(&dir.join(format!("rt_{}.csv", slug(&r.region))))?;
                w.write_record(["date", "map", "ci_low", "ci_high", "floored"])?;
                for i in 0..post.len() {
                    let (lo, hi) = post.credible_interval[i];
                    w.write_record([
                        post.date(i).to_string(),
                        fmt_f64(post.map_estimate[i]),
                        fmt_f64(lo),
                        fmt_f64(hi),
                        post.floored[i].to_string(),
                    ])?;
                }
                w.flush()?;
                status.push(RtStatus {
                    region: r.region.clone(),
                    days: post.len(),
                    error: None,
                });
            }
            Err(e) => status.push(RtStatus {
                region: r.region.clone(),
                days: 0,
                error: Some(e.clone()),
            }),
        }
    }
    write_json(&dir.join("rt_status.json"), &status)
}

/// MAP trajectories for `regions`, as written by the rt stage.
pub fn read_rt(dir: &Path, regions: &[String]) -> Result<Vec<MapTrajectory>> {
    let status: Vec<RtStatus> = read_json(&dir.join("rt_status.json"))?;
    regions
        .iter()
        .map(|region| {
            let st = status.iter().find(|s| &s.region == region).ok_or_else(|| {
                Error::Invalid(format!("rt_status.json has no entry for region '{region}'"))
            })?;
            if st.error.is_some() {
                return Ok(MapTrajectory {
                    region: region.clone(),
                    series: None,
                });
            }
            let path = dir.join(format!("rt_{}.csv", slug(region)));
            let mut rdr = csv_reader(&path)?;
            let mut start = None;
            let mut values = Vec::new();
            for (i, rec) in rdr.records().enumerate() {
                let rec = rec?;
                let line = i + 2;
                let d: NaiveDate = rec
                    .get(0)
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| bad(&path, line, "bad date"))?;
                let v: f64 = rec
                    .get(1)
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| bad(&path, line, "bad map value"))?;
                let expected =
                    start.map(|s: NaiveDate| s + chrono::Duration::days(values.len() as i64));
                if expected.is_some_and(|e| e != d) {
                    return Err(bad(&path, line, "dates are not consecutive"));
                }
                start.get_or_insert(d);
                values.push(v);
            }
            let start = start.ok_or_else(|| bad(&path, 1, "no rows"))?;
            Ok(MapTrajectory {
                region: region.clone(),
                series: Some(DailySeries::new(start, values)),
            })
        })
        .collect()
}

// ---- periods ----

pub fn write_periods(dir: &Path, periods: &[RegionPeriods]) -> Result<()> {
    write_json(&dir.join("periods.json"), periods)
}

pub fn read_periods(dir: &Path, regions: &[String]) -> Result<Vec<RegionPeriods>> {
    let all: Vec<RegionPeriods> = read_json(&dir.join("periods.json"))?;
    regions
        .iter()
        .map(|r| {
            all.iter().find(|p| &p.region == r).cloned().ok_or_else(|| {
                Error::Invalid(format!("periods.json has no entry for region '{r}'"))
            })
        })
        .collect()
}

// ---- correlate ----

pub fn write_correlations(dir: &Path, corr: &[PeriodCorrelation]) -> Result<()> {
    let mut w = csv_writer(&dir.join("lag_correlations.csv"))?;
    w.write_record(["region", "period", "lag", "r", "p", "n", "strength"])?;
    for c in corr {
        for e in &c.scan.entries {
            w.write_record([
                c.region.clone(),
                c.period.name().to_string(),
                e.lag.to_string(),
                fmt_f64(e.r),
                fmt_f64(e.p),
                e.n.to_string(),
                classify_strength(e.r, e.p).name().to_string(),
            ])?;
        }
    }
    w.flush()?;

    let entries: Vec<Value> = corr
        .iter()
        .map(|c| {
            let best = c.scan.best();
            let mut o = serde_json::json!({
                "region": c.region,
                "period": c.period.name(),
                "start": c.interval.start,
                "end": c.interval.end,
                "best_lead": c.scan.best_lead,
                "r": best.map(|b| b.r),
                "p": best.map(|b| b.p),
                "n": best.map(|b| b.n),
                "strength": best.map(|b| classify_strength(b.r, b.p).name()),
                "skipped_lags": c.scan.skipped,
            });
            match &c.trend {
                Ok(t) => o["trend"] = serde_json::to_value(t).unwrap_or(Value::Null),
                Err(e) => o["trend_error"] = Value::String(e.clone()),
            }
            o
        })
        .collect();
    write_json(
        &dir.join("best_leads.json"),
        &serde_json::json!({
            "note": "p-values are per lag; no multiple-comparison correction is applied across the scanned lags",
            "entries": entries,
        }),
    )
}

// ---- topics ----

fn day_file(region: &str, day: NaiveDate) -> PathBuf {
    PathBuf::from("topics").join(format!("{}_{day}.json", slug(region)))
}

pub fn write_topics(dir: &Path, days: &[DayEntry]) -> Result<()> {
    fs::create_dir_all(dir.join("topics"))?;
    for e in days {
        if let Some(t) = &e.topics {
            write_json(&dir.join(day_file(&e.region, e.day)), t)?;
        }
    }
    write_json(&dir.join("topics_index.json"), days)
}

pub fn read_topics(dir: &Path, regions: &[String]) -> Result<Vec<DayEntry>> {
    let index: Vec<DayEntry> = read_json(&dir.join("topics_index.json"))?;
    index
        .into_iter()
        .filter(|e| regions.contains(&e.region))
        .map(|mut e| {
            if e.status == DayStatus::Modeled {
                let t: DayTopics = read_json(&dir.join(day_file(&e.region, e.day)))?;
                e.topics = Some(t);
            }
            Ok(e)
        })
        .collect()
}

// ---- classify ----

pub fn write_metrics(dir: &Path, eval: &Evaluation) -> Result<()> {
    let mut w = csv_writer(&dir.join("classifier_metrics.csv"))?;
    w.write_record(["label", "precision", "recall", "f1", "support"])?;
    for m in &eval.per_class {
        w.write_record([
            m.class.to_string(),
            fmt_f64(m.precision),
            fmt_f64(m.recall),
            fmt_f64(m.f1),
            m.support.to_string(),
        ])?;
    }
    w.write_record([
        "macro_avg".to_string(),
        fmt_f64(eval.macro_precision),
        fmt_f64(eval.macro_recall),
        fmt_f64(eval.macro_f1),
        eval.total.to_string(),
    ])?;
    w.write_record([
        "accuracy".to_string(),
        String::new(),
        String::new(),
        fmt_f64(eval.accuracy),
        eval.total.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_cv_scores(dir: &Path, cv: &[CvScore], chosen: usize) -> Result<()> {
    let mut w = csv_writer(&dir.join("cv_scores.csv"))?;
    w.write_record(["c", "kernel", "gamma", "mean_f1", "chosen"])?;
    for (i, s) in cv.iter().enumerate() {
        let (kernel, gamma) = match s.cell.kernel {
            Kernel::Linear => ("linear", String::new()),
            Kernel::Rbf { gamma } => ("rbf", fmt_f64(gamma)),
        };
        w.write_record([
            fmt_f64(s.cell.c),
            kernel.to_string(),
            gamma,
            fmt_f64(s.mean_f1),
            (i == chosen).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_predictions(dir: &Path, topics: &[ClassifiedTopic]) -> Result<()> {
    let mut w = csv_writer(&dir.join("predictions.csv"))?;
    w.write_record(["topic_id", "region", "date", "category", "tweets"])?;
    for t in topics {
        w.write_record([
            t.topic_id.clone(),
            t.region.clone(),
            t.day.to_string(),
            t.category.to_string(),
            t.tweets.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_predictions(dir: &Path) -> Result<Vec<ClassifiedTopic>> {
    let path = dir.join("predictions.csv");
    let mut rdr = csv_reader(&path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).unwrap_or("");
        out.push(ClassifiedTopic {
            topic_id: field(0).to_string(),
            region: field(1).to_string(),
            day: field(2).parse().map_err(|_| bad(&path, line, "bad date"))?,
            category: field(3)
                .parse()
                .map_err(|_| bad(&path, line, "bad category"))?,
            tweets: field(4)
                .parse()
                .map_err(|_| bad(&path, line, "bad tweet count"))?,
        });
    }
    Ok(out)
}

// ---- report ----

/// Long format: one row per (region, category) with at least one topic.
pub fn write_topic_counts(
    dir: &Path,
    regions: &[String],
    topics: &[ClassifiedTopic],
) -> Result<()> {
    let mut w = csv_writer(&dir.join("topic_counts.csv"))?;
    w.write_record(["region", "category", "topics", "tweets"])?;
    for r in regions {
        for c in crate::classify::CATEGORIES {
            let (n, tweets) = topics
                .iter()
                .filter(|t| &t.region == r && t.category == c)
                .fold((0usize, 0usize), |(n, s), t| (n + 1, s + t.tweets));
            if n > 0 {
                w.write_record([r.clone(), c.to_string(), n.to_string(), tweets.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_cr_heatmap(dir: &Path, series: &[CategoryRateSeries]) -> Result<()> {
    let mut w = csv_writer(&dir.join("cr_heatmap.csv"))?;
    let mut header = vec!["region".to_string(), "date".to_string()];
    header.extend(crate::classify::CATEGORIES.map(|c| format!("cr_{c}")));
    w.write_record(&header)?;
    for s in series {
        for row in &s.rows {
            let mut rec = vec![s.region.clone(), row.day.to_string()];
            match row.shares {
                Some(sh) => rec.extend(sh.iter().map(|v| fmt_f64(*v))),
                None => rec.extend(std::iter::repeat_n(String::new(), 7)),
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_wordfreq(
    dir: &Path,
    region: &str,
    window: &str,
    ranked: &[(String, usize)],
) -> Result<()> {
    let mut w = csv_writer(&dir.join(format!("wordfreq_{}_{}.csv", slug(region), slug(window))))?;
    w.write_record(["rank", "word", "count"])?;
    for (i, (word, n)) in ranked.iter().enumerate() {
        w.write_record([(i + 1).to_string(), word.clone(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_floats_are_rounded_with_trailing_newline() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        write_json(
            &p,
            &serde_json::json!({"b": 1.0 / 3.0, "a": [2, 0.1 + 0.2]}),
        )
        .unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.ends_with("}\n"));
        assert!(text.contains("0.333333333"));
        assert!(text.contains("0.3\n"));
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }

    #[test]
    fn predictions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = NaiveDate::from_ymd_opt(2020, 4, 2).unwrap();
        let topics = vec![ClassifiedTopic {
            topic_id: "GR:2020-04-02:0".into(),
            region: "GR".into(),
            day: d,
            category: 4,
            tweets: 12,
        }];
        write_predictions(dir.path(), &topics).unwrap();
        assert_eq!(read_predictions(dir.path()).unwrap(), topics);
    }

    #[test]
    fn empty_topic_counts_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        write_topic_counts(dir.path(), &["GR".to_string()], &[]).unwrap();
        assert_eq!(
            fs::read_to_string(dir.path().join("topic_counts.csv")).unwrap(),
            "region,category,topics,tweets\n"
        );
    }
}
