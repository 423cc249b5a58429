use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::gazetteer::Gazetteer;
use super::location::LocationPath;
use crate::error::{Error, Result};
use crate::series::DateInterval;

/// One post, as in the collected dataset: id, text, author, the user's
/// free-text location and its resolved canonical path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub full_text: String,
    pub user_id: String,
    pub user_geo_original: Option<String>,
    pub user_geo: Option<LocationPath>,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TweetFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for TweetFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(TweetFormat::Jsonl),
            "csv" => Ok(TweetFormat::Csv),
            other => Err(Error::Config(format!("unknown tweet format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadedTweets {
    pub records: Vec<TweetRecord>,
    pub skipped: usize,
}

#[derive(Deserialize)]
struct RawTweet {
    tweet_id: Option<serde_json::Value>,
    full_text: Option<String>,
    user_id: Option<serde_json::Value>,
    user_geo_original: Option<String>,
    user_geo: Option<String>,
    date: Option<String>,
}

fn id_string(v: Option<serde_json::Value>) -> Option<String> {
    match v? {
        serde_json::Value::String(s) => Some(s),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Accepts `YYYY-MM-DD` or any ISO-8601 timestamp starting with a date.
fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    let head = s.get(..10)?;
    if s.len() > 10 && !matches!(s.as_bytes()[10], b'T' | b' ') {
        return None;
    }
    head.parse().ok()
}

impl RawTweet {
    fn into_record(self) -> std::result::Result<TweetRecord, String> {
        let tweet_id = id_string(self.tweet_id)
            .filter(|s| !s.trim().is_empty())
            .ok_or("missing or empty tweet_id")?;
        let user_id = id_string(self.user_id).ok_or("missing user_id")?;
        let full_text = self.full_text.ok_or("missing full_text")?;
        let date = self
            .date
            .as_deref()
            .and_then(parse_date)
            .ok_or("missing or invalid date")?;
        let user_geo = match self.user_geo.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(g) => Some(g.parse().map_err(|_| "invalid user_geo")?),
        };
        Ok(TweetRecord {
            tweet_id,
            full_text,
            user_id,
            user_geo_original: self.user_geo_original.filter(|s| !s.trim().is_empty()),
            user_geo,
            date,
        })
    }
}

/// Read tweets in file order. Malformed lines are skipped and counted, or,
/// with `strict`, abort the load with their line number.
pub fn load_tweets(path: &Path, format: TweetFormat, strict: bool) -> Result<LoadedTweets> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut out = LoadedTweets::default();
    let reject = |line: usize, reason: String, out: &mut LoadedTweets| -> Result<()> {
        if strict {
            return Err(Error::MalformedLine {
                path: path.display().to_string(),
                line,
                reason,
            });
        }
        out.skipped += 1;
        Ok(())
    };
    match format {
        TweetFormat::Jsonl => {
            let reader = std::io::BufReader::new(std::fs::File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<RawTweet>(&line)
                    .map_err(|e| e.to_string())
                    .and_then(RawTweet::into_record)
                {
                    Ok(r) => out.records.push(r),
                    Err(reason) => reject(i + 1, reason, &mut out)?,
                }
            }
        }
        TweetFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
            let headers = rdr.headers()?.clone();
            for (i, row) in rdr.records().enumerate() {
                // header is line 1
                let line = i + 2;
                let parsed = row
                    .map_err(|e| e.to_string())
                    .and_then(|r| {
                        if r.len() != headers.len() {
                            return Err(format!(
                                "expected {} fields, got {}",
                                headers.len(),
                                r.len()
                            ));
                        }
                        r.deserialize::<RawCsvTweet>(Some(&headers))
                            .map_err(|e| e.to_string())
                    })
                    .and_then(|raw| raw.into_raw().into_record());
                match parsed {
                    Ok(r) => out.records.push(r),
                    Err(reason) => reject(line, reason, &mut out)?,
                }
            }
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct RawCsvTweet {
    tweet_id: Option<String>,
    full_text: Option<String>,
    user_id: Option<String>,
    user_geo_original: Option<String>,
    user_geo: Option<String>,
    date: Option<String>,
}

impl RawCsvTweet {
    fn into_raw(self) -> RawTweet {
        RawTweet {
            tweet_id: self.tweet_id.map(serde_json::Value::String),
            full_text: self.full_text,
            user_id: self.user_id.map(serde_json::Value::String),
            user_geo_original: self.user_geo_original,
            user_geo: self.user_geo,
            date: self.date,
        }
    }
}

/// Counters from [`resolve_tweets`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ResolveStats {
    pub duplicates: usize,
    pub out_of_window: usize,
    pub geocoded: usize,
    pub unresolved: usize,
}

/// Enforce the dataset invariants: unique ids (first occurrence kept), dates
/// inside the study window, and `user_geo` either a gazetteer canonical path
/// or re-derived from the free-text location (first gazetteer match).
pub fn resolve_tweets(
    records: Vec<TweetRecord>,
    gazetteer: &Gazetteer,
    window: &DateInterval,
) -> (Vec<TweetRecord>, ResolveStats) {
    let mut stats = ResolveStats::default();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for mut r in records {
        if !window.contains(r.date) {
            stats.out_of_window += 1;
            continue;
        }
        if !seen.insert(r.tweet_id.clone()) {
            stats.duplicates += 1;
            continue;
        }
        let keep = r
            .user_geo
            .as_ref()
            .is_some_and(|g| gazetteer.is_canonical(g));
        if !keep {
            let source = r
                .user_geo
                .as_ref()
                .map(|g| g.to_string())
                .or_else(|| r.user_geo_original.clone());
            r.user_geo = source.as_deref().and_then(|s| gazetteer.normalize(s));
            if r.user_geo.is_some() {
                stats.geocoded += 1;
            } else {
                stats.unresolved += 1;
            }
        }
        out.push(r);
    }
    (out, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const TABLE1: &str = r#"{"tweet_id":"1231966839512345678","full_text":"RT @someone: The Diamond princess is a UK ship managed by the US. UK should Be Responsible. #DiamondPrincess #coronavirus","user_id":"u918107490212345","user_geo_original":"Moselle","user_geo":"Moselle, Lorraine, France","date":"2020-02-24"}"#;

    fn write(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn table_one_line() {
        let f = write(TABLE1, ".jsonl");
        let got = load_tweets(f.path(), TweetFormat::Jsonl, true).unwrap();
        assert_eq!(got.skipped, 0);
        assert_eq!(got.records.len(), 1);
        let r = &got.records[0];
        assert_eq!(r.user_geo_original.as_deref(), Some("Moselle"));
        assert_eq!(
            r.user_geo.as_ref().unwrap().to_string(),
            "Moselle, Lorraine, France"
        );
        assert_eq!(r.date, NaiveDate::from_ymd_opt(2020, 2, 24).unwrap());
    }

    #[test]
    fn empty_file() {
        let f = write("", ".jsonl");
        let got = load_tweets(f.path(), TweetFormat::Jsonl, true).unwrap();
        assert!(got.records.is_empty());
        assert_eq!(got.skipped, 0);
    }

    #[test]
    fn truncated_middle_line() {
        let body = format!(
            "{TABLE1}\n{}\n{}\n",
            &TABLE1[..40],
            TABLE1.replace("1231966839512345678", "2")
        );
        let f = write(&body, ".jsonl");
        let got = load_tweets(f.path(), TweetFormat::Jsonl, false).unwrap();
        assert_eq!(got.records.len(), 2);
        assert_eq!(got.skipped, 1);
        assert_eq!(got.records[1].tweet_id, "2");

        match load_tweets(f.path(), TweetFormat::Jsonl, true) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed line error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_tweets(Path::new("/nonexistent/x.jsonl"), TweetFormat::Jsonl, false),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn csv_format() {
        let body = "tweet_id,full_text,user_id,user_geo_original,user_geo,date\n\
                    10,\"hello, world\",u1,Metz,,2020-03-01T10:00:00Z\n\
                    11,broken,u2\n\
                    12,ok,u3,,,2020-03-02\n";
        let f = write(body, ".csv");
        let got = load_tweets(f.path(), TweetFormat::Csv, false).unwrap();
        assert_eq!(got.records.len(), 2);
        assert_eq!(got.skipped, 1);
        assert_eq!(got.records[0].full_text, "hello, world");
        assert!(got.records[0].user_geo.is_none());
        assert!(matches!(
            load_tweets(f.path(), TweetFormat::Csv, true),
            Err(Error::MalformedLine { line: 3, .. })
        ));
    }
}
