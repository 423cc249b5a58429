use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureSpace, LabeledTopic, SvmModel};
use crate::error::{Error, Result};

/// Labeled topics CSV with header `top_words,country,category`; words are
/// space-separated.
pub fn read_labeled_topics(path: &Path) -> Result<Vec<LabeledTopic>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Invalid(format!("{}: missing column '{name}'", path.display())))
    };
    let (cw, cc, ck) = (col("top_words")?, col("country")?, col("category")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |reason: String| Error::MalformedLine {
            path: path.display().to_string(),
            line,
            reason,
        };
        let words: Vec<String> = rec
            .get(cw)
            .unwrap_or("")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let country = rec
            .get(cc)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| bad(e.to_string()))?;
        let category: u8 = rec.get(ck).unwrap_or("").trim().parse().map_err(|_| {
            bad(format!(
                "category '{}' is not an integer",
                rec.get(ck).unwrap_or("")
            ))
        })?;
        out.push(LabeledTopic::new(words, country, category).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

pub fn write_predictions(path: &Path, rows: &[(String, u8)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "topic_id,category")?;
    for (id, c) in rows {
        writeln!(w, "{id},{c}")?;
    }
    w.flush()?;
    Ok(())
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Everything needed to classify unseen topics. Floats keep full precision so
/// a reloaded model predicts exactly like the in-memory one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub format_version: u32,
    pub features: FeatureSpace,
    pub model: SvmModel,
}

impl ModelDump {
    pub fn new(features: FeatureSpace, model: SvmModel) -> Self {
        ModelDump {
            format_version: MODEL_FORMAT_VERSION,
            features,
            model,
        }
    }

    pub fn predict(&self, topic: &LabeledTopic) -> u8 {
        self.model.predict(&self.features.transform_topic(topic))
    }
}

pub fn write_model(path: &Path, dump: &ModelDump) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, dump)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<ModelDump> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let dump: ModelDump = serde_json::from_reader(File::open(path)?)?;
    if dump.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Invalid(format!(
            "unsupported model format version {}",
            dump.format_version
        )));
    }
    Ok(dump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{build_features, Country, CountryEncoding, Kernel};

    #[test]
    fn labeled_csv_and_model_reload() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labeled.csv");
        std::fs::write(
            &p,
            "top_words,country,category\nmask school mask,GR,1\nborder closed,France,2\nvaccine dose,Luxembourg,2\nschool reopen,Germany,1\n",
        )
        .unwrap();
        let topics = read_labeled_topics(&p).unwrap();
        assert_eq!(topics[0].top_words, vec!["mask", "school", "mask"]);
        assert_eq!(topics[2].country, Country::Luxembourg);

        let (x, space) = build_features(&topics, CountryEncoding::OneHot).unwrap();
        let y: Vec<u8> = topics.iter().map(|t| t.category).collect();
        let model = SvmModel::fit(&x, &y, Kernel::Rbf { gamma: 0.1 }, 1.0, 1e-3).unwrap();
        let dump = ModelDump::new(space, model);
        let mp = dir.path().join("model.json");
        write_model(&mp, &dump).unwrap();
        let back = read_model(&mp).unwrap();
        assert_eq!(back, dump);
        for t in &topics {
            assert_eq!(back.predict(t), dump.predict(t));
        }
    }

    #[test]
    fn malformed_rows_report_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "top_words,country,category\nmask,GR,1\nmask,GR,9\n").unwrap();
        match read_labeled_topics(&p).unwrap_err() {
            Error::MalformedLine { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        assert!(matches!(
            read_labeled_topics(&dir.path().join("nope.csv")),
            Err(Error::MissingFile(_))
        ));
    }
}
