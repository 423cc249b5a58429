use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Config;
use crate::error::{Error, Result};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Everything that determines the artifact bytes. No wall-clock time is
/// recorded; `SOURCE_DATE_EPOCH` is copied when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub regions: Vec<String>,
    pub strict: bool,
    pub inputs: BTreeMap<String, String>,
    pub source_date_epoch: Option<String>,
    pub config: Config,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(config: &Config, seed: u64, regions: &[String], strict: bool) -> Result<Self> {
        let mut inputs = BTreeMap::new();
        let mut add = |key: String, path: &Path| -> Result<()> {
            inputs.insert(key, sha256_file(path)?);
            Ok(())
        };
        let i = &config.inputs;
        add("tweets".into(), &i.tweets)?;
        add("cases".into(), &i.cases)?;
        add("gazetteer".into(), &i.gazetteer)?;
        add("regions".into(), &i.regions)?;
        if let Some(p) = &i.labeled_topics {
            add("labeled_topics".into(), p)?;
        }
        if let Some(p) = &i.embeddings {
            add("embeddings".into(), p)?;
        }
        if let Some(p) = &config.textprep.spell_dictionary {
            add("spell_dictionary".into(), p)?;
        }
        if let Some(p) = &config.textprep.pos_lexicon {
            add("pos_lexicon".into(), p)?;
        }
        for (lang, p) in &config.textprep.extra_stopwords {
            add(format!("stopwords_{lang}"), p)?;
        }
        Ok(RunManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            regions: regions.to_vec(),
            strict,
            inputs,
            source_date_epoch: std::env::var("SOURCE_DATE_EPOCH").ok(),
            config: config.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        std::fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert!(matches!(
            sha256_file(&dir.path().join("nope")),
            Err(Error::MissingFile(_))
        ));
    }
}
