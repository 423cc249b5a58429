//! Supervised classification of extracted topics into seven categories:
//! TF-IDF + country features, SMOTE balancing, grid-searched one-vs-rest SVM.

mod features;
mod io;
mod metrics;
mod smote;
pub mod svm;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use features::{build_features, CountryEncoding, FeatureSpace};
pub use io::{read_labeled_topics, read_model, write_model, write_predictions, ModelDump};
pub use metrics::{evaluate, evaluate_labels, ClassMetrics, Evaluation};
pub use smote::{smote, SmoteOutput, Synthetic, DEFAULT_K_NEIGHBORS};
pub use svm::Kernel;
pub use train::{
    default_grid, stratified_folds, stratified_split, train_svm, BinaryMachine, CvScore, GridCell,
    SvmModel, TrainConfig, TrainManifest, TrainOutcome,
};

pub const CATEGORIES: std::ops::RangeInclusive<u8> = 1..=7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Country {
    Belgium,
    France,
    #[serde(rename = "GR")]
    Gr,
    Germany,
    Luxembourg,
}

impl Country {
    /// Alphabetical by name, which is also the integer-code order.
    pub const ALL: [Country; 5] = [
        Country::Belgium,
        Country::France,
        Country::Gr,
        Country::Germany,
        Country::Luxembourg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Country::Belgium => "Belgium",
            Country::France => "France",
            Country::Gr => "GR",
            Country::Germany => "Germany",
            Country::Luxembourg => "Luxembourg",
        }
    }

    pub fn code(self) -> usize {
        Country::ALL
            .iter()
            .position(|c| *c == self)
            .expect("listed")
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Country {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Country::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Invalid(format!("unknown country '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledTopic {
    pub top_words: Vec<String>,
    pub country: Country,
    pub category: u8,
}

impl LabeledTopic {
    pub fn new(top_words: Vec<String>, country: Country, category: u8) -> Result<Self> {
        if !CATEGORIES.contains(&category) {
            return Err(Error::Invalid(format!("category {category} outside 1..7")));
        }
        if top_words.is_empty() {
            return Err(Error::Invalid("topic has no words".into()));
        }
        Ok(LabeledTopic {
            top_words,
            country,
            category,
        })
    }
}
