//! TOML run configuration. Relative paths resolve against the config file's
//! directory. Every numeric default of the analysis modules can be overridden
//! here and is snapshotted into the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::classify::{CountryEncoding, GridCell, Kernel, TrainConfig};
use crate::epi::{PeakRule, PeriodConfig, RtConfig, RtGrid};
use crate::error::{Error, Result};
use crate::series::DateInterval;
use crate::textprep::StemmerKind;
use crate::topics::{AutoencoderConfig, KMeansConfig, LdaConfig, TuneConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub inputs: Inputs,
    pub window: Window,
    /// Regions to analyse, in report order; defaults to every region spec.
    #[serde(default)]
    pub regions: Vec<String>,
    /// Member location → first date its case counts are trusted.
    #[serde(default)]
    pub zero_fill_before: BTreeMap<String, NaiveDate>,
    #[serde(default)]
    pub smoothing: Smoothing,
    #[serde(default)]
    pub rt: RtSection,
    #[serde(default)]
    pub periods: PeriodsSection,
    #[serde(default)]
    pub correlation: CorrelationSection,
    #[serde(default)]
    pub textprep: TextprepSection,
    #[serde(default)]
    pub topics: TopicsSection,
    #[serde(default)]
    pub classify: ClassifySection,
    #[serde(default)]
    pub report: ReportSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub tweets: PathBuf,
    #[serde(default = "default_tweet_format")]
    pub tweet_format: String,
    pub cases: PathBuf,
    pub gazetteer: PathBuf,
    pub regions: PathBuf,
    pub labeled_topics: Option<PathBuf>,
    /// Precomputed embeddings; the hashed n-gram embedder is used otherwise.
    pub embeddings: Option<PathBuf>,
}

fn default_tweet_format() -> String {
    "jsonl".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: NaiveDate,
    /// Inclusive.
    pub end: NaiveDate,
}

impl Window {
    pub fn interval(&self) -> DateInterval {
        DateInterval::inclusive(self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Smoothing {
    pub window: usize,
    pub sigma: f64,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing {
            window: 7,
            sigma: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RtSection {
    pub r_min: f64,
    pub r_max: f64,
    pub step: f64,
    pub sigma_rw: f64,
    pub serial_interval: f64,
    pub ci_mass: f64,
}

impl Default for RtSection {
    fn default() -> Self {
        let d = RtConfig::default();
        RtSection {
            r_min: d.grid.r_min,
            r_max: d.grid.r_max,
            step: d.grid.step,
            sigma_rw: d.sigma_rw,
            serial_interval: d.serial_interval,
            ci_mass: d.ci_mass,
        }
    }
}

impl RtSection {
    pub fn to_config(&self) -> RtConfig {
        RtConfig {
            grid: RtGrid {
                r_min: self.r_min,
                r_max: self.r_max,
                step: self.step,
            },
            sigma_rw: self.sigma_rw,
            serial_interval: self.serial_interval,
            ci_mass: self.ci_mass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodsSection {
    pub r0_min: f64,
    pub r0_max: f64,
    pub pre_peak_days: i64,
    pub peak_rule: PeakRule,
}

impl Default for PeriodsSection {
    fn default() -> Self {
        let d = PeriodConfig::default();
        PeriodsSection {
            r0_min: d.r0_min,
            r0_max: d.r0_max,
            pre_peak_days: d.pre_peak_days,
            peak_rule: d.peak_rule,
        }
    }
}

impl PeriodsSection {
    pub fn to_config(&self) -> PeriodConfig {
        PeriodConfig {
            r0_min: self.r0_min,
            r0_max: self.r0_max,
            pre_peak_days: self.pre_peak_days,
            peak_rule: self.peak_rule,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelationSection {
    pub lag_min: i64,
    pub lag_max: i64,
}

impl Default for CorrelationSection {
    fn default() -> Self {
        CorrelationSection {
            lag_min: -10,
            lag_max: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextprepSection {
    pub stemmer: StemmerKind,
    pub spell_dictionary: Option<PathBuf>,
    pub pos_lexicon: Option<PathBuf>,
    /// Replaces the default query keywords when set.
    pub query_keywords: Option<Vec<String>>,
    /// Language → extra stopword file.
    pub extra_stopwords: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsSection {
    /// Days to model; defaults to the whole study window.
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    /// (region, day) corpora with fewer tweets are skipped.
    pub min_tweets: usize,
    pub k_grid: Vec<usize>,
    pub gamma_grid: Vec<f64>,
    pub lda_alpha: Option<f64>,
    pub lda_beta: f64,
    pub lda_iterations: usize,
    pub quantization: f64,
    pub latent_dim: usize,
    pub hidden_dim: Option<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub kmeans_max_iters: usize,
    pub kmeans_tol: f64,
    pub embedding_dim: usize,
    pub embedding_seed: u64,
}

impl Default for TopicsSection {
    fn default() -> Self {
        let t = TuneConfig::default();
        let lda = LdaConfig::new(1);
        let ae = AutoencoderConfig::default();
        let km = KMeansConfig::default();
        TopicsSection {
            start: None,
            end: None,
            min_tweets: 10,
            k_grid: t.k_grid,
            gamma_grid: t.gamma_grid,
            lda_alpha: None,
            lda_beta: lda.beta,
            lda_iterations: lda.iterations,
            quantization: lda.quantization,
            latent_dim: ae.latent_dim,
            hidden_dim: ae.hidden_dim,
            epochs: ae.epochs,
            learning_rate: ae.learning_rate,
            batch_size: ae.batch_size,
            kmeans_max_iters: km.max_iters,
            kmeans_tol: km.tol,
            embedding_dim: 64,
            embedding_seed: 0,
        }
    }
}

impl TopicsSection {
    pub fn to_config(&self) -> TuneConfig {
        let mut lda = LdaConfig::new(1);
        lda.alpha = self.lda_alpha;
        lda.beta = self.lda_beta;
        lda.iterations = self.lda_iterations;
        lda.quantization = self.quantization;
        TuneConfig {
            k_grid: self.k_grid.clone(),
            gamma_grid: self.gamma_grid.clone(),
            lda,
            autoencoder: AutoencoderConfig {
                latent_dim: self.latent_dim,
                hidden_dim: self.hidden_dim,
                epochs: self.epochs,
                learning_rate: self.learning_rate,
                batch_size: self.batch_size,
            },
            kmeans: KMeansConfig {
                max_iters: self.kmeans_max_iters,
                tol: self.kmeans_tol,
            },
        }
    }

    pub fn days(&self, window: &Window) -> DateInterval {
        let start = self.start.unwrap_or(window.start).max(window.start);
        let end = self.end.unwrap_or(window.end).min(window.end);
        DateInterval::inclusive(start, end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    pub encoding: CountryEncoding,
    pub folds: usize,
    pub test_fraction: f64,
    pub k_neighbors: usize,
    pub tolerance: f64,
    pub c_grid: Vec<f64>,
    pub rbf_gammas: Vec<f64>,
    pub linear: bool,
}

impl Default for ClassifySection {
    fn default() -> Self {
        let t = TrainConfig::default();
        ClassifySection {
            encoding: CountryEncoding::OneHot,
            folds: t.folds,
            test_fraction: t.test_fraction,
            k_neighbors: t.k_neighbors,
            tolerance: t.tolerance,
            c_grid: vec![0.1, 1.0, 10.0, 100.0],
            rbf_gammas: vec![0.01, 0.1, 1.0],
            linear: true,
        }
    }
}

impl ClassifySection {
    pub fn to_config(&self) -> TrainConfig {
        let mut kernels = Vec::new();
        if self.linear {
            kernels.push(Kernel::Linear);
        }
        kernels.extend(self.rbf_gammas.iter().map(|&gamma| Kernel::Rbf { gamma }));
        let mut grid: Vec<GridCell> = Vec::new();
        for &c in &self.c_grid {
            for &kernel in &kernels {
                let cell = GridCell { c, kernel };
                if !grid.contains(&cell) {
                    grid.push(cell);
                }
            }
        }
        TrainConfig {
            grid,
            folds: self.folds,
            test_fraction: self.test_fraction,
            k_neighbors: self.k_neighbors,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Words kept per word-frequency table.
    pub wordfreq_top: usize,
    /// Region drawn in volume_vs_cases.svg; defaults to the first region.
    pub plot_region: Option<String>,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            wordfreq_top: 100,
            plot_region: None,
        }
    }
}

/// Bare TOML dates (`start = 2020-03-01`) become strings so chrono can parse them.
fn dates_to_strings(v: toml::Value) -> toml::Value {
    match v {
        toml::Value::Datetime(d) => toml::Value::String(d.to_string()),
        toml::Value::Array(a) => toml::Value::Array(a.into_iter().map(dates_to_strings).collect()),
        toml::Value::Table(t) => toml::Value::Table(
            t.into_iter()
                .map(|(k, v)| (k, dates_to_strings(v)))
                .collect(),
        ),
        other => other,
    }
}

pub const SEED_ENV: &str = "EPISIGNAL_SEED";

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg: Config = dates_to_strings(toml::Value::Table(table))
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut cfg = Config::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.inputs.tweets);
        fix(&mut self.inputs.cases);
        fix(&mut self.inputs.gazetteer);
        fix(&mut self.inputs.regions);
        self.inputs.labeled_topics.iter_mut().for_each(fix);
        self.inputs.embeddings.iter_mut().for_each(fix);
        self.textprep.spell_dictionary.iter_mut().for_each(fix);
        self.textprep.pos_lexicon.iter_mut().for_each(fix);
        self.textprep.extra_stopwords.values_mut().for_each(fix);
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.window.end < self.window.start {
            return bad(format!(
                "window ends ({}) before it starts ({})",
                self.window.end, self.window.start
            ));
        }
        if self.smoothing.window == 0
            || self.smoothing.window % 2 == 0
            || self.smoothing.sigma <= 0.0
        {
            return bad("smoothing window must be odd and sigma positive".into());
        }
        if self.correlation.lag_min > self.correlation.lag_max {
            return bad("lag_min exceeds lag_max".into());
        }
        if self.topics.k_grid.is_empty() || self.topics.gamma_grid.is_empty() {
            return bad("topic grids must be non-empty".into());
        }
        if self
            .topics
            .gamma_grid
            .iter()
            .any(|g| !(*g > 0.0 && *g < 1.0))
        {
            return bad("gamma values must lie in (0, 1)".into());
        }
        if !(self.classify.test_fraction > 0.0 && self.classify.test_fraction < 1.0) {
            return bad("test_fraction must lie in (0, 1)".into());
        }
        if self.classify.c_grid.is_empty()
            || (!self.classify.linear && self.classify.rbf_gammas.is_empty())
        {
            return bad("classifier grid is empty".into());
        }
        self.inputs
            .tweet_format
            .parse::<crate::ingest::TweetFormat>()?;
        self.rt
            .to_config()
            .grid
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Flag beats config beats environment; 0 when none is given.
    pub fn effective_seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag.or(self.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
            Err(_) => Ok(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[inputs]
tweets = "t.jsonl"
cases = "c.csv"
gazetteer = "g.tsv"
regions = "r.json"

[window]
start = 2020-02-01
end = 2020-05-31
"#;

    #[test]
    fn defaults_fill_in() {
        let c = Config::parse(MINIMAL).unwrap();
        assert_eq!(c.smoothing, Smoothing::default());
        assert_eq!(c.classify.to_config().grid.len(), 16);
        assert_eq!(c.topics.to_config().k_grid, (1..=15).collect::<Vec<_>>());
        assert_eq!(c.rt.to_config(), RtConfig::default());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(Config::parse(&format!("{MINIMAL}\n[rt]\nbogus = 1\n")).is_err());
        assert!(Config::parse(&format!("{MINIMAL}\n[smoothing]\nwindow = 4\n")).is_err());
        assert!(Config::parse(&format!("{MINIMAL}\n[topics]\ngamma_grid = [1.5]\n")).is_err());
    }

    #[test]
    fn seed_priority() {
        let mut c = Config::parse(MINIMAL).unwrap();
        assert_eq!(c.effective_seed(Some(3)).unwrap(), 3);
        c.seed = Some(9);
        assert_eq!(c.effective_seed(Some(3)).unwrap(), 3);
        assert_eq!(c.effective_seed(None).unwrap(), 9);
    }
}
