//! Stage computations. Each stage is a pure function of the run context and
//! its upstream results; writing and reading artifacts lives in `artifacts`.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::config::Config;
use super::cr::ClassifiedTopic;
use crate::classify::{
    build_features, evaluate, read_labeled_topics, train_svm, Country, CvScore, Evaluation,
    LabeledTopic, ModelDump,
};
use crate::corr::{lag_scan, trend_test, LagScan, TrendResult};
use crate::epi::{
    estimate_rt, slice_trajectory, smooth_cases, PandemicPeriods, Period, RtPosterior,
};
use crate::error::{Error, Result};
use crate::ingest::{
    aggregate_region_cases, assign_region, daily_volume, load_cases, load_region_specs,
    load_tweets, pad_to, resolve_tweets, summarize, CaseSeries, Gazetteer, RegionSpec,
    RegionSummary, ResolveStats, TweetRecord,
};
use crate::par::Parallelism;
use crate::series::{DailySeries, DateInterval};
use crate::textprep::{
    preprocess_tweets, PosLexicon, PreprocessConfig, SpellDictionary, TokenizedTweet,
};
use crate::topics::{model_day, DayTopics, EmbeddingProvider};

pub struct RunContext {
    pub config: Config,
    pub seed: u64,
    /// All region specs (assignment sees every spec).
    pub specs: Vec<RegionSpec>,
    /// Regions analysed, in report order.
    pub regions: Vec<String>,
    pub strict: bool,
    pub par: Parallelism,
}

impl RunContext {
    pub fn new(
        config: Config,
        seed: u64,
        region: Option<&str>,
        strict: bool,
        par: Parallelism,
    ) -> Result<Self> {
        let specs = load_region_specs(&config.inputs.regions)?;
        let mut regions: Vec<String> = if config.regions.is_empty() {
            specs.iter().map(|s| s.name.clone()).collect()
        } else {
            config.regions.clone()
        };
        for r in &regions {
            if !specs.iter().any(|s| &s.name == r) {
                return Err(Error::Config(format!(
                    "region '{r}' has no spec in {}",
                    config.inputs.regions.display()
                )));
            }
        }
        if let Some(only) = region {
            if !regions.iter().any(|r| r == only) {
                return Err(Error::Config(format!(
                    "unknown region '{only}'; configured: {}",
                    regions.join(", ")
                )));
            }
            regions = vec![only.to_string()];
        }
        Ok(RunContext {
            config,
            seed,
            specs,
            regions,
            strict,
            par,
        })
    }

    pub fn window(&self) -> DateInterval {
        self.config.window.interval()
    }

    pub fn topic_days(&self) -> DateInterval {
        self.config.topics.days(&self.config.window)
    }
}

pub struct RegionData {
    pub name: String,
    /// Cleaned daily cases over the study window.
    pub cases: CaseSeries,
    pub smoothed: DailySeries,
    pub volume: DailySeries,
    /// Indices into `IngestOutput::tweets`.
    pub tweet_indices: Vec<usize>,
}

pub struct IngestOutput {
    pub tweets: Vec<TweetRecord>,
    pub skipped_lines: usize,
    pub resolve: ResolveStats,
    pub regions: Vec<RegionData>,
    pub summary: Vec<RegionSummary>,
}

impl IngestOutput {
    pub fn region(&self, name: &str) -> Option<&RegionData> {
        self.regions.iter().find(|r| r.name == name)
    }
}

fn clip_cases(series: &CaseSeries, window: &DateInterval) -> CaseSeries {
    let last = window.end.pred_opt().unwrap_or(window.end);
    let padded = pad_to(series, window.start, last);
    let off = (window.start - padded.cases.start).num_days() as usize;
    let n = window.len_days() as usize;
    CaseSeries {
        region: padded.region.clone(),
        cases: DailySeries::new(window.start, padded.cases.values[off..off + n].to_vec()),
        raw: padded.raw[off..off + n].to_vec(),
        deaths: padded.deaths[off..off + n].to_vec(),
        clamped: padded
            .clamped
            .into_iter()
            .filter(|(d, _)| window.contains(*d))
            .collect(),
    }
}

pub fn run_ingest(ctx: &RunContext) -> Result<IngestOutput> {
    let cfg = &ctx.config;
    let window = ctx.window();
    let gazetteer = Gazetteer::load(&cfg.inputs.gazetteer)?;
    let loaded = load_tweets(
        &cfg.inputs.tweets,
        cfg.inputs.tweet_format.parse()?,
        ctx.strict,
    )?;
    let (tweets, resolve) = resolve_tweets(loaded.records, &gazetteer, &window);
    let assignments: Vec<Vec<String>> = tweets
        .iter()
        .map(|t| assign_region(t, &ctx.specs))
        .collect();
    let records = load_cases(&cfg.inputs.cases)?;
    let regions = ctx
        .regions
        .iter()
        .map(|name| {
            let spec = ctx
                .specs
                .iter()
                .find(|s| &s.name == name)
                .expect("validated in RunContext");
            let cases = clip_cases(
                &aggregate_region_cases(&records, spec, &cfg.zero_fill_before)?,
                &window,
            );
            let smoothed = smooth_cases(&cases, cfg.smoothing.window, cfg.smoothing.sigma)?.cases;
            Ok(RegionData {
                name: name.clone(),
                volume: daily_volume(&tweets, &assignments, name, &window),
                tweet_indices: (0..tweets.len())
                    .filter(|&i| assignments[i].iter().any(|r| r == name))
                    .collect(),
                cases,
                smoothed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&tweets, &assignments, &ctx.regions);
    Ok(IngestOutput {
        tweets,
        skipped_lines: loaded.skipped,
        resolve,
        regions,
        summary,
    })
}

pub struct RegionRt {
    pub region: String,
    pub result: std::result::Result<RtPosterior, String>,
}

pub fn run_rt(ctx: &RunContext, ingest: &IngestOutput) -> Vec<RegionRt> {
    let cfg = ctx.config.rt.to_config();
    let par = if ctx.par.is_parallel() {
        ctx.par
    } else {
        Parallelism::Sequential
    };
    par.map(&ingest.regions, |r| RegionRt {
        region: r.name.clone(),
        result: estimate_rt(&r.smoothed, &cfg).map_err(|e| e.to_string()),
    })
}

/// A MAP trajectory as handed from the rt stage to the periods stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MapTrajectory {
    pub region: String,
    pub series: Option<DailySeries>,
}

impl RegionRt {
    pub fn trajectory(&self) -> MapTrajectory {
        MapTrajectory {
            region: self.region.clone(),
            series: self.result.as_ref().ok().map(RtPosterior::map_series),
        }
    }
}

pub const NO_RT: &str = "no R(t) estimate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPeriods {
    pub region: String,
    pub periods: Option<PandemicPeriods>,
    pub error: Option<String>,
}

/// Values are snapped to the R grid first, so a trajectory read back from
/// CSV slices exactly like the in-memory one.
pub fn run_periods(ctx: &RunContext, maps: &[MapTrajectory]) -> Vec<RegionPeriods> {
    let grid = ctx.config.rt.to_config().grid;
    let pcfg = ctx.config.periods.to_config();
    maps.iter()
        .map(|m| {
            let result = match &m.series {
                None => Err(NO_RT.to_string()),
                Some(s) => {
                    let snapped: Vec<f64> = s.values.iter().map(|r| grid.snap(*r)).collect();
                    slice_trajectory(s.start, &snapped, &pcfg).map_err(|e| e.to_string())
                }
            };
            match result {
                Ok(p) => RegionPeriods {
                    region: m.region.clone(),
                    periods: Some(p),
                    error: None,
                },
                Err(e) => RegionPeriods {
                    region: m.region.clone(),
                    periods: None,
                    error: Some(e),
                },
            }
        })
        .collect()
}

pub struct PeriodCorrelation {
    pub region: String,
    pub period: Period,
    pub interval: DateInterval,
    pub scan: LagScan,
    pub trend: std::result::Result<TrendResult, String>,
}

/// Lag scan of cleaned daily cases against tweet volume, plus a Mann-Kendall
/// test on the volume, for every non-empty period of every sliced region.
pub fn run_correlate(
    ctx: &RunContext,
    ingest: &IngestOutput,
    periods: &[RegionPeriods],
) -> Vec<PeriodCorrelation> {
    let lags = ctx.config.correlation.lag_min..=ctx.config.correlation.lag_max;
    let mut out = Vec::new();
    for rp in periods {
        let (Some(p), Some(data)) = (&rp.periods, ingest.region(&rp.region)) else {
            continue;
        };
        for period in Period::ALL {
            let interval = p.interval(period);
            if interval.is_empty() {
                continue;
            }
            out.push(PeriodCorrelation {
                region: rp.region.clone(),
                period,
                interval,
                scan: lag_scan(&data.cases.cases, &data.volume, lags.clone(), &interval),
                trend: trend_test(&data.volume.slice(&interval).values).map_err(|e| e.to_string()),
            });
        }
    }
    out
}

pub fn preprocess_config(cfg: &Config) -> Result<PreprocessConfig> {
    let mut p = PreprocessConfig::default();
    if let Some(words) = &cfg.textprep.query_keywords {
        p = PreprocessConfig::new(
            p.stopword_lists.clone(),
            words.iter().map(|w| w.to_lowercase()).collect(),
        );
    }
    for (lang, path) in &cfg.textprep.extra_stopwords {
        p.extend_stopwords(lang, path)?;
    }
    if let Some(path) = &cfg.textprep.spell_dictionary {
        p = p.with_spell(SpellDictionary::load(path)?);
    }
    if let Some(path) = &cfg.textprep.pos_lexicon {
        p = p.with_pos(PosLexicon::load(path)?);
    }
    Ok(p.with_stemmer(cfg.textprep.stemmer))
}

/// Tokens of every tweet assigned to each analysed region, keyed by region.
pub fn tokenize_regions(
    ctx: &RunContext,
    ingest: &IngestOutput,
) -> Result<BTreeMap<String, Vec<(NaiveDate, TokenizedTweet)>>> {
    let pcfg = preprocess_config(&ctx.config)?;
    let all = preprocess_tweets(&ingest.tweets, &pcfg, ctx.par);
    Ok(ingest
        .regions
        .iter()
        .map(|r| {
            let toks = r
                .tweet_indices
                .iter()
                .map(|&i| (ingest.tweets[i].date, all[i].clone()))
                .collect();
            (r.name.clone(), toks)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayStatus {
    Modeled,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayEntry {
    pub region: String,
    pub day: NaiveDate,
    pub tweets: usize,
    pub status: DayStatus,
    pub message: Option<String>,
    #[serde(skip)]
    pub topics: Option<DayTopics>,
}

pub fn embedder(cfg: &Config) -> Result<EmbeddingProvider> {
    match &cfg.inputs.embeddings {
        Some(path) => EmbeddingProvider::load(path),
        None => EmbeddingProvider::hashed(cfg.topics.embedding_dim, cfg.topics.embedding_seed),
    }
}

/// One CTE fit per (region, day) over the topic window. Corpora below
/// `min_tweets` are skipped; failures are recorded, not fatal.
pub fn run_topics(ctx: &RunContext, ingest: &IngestOutput) -> Result<Vec<DayEntry>> {
    let tokens = tokenize_regions(ctx, ingest)?;
    let emb = embedder(&ctx.config)?;
    let tune = ctx.config.topics.to_config();
    let jobs: Vec<(String, NaiveDate)> = ctx
        .regions
        .iter()
        .flat_map(|r| ctx.topic_days().days().map(move |d| (r.clone(), d)))
        .collect();
    Ok(ctx.par.map(&jobs, |(region, day)| {
        let docs: Vec<TokenizedTweet> = tokens[region]
            .iter()
            .filter(|(d, _)| d == day)
            .map(|(_, t)| t.clone())
            .collect();
        let mut entry = DayEntry {
            region: region.clone(),
            day: *day,
            tweets: docs.len(),
            status: DayStatus::Skipped,
            message: None,
            topics: None,
        };
        if docs.len() < ctx.config.topics.min_tweets {
            entry.message = Some(format!(
                "fewer than {} tweets",
                ctx.config.topics.min_tweets
            ));
            return entry;
        }
        match model_day(region, *day, &docs, &emb, &tune, ctx.seed, ctx.par) {
            Ok(t) => {
                entry.status = DayStatus::Modeled;
                entry.topics = Some(t);
            }
            Err(e) => {
                entry.status = DayStatus::Failed;
                entry.message = Some(e.to_string());
            }
        }
        entry
    }))
}

pub fn topic_id(region: &str, day: NaiveDate, cluster: usize) -> String {
    format!("{region}:{day}:{cluster}")
}

pub struct ClassifyOutput {
    pub dump: ModelDump,
    pub evaluation: Evaluation,
    pub cv: Vec<CvScore>,
    pub chosen: usize,
    pub test_size: usize,
    pub predictions: Vec<ClassifiedTopic>,
}

/// Train on the labeled topics, evaluate on the held-out split, then label
/// every valid extracted topic.
pub fn run_classify(ctx: &RunContext, days: &[DayEntry]) -> Result<ClassifyOutput> {
    let path = ctx.config.inputs.labeled_topics.as_ref().ok_or_else(|| {
        Error::Config("inputs.labeled_topics is required for classification".into())
    })?;
    let labeled = read_labeled_topics(path)?;
    let (x, space) = build_features(&labeled, ctx.config.classify.encoding)?;
    let y: Vec<u8> = labeled.iter().map(|t| t.category).collect();
    let outcome = train_svm(&x, &y, &ctx.config.classify.to_config(), ctx.seed, ctx.par)?;
    let truth: Vec<u8> = outcome.test_indices.iter().map(|&i| y[i]).collect();
    let pred: Vec<u8> = outcome
        .test_indices
        .iter()
        .map(|&i| outcome.model.predict(&x[i]))
        .collect();
    let dump = ModelDump::new(space, outcome.model);

    let mut predictions = Vec::new();
    for entry in days {
        let Some(t) = &entry.topics else { continue };
        let country: Country = t.region.parse().map_err(|_| {
            Error::Invalid(format!(
                "region '{}' is not one of the classifier's countries",
                t.region
            ))
        })?;
        for c in t.clusters.iter().filter(|c| c.valid) {
            let topic = LabeledTopic {
                top_words: c.words(),
                country,
                category: 1,
            };
            predictions.push(ClassifiedTopic {
                topic_id: topic_id(&t.region, t.day, c.cluster_id),
                region: t.region.clone(),
                day: t.day,
                category: dump.predict(&topic),
                tweets: c.members.len(),
            });
        }
    }
    Ok(ClassifyOutput {
        evaluation: evaluate(&truth, &pred),
        cv: outcome.cv,
        chosen: outcome.chosen,
        test_size: truth.len(),
        dump,
        predictions,
    })
}

/// Word counts over a region's tweets inside `interval`, count descending,
/// ties lexicographic, at most `top` rows.
pub fn word_frequencies(
    tokens: &[(NaiveDate, TokenizedTweet)],
    interval: &DateInterval,
    top: usize,
) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (d, t) in tokens {
        if interval.contains(*d) {
            for w in &t.tokens {
                *counts.entry(w.as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts
        .into_iter()
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::CaseSeries;

    #[test]
    fn clipping_pads_and_trims() {
        let s = CaseSeries::from_counts(
            "X",
            NaiveDate::from_ymd_opt(2020, 3, 3).unwrap(),
            &[1.0, 2.0, 3.0, 4.0],
        );
        let w = DateInterval::inclusive(
            NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
            NaiveDate::from_ymd_opt(2020, 3, 4).unwrap(),
        );
        let c = clip_cases(&s, &w);
        assert_eq!(c.cases.start, w.start);
        assert_eq!(c.cases.values, vec![0.0, 0.0, 1.0, 2.0]);
        assert_eq!(c.raw.len(), 4);
    }

    #[test]
    fn word_frequency_ranking() {
        let d = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        let tt = |words: &str| TokenizedTweet {
            tweet_id: String::new(),
            tokens: words.split_whitespace().map(str::to_string).collect(),
        };
        let toks = vec![
            (d, tt("mask school mask")),
            (d, tt("border school")),
            (d.succ_opt().unwrap(), tt("zebra zebra zebra")),
        ];
        let f = word_frequencies(&toks, &DateInterval::inclusive(d, d), 2);
        assert_eq!(f, vec![("mask".to_string(), 2), ("school".to_string(), 2)]);
    }
}
