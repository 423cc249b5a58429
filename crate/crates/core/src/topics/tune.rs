//! CTE: [γ·θ ∥ embedding] → autoencoder latent → k-means, swept over (k, γ).

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::autoencoder::{autoencoder_fit, AutoencoderConfig};
use super::clusters::{extract_topics, TopicCluster};
use super::corpus::{compute_tfidf, Corpus};
use super::embed::EmbeddingProvider;
use super::kmeans::{kmeans, KMeansConfig};
use super::lda::{lda_fit, LdaConfig, LdaModel};
use super::metrics::{coherence, silhouette};
use crate::error::{Error, Result};
use crate::par::Parallelism;
use crate::seed;
use crate::textprep::TokenizedTweet;

/// `[γ·θ ∥ e]`, checked against the declared block sizes.
pub fn cte_concat(
    theta: &[f64],
    embedding: &[f64],
    gamma: f64,
    n_topics: usize,
    dim: usize,
) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Invalid(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    if theta.len() != n_topics {
        return Err(Error::DimensionMismatch {
            expected: n_topics,
            got: theta.len(),
        });
    }
    if embedding.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: embedding.len(),
        });
    }
    Ok(theta
        .iter()
        .map(|t| gamma * t)
        .chain(embedding.iter().copied())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub k_grid: Vec<usize>,
    pub gamma_grid: Vec<f64>,
    /// `n_topics` is replaced by each k of the grid.
    pub lda: LdaConfig,
    pub autoencoder: AutoencoderConfig,
    pub kmeans: KMeansConfig,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            k_grid: (1..=15).collect(),
            gamma_grid: (1..=9).map(|i| i as f64 / 10.0).collect(),
            lda: LdaConfig::new(1),
            autoencoder: AutoencoderConfig::default(),
            kmeans: KMeansConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub k: usize,
    pub gamma: f64,
    pub coherence: Option<f64>,
    pub silhouette: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_k: usize,
    pub best_gamma: f64,
    pub coherence: f64,
    pub silhouette: f64,
    /// Every grid cell in (k, γ) order.
    pub cells: Vec<CellScore>,
    /// Cluster label per document for the winning cell.
    pub assignments: Vec<usize>,
    /// Latent vectors of the winning cell.
    pub latent: Vec<Vec<f64>>,
}

struct CellOutcome {
    coherence: f64,
    silhouette: f64,
    assignments: Vec<usize>,
    latent: Vec<Vec<f64>>,
}

fn run_cell(
    docs: &[TokenizedTweet],
    corpus: &Corpus,
    lda: &LdaModel,
    embeddings: &[Vec<f64>],
    gamma: f64,
    cfg: &TuneConfig,
    cell_seed: u64,
) -> Result<CellOutcome> {
    let k = lda.n_topics;
    let dim = embeddings.first().map_or(0, Vec::len);
    let vectors = lda
        .doc_topic
        .iter()
        .zip(embeddings)
        .map(|(t, e)| cte_concat(t, e, gamma, k, dim))
        .collect::<Result<Vec<_>>>()?;
    let fit = autoencoder_fit(
        &vectors,
        &cfg.autoencoder,
        seed::derive(cell_seed, &[seed::tag("autoencoder")]),
    )?;
    let latent: Vec<Vec<f64>> = vectors.iter().map(|v| fit.model.encode(v)).collect();
    let km = kmeans(
        &latent,
        k,
        seed::derive(cell_seed, &[seed::tag("kmeans")]),
        &cfg.kmeans,
    )?;
    let sil = silhouette(&latent, &km.assignments)?;
    let day = NaiveDate::MIN;
    let words: Vec<Vec<String>> = extract_topics(&km.assignments, docs, day, "")
        .iter()
        .map(TopicCluster::words)
        .collect();
    let coh = coherence(&words, corpus)?;
    Ok(CellOutcome {
        coherence: coh.mean,
        silhouette: sil,
        assignments: km.assignments,
        latent,
    })
}

/// Competition ranks ("1224") by descending score.
fn ranks(scores: &[f64]) -> Vec<usize> {
    scores
        .iter()
        .map(|s| 1 + scores.iter().filter(|o| *o > s).count())
        .collect()
}

/// Evaluate the full (k, γ) grid on one document set. The winner has the
/// lowest sum of coherence and silhouette ranks; ties go to smaller k, then
/// smaller γ. Cells that fail (k = 1, k above the document count, ...) are
/// reported with their error and left out of the ranking.
pub fn tune_hyperparams(
    docs: &[TokenizedTweet],
    embedder: &EmbeddingProvider,
    cfg: &TuneConfig,
    master_seed: u64,
    par: Parallelism,
) -> Result<TuneResult> {
    if cfg.k_grid.is_empty() || cfg.gamma_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let corpus = Corpus::new(docs);
    let tfidf = compute_tfidf(&corpus)?;
    let embeddings = docs
        .iter()
        .map(|d| embedder.embed(&d.tweet_id, &d.tokens))
        .collect::<Result<Vec<_>>>()?;
    let ldas: Vec<Result<LdaModel>> = par.map(&cfg.k_grid, |&k| {
        let lc = LdaConfig {
            n_topics: k,
            ..cfg.lda
        };
        lda_fit(
            &corpus,
            &tfidf,
            &lc,
            seed::derive(master_seed, &[seed::tag("lda"), k as u64]),
        )
    });
    let coords: Vec<(usize, usize)> = (0..cfg.k_grid.len())
        .flat_map(|ki| (0..cfg.gamma_grid.len()).map(move |gi| (ki, gi)))
        .collect();
    let outcomes: Vec<Result<CellOutcome>> = par.map(&coords, |&(ki, gi)| {
        let k = cfg.k_grid[ki];
        let lda = ldas[ki]
            .as_ref()
            .map_err(|e| Error::Invalid(e.to_string()))?;
        let cell_seed = seed::derive(master_seed, &[seed::tag("cell"), k as u64, gi as u64]);
        run_cell(
            docs,
            &corpus,
            lda,
            &embeddings,
            cfg.gamma_grid[gi],
            cfg,
            cell_seed,
        )
    });

    let cells: Vec<CellScore> = coords
        .iter()
        .zip(&outcomes)
        .map(|(&(ki, gi), o)| CellScore {
            k: cfg.k_grid[ki],
            gamma: cfg.gamma_grid[gi],
            coherence: o.as_ref().ok().map(|c| c.coherence),
            silhouette: o.as_ref().ok().map(|c| c.silhouette),
            error: o.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    let ok: Vec<usize> = (0..cells.len()).filter(|i| outcomes[*i].is_ok()).collect();
    if ok.is_empty() {
        let first = cells
            .iter()
            .find_map(|c| c.error.clone())
            .unwrap_or_default();
        return Err(Error::Invalid(format!(
            "no grid cell could be evaluated ({first})"
        )));
    }
    let coh: Vec<f64> = ok
        .iter()
        .map(|i| cells[*i].coherence.expect("ok cell"))
        .collect();
    let sil: Vec<f64> = ok
        .iter()
        .map(|i| cells[*i].silhouette.expect("ok cell"))
        .collect();
    let (rc, rs) = (ranks(&coh), ranks(&sil));
    let win = (0..ok.len())
        .min_by(|&a, &b| {
            let (ca, cb) = (&cells[ok[a]], &cells[ok[b]]);
            (rc[a] + rs[a])
                .cmp(&(rc[b] + rs[b]))
                .then(ca.k.cmp(&cb.k))
                .then(ca.gamma.total_cmp(&cb.gamma))
        })
        .expect("non-empty");
    let idx = ok[win];
    let mut outcomes = outcomes;
    let best = outcomes.swap_remove(idx).expect("ok cell");
    Ok(TuneResult {
        best_k: cells[idx].k,
        best_gamma: cells[idx].gamma,
        coherence: best.coherence,
        silhouette: best.silhouette,
        cells,
        assignments: best.assignments,
        latent: best.latent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayTopics {
    pub region: String,
    pub day: NaiveDate,
    pub k: usize,
    pub gamma: f64,
    pub coherence: f64,
    pub silhouette: f64,
    pub clusters: Vec<TopicCluster>,
    pub cells: Vec<CellScore>,
    /// Tweets left without tokens after preprocessing; not clustered.
    pub empty_tweets: usize,
}

/// Tune and cluster one (region, day). The seed is derived from the master
/// seed, the region and the day, so days can run in any order.
pub fn model_day(
    region: &str,
    day: NaiveDate,
    tweets: &[TokenizedTweet],
    embedder: &EmbeddingProvider,
    cfg: &TuneConfig,
    master_seed: u64,
    par: Parallelism,
) -> Result<DayTopics> {
    let docs: Vec<TokenizedTweet> = tweets
        .iter()
        .filter(|t| !t.tokens.is_empty())
        .cloned()
        .collect();
    let day_seed = seed::derive(
        master_seed,
        &[seed::tag(region), seed::tag(&day.to_string())],
    );
    let r = tune_hyperparams(&docs, embedder, cfg, day_seed, par)?;
    Ok(DayTopics {
        region: region.to_string(),
        day,
        k: r.best_k,
        gamma: r.best_gamma,
        coherence: r.coherence,
        silhouette: r.silhouette,
        clusters: extract_topics(&r.assignments, &docs, day, region),
        cells: r.cells,
        empty_tweets: tweets.len() - docs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_block_structure() {
        assert_eq!(
            cte_concat(&[1.0, 0.0], &[0.5, 0.5], 0.5, 2, 2).unwrap(),
            vec![0.5, 0.0, 0.5, 0.5]
        );
        let theta = [0.2, 0.3, 0.5];
        let v = cte_concat(&theta, &[1.0], 0.1, 3, 1).unwrap();
        assert!((v[..3].iter().sum::<f64>() - 0.1).abs() < 1e-12);
        for (a, t) in v[..3].iter().zip(&theta) {
            assert!((a / 0.1 - t).abs() < 1e-12);
        }
        assert!(cte_concat(&theta, &[1.0], 1.0, 3, 1).is_err());
        assert!(cte_concat(&theta, &[1.0], 0.5, 2, 1).is_err());
        assert!(cte_concat(&theta, &[1.0, 2.0], 0.5, 3, 1).is_err());
    }

    #[test]
    fn competition_ranks() {
        assert_eq!(ranks(&[0.5, 0.9, 0.5, 0.1]), vec![2, 1, 2, 4]);
    }

    fn planted(seed_: u64) -> Vec<TokenizedTweet> {
        use rand::Rng;
        let mut rng = seed::rng(seed_);
        let vocab = [
            ["mask", "pharmacy", "glove", "sanitizer", "shortage"],
            ["border", "frontier", "commuter", "checkpoint", "closed"],
            ["school", "teacher", "homework", "online", "pupil"],
        ];
        (0..36)
            .map(|i| {
                let v = &vocab[i % 3];
                TokenizedTweet {
                    tweet_id: i.to_string(),
                    tokens: (0..6)
                        .map(|_| v[rng.random_range(0..5)].to_string())
                        .collect(),
                }
            })
            .collect()
    }

    fn small_cfg() -> TuneConfig {
        TuneConfig {
            k_grid: vec![2, 3],
            gamma_grid: vec![0.5],
            lda: LdaConfig {
                iterations: 50,
                ..LdaConfig::new(1)
            },
            autoencoder: AutoencoderConfig {
                latent_dim: 4,
                epochs: 30,
                ..Default::default()
            },
            kmeans: KMeansConfig::default(),
        }
    }

    #[test]
    fn single_cell_grid_wins_and_k1_is_excluded() {
        let docs = planted(1);
        let emb = EmbeddingProvider::hashed(16, 0).unwrap();
        let cfg = TuneConfig {
            k_grid: vec![1, 3],
            ..small_cfg()
        };
        let r = tune_hyperparams(&docs, &emb, &cfg, 5, Parallelism::Sequential).unwrap();
        assert_eq!(r.best_k, 3);
        assert!(r.cells[0].error.is_some());
        assert_eq!(r.assignments.len(), docs.len());
    }

    #[test]
    fn parallel_schedule_is_identical() {
        let docs = planted(2);
        let emb = EmbeddingProvider::hashed(16, 0).unwrap();
        let a = tune_hyperparams(&docs, &emb, &small_cfg(), 8, Parallelism::Sequential).unwrap();
        let b = tune_hyperparams(&docs, &emb, &small_cfg(), 8, Parallelism::Rayon).unwrap();
        assert_eq!(a, b);
        let day = NaiveDate::from_ymd_opt(2020, 4, 2).unwrap();
        let d1 = model_day(
            "GR",
            day,
            &docs,
            &emb,
            &small_cfg(),
            8,
            Parallelism::Sequential,
        )
        .unwrap();
        let d2 = model_day("GR", day, &docs, &emb, &small_cfg(), 8, Parallelism::Rayon).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn empty_grid() {
        let cfg = TuneConfig {
            k_grid: vec![],
            ..small_cfg()
        };
        let emb = EmbeddingProvider::hashed(4, 0).unwrap();
        assert!(matches!(
            tune_hyperparams(&planted(0), &emb, &cfg, 1, Parallelism::Sequential),
            Err(Error::EmptyGrid)
        ));
    }
}
