use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use episignal::classify::{
    build_features, read_labeled_topics, train_svm, CountryEncoding, TrainConfig,
};
use episignal::textprep::TokenizedTweet;
use episignal::topics::{tune_hyperparams, AutoencoderConfig, EmbeddingProvider, TuneConfig};
use episignal::{seed, Parallelism};

const SCHEDULES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("rayon", Parallelism::Rayon),
];

fn svm_grid(c: &mut Criterion) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/labeled_topics.csv");
    let topics = read_labeled_topics(&path).unwrap();
    let (x, _) = build_features(&topics, CountryEncoding::OneHot).unwrap();
    let y: Vec<u8> = topics.iter().map(|t| t.category).collect();
    let cfg = TrainConfig {
        folds: 5,
        ..TrainConfig::default()
    };
    let mut g = c.benchmark_group("svm_grid_search");
    g.sample_size(10);
    for (name, par) in SCHEDULES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, par| {
            b.iter(|| train_svm(&x, &y, &cfg, 7, *par).unwrap())
        });
    }
    g.finish();
}

fn topic_tuning(c: &mut Criterion) {
    let mut rng = seed::rng(3);
    let docs: Vec<TokenizedTweet> = (0..60)
        .map(|i| TokenizedTweet {
            tweet_id: i.to_string(),
            tokens: (0..20)
                .map(|_| format!("c{}w{}", i % 3, rng.random_range(0..10)))
                .collect(),
        })
        .collect();
    let embedder = EmbeddingProvider::hashed(48, 1).unwrap();
    let cfg = TuneConfig {
        k_grid: (1..=6).collect(),
        gamma_grid: vec![0.5],
        autoencoder: AutoencoderConfig {
            latent_dim: 8,
            ..AutoencoderConfig::default()
        },
        ..TuneConfig::default()
    };
    let mut g = c.benchmark_group("topic_tuning");
    g.sample_size(10);
    for (name, par) in SCHEDULES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, par| {
            b.iter(|| tune_hyperparams(&docs, &embedder, &cfg, 0, *par).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, svm_grid, topic_tuning);
criterion_main!(benches);
