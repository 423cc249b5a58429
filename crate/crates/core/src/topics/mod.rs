//! Topic modeling per (region, day): TF-IDF-weighted LDA and sentence
//! embeddings combined with γ, compressed by an autoencoder and clustered
//! with k-means; UMass coherence and silhouette drive the (k, γ) search.

mod autoencoder;
mod clusters;
mod corpus;
mod embed;
mod kmeans;
mod lda;
mod metrics;
mod pca;
mod tune;

pub use autoencoder::{
    autoencoder_fit, numeric_gradient, relative_error, Autoencoder, AutoencoderConfig,
    AutoencoderFit,
};
pub use clusters::{extract_topics, TopicCluster, TOP_WORDS};
pub use corpus::{compute_tfidf, Corpus, TfIdf};
pub use embed::{hashed_embedding, write_embeddings, EmbeddingProvider};
pub use kmeans::{kmeans, sq_dist, KMeansConfig, KMeansResult};
pub use lda::{lda_fit, quantize, LdaConfig, LdaModel};
pub use metrics::{coherence, silhouette, umass, Coherence};
pub use pca::{jacobi_eigen, principal_components, project_2d, Pca};
pub use tune::{
    cte_concat, model_day, tune_hyperparams, CellScore, DayTopics, TuneConfig, TuneResult,
};
