use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{path}:{line}: malformed record: {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("no case records match region spec '{0}'")]
    EmptyRegion(String),

    #[error("series of length {len} is shorter than the smoothing window {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("no epidemic signal: case series has no positive counts")]
    NoEpidemicSignal,

    #[error("no peak: R(t) never exceeds {0}")]
    NoPeak(f64),

    #[error("no descent: R(t) never drops below {0} after its peak")]
    NoDescent(f64),

    #[error("insufficient overlap: {0} paired samples (need at least 3)")]
    InsufficientOverlap(usize),

    #[error("zero variance series")]
    ZeroVariance,

    #[error("trend test needs at least 8 observations, got {0}")]
    TooFewObservations(usize),

    #[error("all documents are empty")]
    EmptyCorpus,

    #[error("no stored embedding for tweet id(s): {0}")]
    MissingEmbedding(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("silhouette undefined: fewer than two clusters")]
    SilhouetteUndefined,

    #[error("k = {k} exceeds the number of points {n}")]
    TooManyClusters { k: usize, n: usize },

    #[error("class {0} has a single sample; SMOTE needs at least two")]
    SingletonClass(u8),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("no grid cell could be evaluated")]
    EmptyGrid,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Validation failures (bad inputs, config, preconditions) as opposed to
    /// runtime failures (I/O and the like). The CLI maps these to exit code 1.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
