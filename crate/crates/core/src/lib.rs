pub mod classify;
pub mod corr;
pub mod epi;
pub mod error;
pub mod ingest;
pub mod numfmt;
pub mod par;
pub mod report;
pub mod seed;
pub mod series;
pub mod stats;
pub mod textprep;
pub mod topics;

pub use error::{Error, Result};
pub use par::Parallelism;
