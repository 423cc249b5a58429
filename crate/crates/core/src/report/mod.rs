//! End-to-end runs: configuration, stage computations, and the artifacts
//! each stage writes.

pub mod artifacts;
pub mod config;
pub mod cr;
pub mod manifest;
pub mod pipeline;
pub mod stages;
pub mod svg;

pub use config::Config;
pub use cr::{category_rate, CategoryRateRow, CategoryRateSeries, ClassifiedTopic};
pub use pipeline::RunContext;
