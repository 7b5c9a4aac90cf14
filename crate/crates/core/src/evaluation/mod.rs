//! Objective-to-subjective correlation harness.
//!
//! Objective scores are mapped onto the MOS scale with a least-squares cubic
//! and compared with the actual MOS through PLCC and SROCC, per stimulus
//! group and over the pooled set.

mod benchmark;
mod correlation;
mod manifest;
mod regression;
mod report;

use thiserror::Error;

pub use benchmark::{
    run_benchmark, BenchmarkOutcome, BenchmarkSettings, CorrelationReport, StimulusScore,
    POOLED_GROUP,
};
pub use correlation::{fractional_ranks, plcc, srocc};
pub use manifest::{parse_manifest, read_manifest, StimulusRecord};
pub use regression::{fit_regression, fit_regression_form, Fit, RegressionForm};
pub use report::{format_significant, write_outputs, write_report_csv, write_scores_csv};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("rank-deficient design: {distinct} distinct objective values for {params} parameters")]
    RankDeficient { distinct: usize, params: usize },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("no metric variants requested")]
    NoVariants,
    #[error("stimulus {stimulus_id}: file not found: {path}")]
    MissingFile { stimulus_id: String, path: String },
    #[error("stimulus {stimulus_id}: cannot load {path}: {message}")]
    Load {
        stimulus_id: String,
        path: String,
        message: String,
    },
    #[error("stimulus {stimulus_id}, metric {variant}: {source}")]
    Metric {
        stimulus_id: String,
        variant: String,
        source: crate::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
