//! Config-driven experiment runner and Table-1 style CSV emitter.

use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::async_parareal::AsyncPararealError;
use crate::model::ModelError;

pub mod config;
pub mod run;
pub mod table;

pub use config::{ExperimentConfig, Mode, ProblemSpec};
pub use run::{run_experiment, ExperimentOutcome, ExperimentReport, SummaryRow};
pub use table::{emit_table, format_sci, read_report, TABLE_HEADER};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Async(#[from] AsyncPararealError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        ExperimentError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| ExperimentError::Io { path, source }
    }
}
