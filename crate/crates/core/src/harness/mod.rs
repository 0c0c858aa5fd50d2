//! Experiments and the command-line front end.

pub mod cli;
mod config;
mod experiment;

use serde_json::json;
use thiserror::Error;

use crate::bound::BoundError;
use crate::functional::FunctionalError;
use crate::infoproxy::ProxyError;
use crate::mdim::MdimError;
use crate::reduction::{ReductionError, ReductionReport};
use crate::seq::SeqError;

pub use config::{
    Direction, ExperimentConfig, Resolved, DEFAULT_TOLERANCE, DEFAULT_UYB_CAP, DEFAULT_UYB_HORIZON,
    MIN_EXPERIMENT_HORIZON,
};
pub use experiment::{
    checks, recompute_verdict, run_experiment, run_forward_dpi, run_reverse_dpi, run_sandwich,
    Check, ExperimentReport, ExperimentRun, SeedReductions, SeedRow,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Proxy(#[from] ProxyError),
    #[error(transparent)]
    Mdim(#[from] MdimError),
    #[error("reduction witness fails for seed {seed}: {}", report.first_failure.as_ref().map_or("", |f| f.detail.as_str()))]
    HypothesisUnmet {
        seed: u64,
        report: Box<ReductionReport>,
    },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::HypothesisUnmet { .. } | HarnessError::Precondition(_) => EXIT_PRECONDITION,
            // Divergence and missing preimages are outcomes of valid requests.
            HarnessError::Functional(FunctionalError::Diverged(_))
            | HarnessError::Reduction(ReductionError::NotFound { .. }) => EXIT_FAIL,
            _ => EXIT_USAGE,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::Seq(_) => "sequence",
            HarnessError::Functional(_) => "functional",
            HarnessError::Bound(_) => "bound",
            HarnessError::Reduction(_) => "reduction",
            HarnessError::Proxy(_) => "proxy",
            HarnessError::Mdim(_) => "mdim",
            HarnessError::HypothesisUnmet { .. } => "hypothesis-unmet",
            HarnessError::Precondition(_) => "precondition",
            HarnessError::Io(_) => "io",
            HarnessError::Json(_) => "json",
            HarnessError::Csv(_) => "csv",
        }
    }

    /// Machine-readable form written to stderr by the CLI.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let HarnessError::HypothesisUnmet { seed, report } = self {
            v["seed"] = json!(seed);
            v["reduction_report"] = serde_json::to_value(report.summary()).expect("serializable");
        }
        v
    }
}
