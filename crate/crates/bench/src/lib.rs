//! Experiment runner for the RIS secrecy solvers: TOML-described sweeps,
//! long-format CSV tables and SVG plots.

pub mod config;
pub mod experiment;
pub mod plot;
pub mod table;

pub use config::{ExperimentConfig, Family, Method, StepVariant};
pub use experiment::{run_experiment, write_outputs, RunOutput};
pub use table::{emit_csv, ResultTable, SeedLabel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("plot error: {0}")]
    Plot(String),
}

impl BenchError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::Parse(_) => 2,
            BenchError::Numeric(_) => 3,
            BenchError::Io(_) | BenchError::Plot(_) => 1,
        }
    }
}

impl From<ris_secrecy::Error> for BenchError {
    fn from(e: ris_secrecy::Error) -> Self {
        use ris_secrecy::Error as E;
        match e {
            E::Config(_) | E::Domain(_) | E::Dimension(_) | E::CostGuard(_) => BenchError::Config(e.to_string()),
            E::Numeric(_) | E::Fit(_) | E::ZeroGradient | E::Degenerate(_) => BenchError::Numeric(e.to_string()),
        }
    }
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        BenchError::Parse(e.to_string())
    }
}
