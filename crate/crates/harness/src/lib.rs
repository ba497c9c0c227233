//! Repeated-run harness for the NPB suite: configuration sweeps, timing
//! statistics, hypothesis-test comparisons and CSV/JSON/text output.

pub mod compare;
pub mod emit;
pub mod execute;
pub mod stats;

pub use execute::{execute, run_once, Execution, Isolation, OutputFormat, RunRecord, RunSpec};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const VERIFICATION: i32 = 2;
    pub const INTERNAL: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] npb_core::NpbError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("child run failed: {0}")]
    Child(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        use npb_core::NpbError::*;
        match self {
            HarnessError::Usage(_) | HarnessError::Stats(_) => exit::USAGE,
            HarnessError::Core(
                UnknownBenchmark(_)
                | UnknownClass(_)
                | UnsupportedClass { .. }
                | InvalidArgument(_),
            ) => exit::USAGE,
            _ => exit::INTERNAL,
        }
    }
}
