//! Benchmark orchestration: corpus runs, gained/lost accounting, threshold sweeps,
//! the generated problem family, and the reinforcing train/evaluate loop with
//! negative mining.

mod bench;
mod family;
mod reinforce;
mod sweep;

#[cfg(test)]
mod tests;

use std::path::Path;

use thiserror::Error;

pub use bench::{
    bench, diff, write_logs, BenchRun, BenchmarkReport, Corpus, CorpusProblem, Diff, KeepLogs, ProblemResult,
    ReportSummary,
};
pub use family::{generate_family, theory_library, Family, FamilyConfig, GeneratedProblem};
pub use reinforce::{loop_iteration, negative_mine, prepare, IterationOutcome, LoopConfig, LoopState};
pub use sweep::{sweep_csv, sweep_threshold, SweepRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("report and baseline cover different problems")]
    CorpusMismatch,
    #[error("bad report: {0}")]
    Format(String),
    #[error(transparent)]
    Data(#[from] crate::training::DataError),
    #[error(transparent)]
    Train(#[from] crate::training::TrainError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn csv(e: csv::Error) -> Self {
        HarnessError::Format(e.to_string())
    }
}
