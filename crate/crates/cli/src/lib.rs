//! Command-line front end: problem files in, JSON reports out.

pub mod commands;
pub mod problem;

pub use commands::{
    extremes, kappa_command, solve, verify, CouplingFile, CouplingReport, ExtremesResult,
    KappaResult, ListedPoint, ScanSummary, SolveResult, SparseCoupling, Structure, Timings,
    VerifyResult,
};
pub use problem::{EntropySpec, Overrides, Problem, ProblemFile, ProblemOptions};

/// Failures that end a command, with their process exit codes.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}
