//! Config-driven experiment runner around the coverage library.

use std::fmt;

pub mod config;
pub mod runner;
pub mod scenarios;

pub use config::{ComparisonMode, EvaluatorKind, ExperimentSpec, HeightCase, SweepAxis};
pub use runner::{render_csv, render_json, run_experiment, OutputFormat, ResultRow, RunOverrides};
pub use scenarios::emit_builtin_scenarios;

/// Process-level error classes; each maps to a distinct exit code.
#[derive(Debug, Clone)]
pub enum CliError {
    /// Invalid configuration or command line (exit 2).
    Config(String),
    /// Numerical failure inside an evaluator (exit 3).
    Numerical(String),
    /// Filesystem failure (exit 4).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
