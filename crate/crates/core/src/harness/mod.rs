//! Experiment configuration, trace files, finite-difference checks and
//! trace comparison.

pub mod compare;
pub mod config;
pub mod experiment;
pub mod fdcheck;
pub mod tracefile;

pub use compare::{compare_runs, compare_traces};
pub use config::{parse_assignment, Algorithm, AlgoParams, ExperimentConfig, Init, ProblemSpec};
pub use experiment::{build_problem, run_config, run_experiment, RunArtifacts};
pub use fdcheck::{fd_check, value_by_ascent, FdReport};
pub use tracefile::{trace_to_csv, TraceFile, TraceSummary, TraceTable, CSV_COLUMNS};
