//! Experiment driver: config files, Monte-Carlo replication, CSV output and
//! the validator sweeps run by `minimax check`.

mod checks;
mod config;
mod csv;
mod experiment;

pub use checks::{
    lemma_checks, oracle_checks, run_checks, schedule_by_formula, schedule_checks, schedule_grid, CheckLine,
    CheckOptions, Suite, LEMMA_DRAWS, RECURSIVE_TRACES,
};
pub use config::{ExperimentConfig, Family, SelectionPolicy, SolverKind, KEYS};
pub use csv::{csv_string, write_csv, BUILD, HEADER};
pub use experiment::{
    load_problem, run_experiment, start_point, worker_count, AggregateResult, ColumnSummary, ReplicationRow,
    Summary, Verdict, MC_SLACK, WORKERS_ENV,
};
