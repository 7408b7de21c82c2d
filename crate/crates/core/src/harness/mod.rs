//! Manufactured solution, run configuration, time-stepping drivers and
//! result emission.

mod config;
mod experiments;
mod output;
mod run;
mod solution;

pub use config::{ErrorNorm, Method, RunConfig, MAX_REFINE};
pub use experiments::{
    fit_exponent, run_convergence, run_self_convergence, run_sweep, run_timing, ConvergenceTable,
    SelfConvergence, TimingRow, TimingTable,
};
pub use output::{csv_string, emit_csv, emit_json, iteration_table, json_string, CSV_HEADER};
pub use run::{
    build_mesh, fe_system, random_state, run, run_on, Discretization, MeshCounts, RunHooks, RunOutcome, RunReport,
    Scenario, StepRecord,
};
pub use solution::ManufacturedSolution;
