//! External solver processes.

pub mod parallel;
pub mod process;

pub use parallel::run_parallel;
pub use process::{
    parse_verdict, run_capture, run_solver, Captured, RunFailure, SolverKind, SolverSpec, Verdict, DEFAULT_TIMEOUT,
};
