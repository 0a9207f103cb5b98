//! Outer loops: shape-gradient descent on a tracking functional, and ADMM
//! with a box constraint on an auxiliary copy of the state.

mod admm;
mod config;
mod driver;
mod history;

pub use admm::{admm_lambda_update, admm_v_update, default_bounds, AdmmState};
pub use config::{BoundsRule, Method, SolverConfig};
pub use driver::{reconstruct, run_admm, run_so, ReconstructionProblem, RunOutcome, StopReason, LAMBDA_DIVERGENCE};
pub use history::{format_history_csv, parse_history_csv, snapshot_name, HistoryRow, RunRecord, HISTORY_HEADER};
