//! Library backing the `ahlfors` binary; the commands are exposed here so
//! integration tests can drive them directly.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_converge, cmd_find_zeros, cmd_map_grid, cmd_solve, CommandOutcome};
pub use config::RunConfig;
pub use report::RunReport;
