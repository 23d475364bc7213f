// SPDX-License-Identifier: MIT OR Apache-2.0
//! Monte Carlo grids, figure curves and CSV plumbing around `countdiag`.
//!
//! Replications are split into fixed-size blocks, so the numbers a grid
//! produces depend only on the master seed and never on the worker count.

pub mod curves;
pub mod engine;
pub mod error;
pub mod io;
pub mod scenario;

pub use curves::{emit_curves, write_curves_csv, CurveRow, CurveSpec};
pub use engine::{
    render_grid_table, run_grid, run_scenario, write_grid_csv, GridRow, IndexSummary, RunningMoments,
    ScenarioResult,
};
pub use error::HarnessError;
pub use io::{load_series_csv, read_series, write_series, NaPolicy};
pub use scenario::{Family, GridConfig, Scenario};
