//! Command-line layer for `certlab`: figure jobs that write CSV tables and
//! tools that print JSON reports.

pub mod figures;
pub mod format;
pub mod grid;
pub mod tools;

pub use figures::{compute_figure, run_figure, FigureData, FigureId, FigureJob, FigureSummary};
pub use grid::Grid;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
}
