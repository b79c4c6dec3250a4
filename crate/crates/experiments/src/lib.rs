//! Monte-Carlo harness for the ptlab testers: seeded trials with Wilson
//! intervals, two-parameter trade-off grids, CSV output and SVG plots.

pub mod config;
pub mod error;
pub mod grid;
pub mod instance;
pub mod plot;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, Instance, RawConfig, Tester};
pub use error::{ExpError, Result};
pub use grid::{tradeoff_grid, Sweep};
pub use plot::{emit_plot, PlotKind};
pub use report::{TrialReport, wilson_interval};
pub use runner::run_trials;
