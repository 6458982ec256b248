//! Monte Carlo estimators, parameter sweeps and the figure/table catalogue.

pub mod catalog;
pub mod montecarlo;
pub mod records;
pub mod scaling;
pub mod sweep;
pub mod validate;

pub use catalog::{run_figure, run_table, FigureId, RunOptions, TableId, TableOutput};
pub use montecarlo::{Estimate, SinrMode};
pub use records::{emit_records, parse_records, ResultRecord};
pub use scaling::{fit_scaling_exponent, ScalingFit};
pub use sweep::{run_sweep, SweepSpec};
pub use validate::{run_validation, Check, ValidationBudget};
