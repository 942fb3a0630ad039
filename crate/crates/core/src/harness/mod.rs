//! Declarative experiments: config parsing, sweeps, slope fits and output.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod output;
pub mod svg;
pub mod sweep;

pub use config::{parse_config, ConcentrationParams, CovarianceSpec, ExperimentConfig, LowerBoundParams, PolicySpec};
pub use fit::{fit_slope, Correction, SlopeFit};
pub use svg::{emit_svg, PlotSeries};
pub use sweep::{run_sweep, SweepRow};
