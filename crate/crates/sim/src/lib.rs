//! Monte Carlo experiment engine and analytic sweeps for the relay
//! estimation protocols in `relay-core`.

pub mod experiment;
pub mod stats;
pub mod svg;
pub mod sweep;
pub mod verify;

pub use experiment::{
    estimate_error_prob, run_experiment, ExperimentError, ExperimentSpec, KRule, ResultRow,
    ResultTable, Strategy, StrategyParams,
};
pub use stats::{fit_exponent, fmt_sig, trial_seed, wilson_interval, ExponentFit, Z95};
pub use svg::{emit_svg, Chart};
pub use sweep::{default_grid, sweep_eps, sweep_p, SweepRow, SweepTable};
