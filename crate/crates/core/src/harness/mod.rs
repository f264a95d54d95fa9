//! Experiment configuration, Monte-Carlo sweeps over block length, pairing and
//! interleaving, CSV reports and analytic self-checks.

mod config;
mod csv;
mod sweep;
pub mod validate;

pub use config::{
    apply_seed_env, load_config, parse_config, ConfigError, ExperimentConfig, Scale, ShapingConfig, SweepConfig,
    SEED_ENV,
};
pub use csv::{emit_csv, format_g6, render_csv, CSV_HEADER};
pub use sweep::{
    aggregate, mean_ci95, noise_seed, run_seed, run_sweep, sweep_points, AggregateRow, PointKind, Progress,
    RunRow, SweepError, SweepPoint, SweepResult,
};
