//! Config-driven sweeps that write CSV.

pub mod config;
pub mod output;
pub mod runs;

pub use config::{load_config, load_config_with, backhaul, ScenarioConfig};
pub use output::{Cell, Metadata, Row, SweepResult};
pub use runs::{run_array_gain, run_daosa_tradeoff, run_power_budget, run_rate_vs_power, run_rayleigh};
