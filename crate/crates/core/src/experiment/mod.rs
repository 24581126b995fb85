//! Replicated LRU experiments against the analytic estimates: flat
//! key-value configuration, simulation-time sizing and the sweep itself.

pub mod config;
pub mod sizing;
pub mod sweep;

pub use config::{
    margin_from, model_from, quadrature_from, Assignments, ExperimentConfig, SimTime, SweepAxis, SweepCell, KEYS,
};
pub use sizing::{k_alpha, size_simulation_time, Sizing};
pub use sweep::{run_sweep, write_sweep_csv, CellFailure, SweepResult, SweepRow};
