//! Experiment harness for the kicked Harper simulator: configuration,
//! run orchestration with realization averaging, parameter sweeps, and
//! artifact output (CSV, NDJSON, PPM, manifest).

pub mod config;
pub mod experiment;
pub mod io;

pub use config::ConfigMap;
pub use experiment::{
    butterfly_scan, epsilon_c_scan, epsilon_c_scan_with, husimi_error_run, loglog_fit,
    run_experiment, sweep_kl,
    transition_point, transition_point_with, Engine, ExperimentConfig, Method, ObsRow, RunRecord,
};
