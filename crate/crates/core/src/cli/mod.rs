//! Configuration files, experiment orchestration and artifact emission.

mod config;
mod plot;
mod run;

pub use config::{
    load_config, parse_config, save_config, CloningConfig, ExperimentConfig, ExperimentKind, VarianceArm,
    VarianceConfig,
};
pub use plot::PLOT_SCRIPT;
pub use run::{configure_workers, run_experiment, RunSummary, WORKERS_ENV};
