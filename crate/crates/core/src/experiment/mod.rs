//! Experiment harness: scenario simulation, single runs, and sweeps over
//! the number of residual blocks and seeds. All outputs are plain text
//! and reproducible from the configuration.

mod commands;
mod config;

pub use commands::{
    checkpoint_path, collocation_seed, evaluate, run_tag, simulate, sweep, train_one,
    write_heatmaps, SimulationSummary, SweepRow, TrainOutcome, BOXPLOT_FILE, DATASET_FILE,
    FIELD_FILE, RESOLVED_CONFIG_FILE, SWEEP_FILE,
};
pub use config::{ExperimentConfig, Scenario};
