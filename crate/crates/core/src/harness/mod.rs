//! Experiment configuration, figure recipes and result bundles.

mod bundle;
mod config;
mod recipes;

pub use bundle::{ConvergenceCheck, ResultBundle, Table};
pub use config::{
    preset_names, preset_source, resolve, Dissipation, DissipativeSet, ExperimentConfig, Numerics, OmegaC,
    Operation, Overrides, Physics, ResonanceMode, Scan, Sweep, EXPERIMENTS,
};
pub use recipes::{
    execute, output_dir, reproduce, run, run_custom, run_fig1, run_fig3, run_fig4, run_fig5, run_fig6, run_fig7,
    OUT_ENV,
};
