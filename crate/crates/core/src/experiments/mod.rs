//! Monte-Carlo harness: configuration, NMSE and flop models, sweeps and file output.

mod config;
mod metrics;
mod output;
mod sweep;

pub use config::{AllocationKind, ScenarioConfig};
pub use metrics::{complexity_table, flop_model, nmse, ComplexityRow};
pub use output::{
    allocation_csv, complexity_csv, estimate_csv, plot_script, scenario_csv, sweep_csv, write_sweep, ALLOCATION_HEADER,
    COMPLEXITY_HEADER, ESTIMATE_HEADER, SCENARIO_HEADER, SWEEP_HEADER,
};
pub use sweep::{
    allocate, draw_deployment, draw_realization, estimate_point, grid_setup, mean_std, run_sweep, run_sweep_with,
    sort_rows, trial_seed, truth_mu, Deployment, GridSetup, Realization, SweepOptions, SweepRow, UtNmseRow,
};

#[cfg(test)]
mod tests;
