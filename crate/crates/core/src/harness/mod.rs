//! Scenario configuration, Monte Carlo campaigns, sweeps and CSV export.
//!
//! A [`Scenario`] generates truth, clean IMU data and maps once; every run
//! then corrupts the IMU with its own seeds, mechanizes at 100 Hz and, when
//! aided, runs one filter epoch per second.

pub mod analysis;
mod config;
mod export;
mod maps;
mod montecarlo;
mod run;

pub use config::{
    stream_seed, MapSpec, RouteConfig, RunSeeds, ScenarioConfig, SweepParameter, SweepSpec, SyntheticMapConfig,
};
pub use export::{
    export, manifest, write_diagnostics, write_gradient_errors, write_radial_error, write_run_summary,
    write_sweep_summary, GRADIENT_ERROR_FILE, MANIFEST_FILE, RADIAL_ERROR_FILE, RUN_SUMMARY_FILE, SWEEP_SUMMARY_FILE,
};
pub use maps::{build_map_set, random_masses, synthetic_map_set};
pub use montecarlo::{
    epoch_stats, mean_std, monte_carlo, monte_carlo_with, run_campaign, sweep, Aggregate, Campaign, EpochStats,
    SweepPoint,
};
pub use run::{run_scenario, run_with_config, EpochRecord, EpochTruth, GradientSample, RunMetrics, Scenario};
