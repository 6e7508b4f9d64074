//! Experiment driver: run configuration files, single runs, parallel
//! sweeps, aggregation and hyperparameter importance.
//!
//! Everything here is `f64`; the generic numerics live in the other modules.

mod aggregate;
mod config;
mod run;
mod sweep;

pub use aggregate::{
    aggregate, importance, mean_std, sweep_importance, GroupImportance, GroupSummary, Importance, Observation,
    PointSummary, SweepSummary,
};
pub use config::{GridPoint, Mitigation, RunConfig, RunSettings, SweepConfig};
pub use run::{
    epochs_csv, execute, read_kl_curve, read_report, run_single, RunReport, RunStatus, CALIBRATION_FILE, CONFIG_FILE,
    EPOCHS_FILE, EPOCHS_HEADER, PARAMS_FILE, SUMMARY_FILE,
};
pub use sweep::{
    default_workers, entry_dir, read_manifest, run_dir_name, run_sweep, write_manifest, ManifestEntry, GRID_FILE,
    MANIFEST_FILE, MANIFEST_HEADER, SWEEP_CONFIG_FILE, WORKERS_ENV,
};
