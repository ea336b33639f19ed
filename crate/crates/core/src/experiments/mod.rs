//! Seeded Monte-Carlo experiments: configuration, single trials and sweeps.

pub mod config;
pub mod sweep;
pub mod trial;

pub use config::{
    preset, Budget, DoaLaw, DoaMethod, ExperimentConfig, Measure, SpeedLaw, SweepAxis, TxSpacing,
    DOA_DELTA_THETAS, PRESETS,
};
pub use sweep::{
    run_spectrum, run_sweep, sweep_points, Execution, PointSummary, SweepPoint, SweepTable,
};
pub use trial::{draw_scene, estimate_doas, run_trial, trial_seed, trial_waveform, TrialOutcome};
