//! Multifunctional training and the sweep experiments built on it.

pub mod lorenz_halvorsen;
pub mod ngrc_sweep;
pub mod presets;
pub mod seeing_double;
pub mod sweeps;
pub mod training;

pub use lorenz_halvorsen::{
    attractor_training_set, lorenz_halvorsen_experiment, LorenzHalvorsenSetup, ModelKind, ReconstructionRecord,
    ReconstructionRun,
};
pub use ngrc_sweep::{
    log_space, ngrc_beta_sweep, ngrc_beta_sweep_with, ngrc_seeing_double_trial, rounded_weight_probe, NgrcBetaRecord,
    NgrcTask, RoundedWeightProbe,
};
pub use presets::{ngrc_preset, reservoir_preset, Preset};
pub use seeing_double::{
    orbit_spectra, run_seeing_double_trial, run_seeing_double_trial_with, seeing_double_run, seeing_double_set,
    SeeingDoubleReport, SeeingDoubleRun, TrialOptions, TrialStatus,
};
pub use sweeps::{run_parallel, seed_ledger, sweep_grid, sweep_rho, CellTrial, SweepResult};
pub use training::{train_multifunctional, MultifunctionalModel, MultifunctionalTrainingSet};
