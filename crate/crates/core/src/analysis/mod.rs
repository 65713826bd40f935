//! Outcome classification and diagnostics of trained reservoirs.

pub mod cycle;
pub mod floquet;
pub mod outcome;
pub mod reconstruction;
pub mod stm;

pub use cycle::{
    multifunctionality_check, multifunctionality_success, rotation_direction, roundness, MultifunctionalityReport,
    Rotation, ROUNDNESS_THRESHOLD,
};
pub use outcome::{classify_outcome, estimate_period, last_cycle, OutcomeClass, TrialOutcome};
pub use floquet::{
    floquet_multipliers, li_floquet_multipliers, variational_monodromy, FloquetSpectrum, OrbitLabel, STABILITY_TOLERANCE,
};
pub use reconstruction::{attractor_reconstruction_check, ReconstructionReport};
pub use stm::{pearson, point_biserial, stm, stm_terms, StmConfig};
