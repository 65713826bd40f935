//! Reservoir computers trained for multifunctionality: one readout, two coexisting attractors.
//!
//! Continuous-time (CT) and leaky-integrator (LI) reservoirs live in [`reservoir`], the
//! next-generation (NG) variant in [`ngrc`]. [`experiments`] holds the training pipeline and
//! sweeps; [`analysis`] the outcome classification, roundness, STM and Floquet diagnostics.

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiments;
pub mod ngrc;
pub mod numerics;
pub mod reservoir;
pub mod series;
pub mod tasks;

pub use error::{Error, Result};
pub use series::TimeSeries;
