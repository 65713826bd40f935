//! Dense linear algebra, eigenvalues, RK4 integration and seeded random streams.

mod eigen;
mod linalg;
mod matrix;
mod ode;
mod rng;
mod sparse;

pub use eigen::{
    eigenvalues, hessenberg_in_place, scale_to_spectral_radius, spectral_radius, Complex, ComplexSpectrum,
};
pub use linalg::{cholesky, ridge_solve, solve, Lu, QrRidgeAccumulator, RidgeAccumulator, RidgeSums};
pub use matrix::{dot, Matrix};
pub use ode::{rk4_integrate, rk4_integrate_to, split_horizon, Rk4};
pub use rng::{StreamRng, StreamRole};
pub use sparse::CsrMatrix;
