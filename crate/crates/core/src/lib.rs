//! Particle solver and verification suite for the geometric thin-film
//! equation with the bi-Helmholtz smoothing kernel.
//!
//! Solutions are weighted sums of Dirac masses transported by the ODE
//! system `ẋ_i = h̄(x_i)² ∂xxx h̄(x_i)`. The crate evaluates that field in
//! linear time, integrates it adaptively while keeping particles ordered,
//! reconstructs the smoothed height `h̄ = K * h`, and checks the quantitative
//! bounds the solutions obey (gap envelopes, speed bound, weak-form
//! residual, Hölder regularity in `H³`, convergence of discretizations).

pub mod bench;
pub mod bl;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod integrator;
pub mod kernel;
pub mod lp;
pub mod measure;
pub mod quadrature;
pub mod report;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use integrator::{ParticleState, Trajectory};
pub use kernel::{Kernel, KernelConstants};
pub use measure::{DiscreteMeasure, InitialMeasure};
