//! Numerical kernels shared by the plant, controller and estimator.

mod cascade;
mod linalg;
mod noise;
mod ode;
mod reference;
mod window;

pub use cascade::FilterCascade;
pub use linalg::{min_eigenvalue, symmetric_eigenvalues};
pub use noise::gaussian_noise;
pub use ode::{rk4_step, Rk4};
pub use reference::LtiGenerator;
pub use window::{window_capacity, SlidingWindow};
