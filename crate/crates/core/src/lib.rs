//! Composite learning backstepping control for strict-feedback systems with
//! linearly parameterized uncertainty.
//!
//! The controller is a modular backstepping design whose parameter estimate
//! is driven by two prediction errors: an instantaneous filtered one and a
//! memory-based one built from the windowed excitation matrix of the swapping
//! regressor. The memory is managed stage by stage so that the exciting
//! strength never decreases while the set of excited channels is unchanged.
//!
//! Module map:
//! - [`numerics`]: RK4, filter cascades with derivative taps, sliding windows,
//!   reference generators, noise, small symmetric eigenproblems.
//! - [`jet`]: truncated multivariate Taylor arithmetic for the backstepping partials.
//! - [`plant`], [`backstepping`], [`swapping`], [`excitation`], [`tuner`]: the controller.
//! - [`baselines`]: ablations of the adaptive law.
//! - [`experiments`]: scenarios, simulation, traces, metrics.

pub mod backstepping;
pub mod baselines;
pub mod error;
pub mod excitation;
pub mod experiments;
pub mod jet;
pub mod numerics;
pub mod plant;
pub mod swapping;
pub mod tuner;

pub use error::{Error, Result};
