//! Identification of parameters and initial states of autonomous ODE
//! systems from output trajectories, by linear regression on output jets.
//!
//! A model supplies regression blocks `g₀ = Σₗ σₗ gₗ` whose coefficients
//! `σ = r(θ)` are recovered by solving small linear systems at suitable
//! times; `θ` follows from an explicit inverse of `r`, and the initial state
//! from an inverse output map plus backward integration.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line
//! live in the companion `lindep` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod block;
pub mod error;
pub mod jets;
pub mod linalg;
pub mod models;
pub mod ode;
pub mod recovery;
pub mod registry;
pub mod system;
pub mod timeselect;

pub use block::{ParameterMap, PointwiseRatio, RegressionBlock, SigmaStore};
pub use error::{Error, Result};
pub use jets::{analytic_jets, numeric_jets, simulate_jets, uniform_grid, SampleTable};
pub use ode::{integrate, integrate_backward, Tolerances, Trajectory};
pub use recovery::{
    identify, DerivativeSource, IdentificationReport, IdentifyConfig, SolveMode,
};
pub use registry::{Model, ModelBundle, ModelHandle, Registry};
pub use system::{OutputJet, SystemSpec};
pub use timeselect::{SelectedTimes, Strategy};
