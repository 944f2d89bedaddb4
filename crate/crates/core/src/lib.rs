//! Numerical workbench for a chemotaxis-consumption system with nonlinear
//! diffusion, nonlinear sensitivity, logistic growth and gradient damping.
//!
//! * [`model`]: parameters, grid, fields, initial data
//! * [`regime`]: exponent inequalities, explicit constants and the regime classifier
//! * [`solver`]: explicit positivity-preserving finite-volume integrator
//! * [`diagnostics`]: norms, the energy functional and boundedness verdicts
//! * [`config`]: the flat `key = value` run configuration
//! * [`output`], [`sweep`]: run directories and parameter sweeps
//! * [`verify`]: the acceptance checks

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod output;
pub mod regime;
pub mod solver;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
