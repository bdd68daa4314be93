//! Discrete Lagrange-Dirac integrators for mechanical systems with
//! nonholonomic (velocity-level) constraints.
//!
//! The crate is organised bottom-up:
//!
//! - [`mechanics`]: models, discrete Lagrangians and discrete Legendre transforms
//! - [`constraints`]: constraint one-forms, discrete constraint spaces, annihilators
//! - [`dirac`]: discrete bundle maps, Dirac differentials and structure certification
//! - [`integrator`]: per-step Newton solve and trajectory generation
//! - [`diagnostics`]: energies, momenta, symplecticity and convergence order
//! - [`models`]: bundled systems (rolling disk, Heisenberg, oscillator, free particle)
//! - [`cli`]: run configuration, CSV output and the command-line front end
//!
//! ```
//! use lagdirac::{models, integrator, mechanics::{DiscreteSetup, Scheme}};
//!
//! let setup = DiscreteSetup::new(models::heisenberg(), 0.01, Scheme::Minus).unwrap();
//! let q0 = nalgebra::dvector![1.0, 0.0, 0.1];
//! let q1 = nalgebra::dvector![1.05, 0.1, 0.0];
//! let traj = integrator::run(&setup, &q0, &q1, 10, &Default::default()).unwrap();
//! assert_eq!(traj.len(), 12);
//! ```

// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constraints;
pub mod diagnostics;
pub mod dirac;
mod error;
pub mod integrator;
pub mod mechanics;
pub mod models;
mod numeric;

pub use error::{Error, Result};

/// Dense real vector used for all chart coordinates.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
