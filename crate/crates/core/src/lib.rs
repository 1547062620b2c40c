//! Spectral solver for stationary systems with double-scale anomalous
//! diffusion `[(-Delta)^{s1} + (-Delta)^{s2}] u = eps H * g(u) + f` on `R^3`,
//! approximated on a large periodic box.
//!
//! The pipeline: [`problem`] loads an instance, [`linear`] solves the linear
//! part for `u0`, [`bounds`] computes the explicit constants, and
//! [`contraction`] iterates the fixed-point map. [`cli`] and [`report`] drive
//! experiments from the command line.

pub mod bounds;
pub mod cli;
pub mod contraction;
pub mod error;
pub mod fit;
pub mod linear;
pub mod nonlinearity;
pub mod problem;
pub mod report;
pub mod spectral;

pub use bounds::BoundsContext;
pub use contraction::{FixedPointResult, FixedPointSolver, IterationOptions};
pub use error::{Error, Result};
pub use nonlinearity::{Monomial, Nonlinearity};
pub use problem::{load_problem, GaussianSpec, ProblemSpec, ValidationMode};
pub use spectral::{Grid3, ScalarField, Spectrum, VectorField};
