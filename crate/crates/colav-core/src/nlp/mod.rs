//! Nonlinear-program construction and solving.
//!
//! Problems are assembled from named cost terms and constraint blocks,
//! each with an optional analytic gradient/Jacobian (central differences
//! otherwise). [`solver`] implements an augmented-Lagrangian method with
//! an L-BFGS inner loop, [`homotopy`] the warm-started relaxation
//! schedule, and [`shooting`] the multiple-shooting transcription used by
//! both optimization layers.

mod homotopy;
mod problem;
mod solver;
pub mod shooting;

pub use homotopy::homotopy_solve;
pub use problem::{check_gradients, GradientCheck, NlpBuilder, NlpProblem};
pub use solver::{solve_nlp, SolveOptions, SolveReport};
