//! Robust decentralized H2 state-feedback synthesis.
//!
//! Given a linear plant whose state matrix carries interval uncertainty on
//! selected entries, this crate assembles a conic program over the vertices
//! of the induced uncertainty polytope, solves its dual with a symmetric
//! Gauss–Seidel proximal augmented-Lagrangian iteration, and extracts a
//! block-diagonal (decentralized) feedback gain together with a guaranteed
//! quadratic-cost bound. A separate verification pass re-checks structure,
//! closed-loop stability, and the bound from scratch.
//!
//! All numerical code is generic over the scalar type through [`Scalar`];
//! the aliases at the crate root fix `f64`, which is what the command-line
//! front end and the tests use.
//!
//! The pipeline, end to end:
//!
//! ```
//! use rdh2_core::{model, solver, control};
//! use nalgebra::DMatrix;
//!
//! // One state, one input, cheap analytic case.
//! let plant = model::validate_plant(model::PlantModel::new(
//!     DMatrix::from_row_slice(1, 1, &[1.0]),
//!     DMatrix::from_row_slice(1, 1, &[1.0]),
//!     DMatrix::from_row_slice(1, 1, &[1.0]),
//!     DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
//!     DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
//! )).unwrap();
//! let polytope = model::enumerate_vertices(&plant, &model::UncertaintySpec::empty()).unwrap();
//! let structure = model::BlockStructure::new(vec![1]).unwrap();
//! let problem = rdh2_core::conic::ConicProblem::new(&plant, &polytope, structure).unwrap();
//! let result = solver::solve(&problem, &solver::SolverConfig::default()).unwrap();
//! assert_eq!(result.status, solver::SolverStatus::Converged);
//! let gain = result.gain.as_ref().unwrap();
//! let report = control::verify(&plant, &polytope, gain, result.bound).unwrap();
//! assert!(report.bound_ok && report.all_stable);
//! ```

// Negated comparisons like `!(x > tol)` are deliberate throughout: they send
// NaN down the failure branch, which `x <= tol` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conic;
pub mod control;
pub mod error;
pub mod model;
pub mod numerics;
pub mod scalar;
pub mod solver;

pub use error::Error;
pub use scalar::Scalar;

/// Plant data at the default `f64` precision.
pub type Plant = model::PlantModel<f64>;
/// Interval-uncertainty description at `f64` precision.
pub type Uncertainty = model::UncertaintySpec<f64>;
/// Enumerated uncertainty polytope at `f64` precision.
pub type Polytope = model::UncertaintyPolytope<f64>;
/// Extended problem data at `f64` precision.
pub type Extended = model::ExtendedData<f64>;
/// Assembled conic program at `f64` precision.
pub type Problem = conic::ConicProblem<f64>;
/// Dual iterate at `f64` precision.
pub type Dual = conic::DualPoint<f64>;
/// Solver configuration at `f64` precision.
pub type Config = solver::SolverConfig<f64>;
/// Solver output at `f64` precision.
pub type Synthesis = solver::SynthesisResult<f64>;
/// Recovered feedback gain at `f64` precision.
pub type Gain = control::GainMatrix<f64>;
/// Verification output at `f64` precision.
pub type Report = control::VerificationReport<f64>;
