//! Null controls for a 1D heat equation coupled to an ODE through its left
//! boundary and an interior potential.
//!
//! The crate computes penalized HUM controls: a conjugate-gradient solve of
//! the Gramian equation on a weighted state space, with the distributed
//! control converted into a Neumann boundary control by domain extension.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod extension;
pub mod grid;
pub mod hilbert;
pub mod hum;
pub mod linalg;
pub mod parallel;
pub mod problem;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{ControlRegion, Coupling, SpaceTimeGrid};
pub use hilbert::{control_l2_norm, h_norm, inner_product, HState, SpaceTimeField, StateSpace};
pub use hum::{
    duality_residual, evaluate_f, evaluate_j, gramian_apply, hum_cg, observability_ratio,
    ControlNorms, HumConfig, HumProblem, HumResult,
};
pub use parallel::Execution;
pub use problem::ProblemData;
pub use solver::{
    solve_adjoint, solve_forward, uncontrolled_final, AdjointMode, AdjointSolution, RightBoundary,
    SolverConfig, Trajectory,
};
