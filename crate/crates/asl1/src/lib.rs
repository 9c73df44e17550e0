//! Minimization of smooth functions over the ℓ1-ball.
//!
//! The main solver combines an active-set estimate (which variables will be
//! zero at a stationary point), a mass-transfer descent move onto the
//! steepest coordinate, a spectral projected-gradient direction on the
//! non-active manifold, and a non-monotone Armijo line search. Two baseline
//! first-order methods (NM-SPG and away-step Frank-Wolfe) and a benchmark
//! harness over LASSO and ℓ1-constrained logistic regression round out the
//! crate.

pub mod active_set;
pub mod baselines;
pub mod data_io;
pub mod direction;
mod error;
pub mod objectives;
pub mod problem;
pub mod projection;
pub mod solver;
pub mod vecmath;

pub use active_set::{
    descent_move, estimate, stationarity_violation, ActiveSetPartition, EpsilonController,
    EpsilonDecision,
};
pub use baselines::{solve_afw, solve_nmspg, Atom, AtomWeights};
pub use direction::{
    armijo_nonmonotone, bb_coefficient, direction, spectral_step, BBState, LineSearchMemory,
    LineSearchOutcome, M_HIGH, M_LOW,
};
pub use error::{Error, Result};
pub use objectives::{LassoProblem, LogisticProblem, SparseMatrix};
pub use problem::{
    check_feasible, gradient_check, sparsity, ConvergenceTrace, ObjectiveOracle, ProblemInstance,
    SolverResult, SolverStatus, TraceRow, FEASIBILITY_TOL, SPARSITY_TOL,
};
pub use projection::{
    project_l1_ball, project_l1_ball_scan, project_restricted, project_simplex, RestrictedManifold,
};
pub use solver::{projected_gradient_residual, solve, SolverConfig, SolverState};
