//! The active-set non-monotone projected-gradient main loop.

use std::time::Instant;

use crate::active_set::{
    descent_move, estimate, stationarity_violation, ActiveSetPartition, EpsilonController,
    EpsilonDecision,
};
use crate::direction::{armijo_nonmonotone, direction, BBState, LineSearchMemory};
use crate::error::{Error, Result};
use crate::problem::{
    check_feasible, sparsity, ConvergenceTrace, ObjectiveOracle, ProblemInstance, SolverResult,
    SolverStatus, TraceRow, FEASIBILITY_TOL,
};
use crate::projection::project_l1_ball;
use crate::vecmath::{all_finite, dist2, norm_inf};

/// Tunables shared by all solvers in this crate.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Stop when `‖x − P(x − ∇φ(x))‖` falls below this value.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Wall-clock budget in seconds for the optimization loop.
    pub time_limit: f64,
    /// Non-monotone memory length n_m.
    pub memory_length: usize,
    /// Armijo sufficient-decrease constant γ ∈ (0,1).
    pub gamma: f64,
    /// Backtracking factor δ ∈ (0,1).
    pub delta: f64,
    /// Initial ε for the active-set estimate.
    pub epsilon0: f64,
    /// Geometric shrink applied to ε when the expected decrease fails.
    pub shrink_factor: f64,
    /// Lower bound for ε.
    pub epsilon_floor: f64,
    /// Comparison-harness stop: terminate as converged once φ(x) falls to or
    /// below this value. When set, this rule (not the residual) defines the
    /// `Converged` status.
    pub target_objective: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 100_000,
            time_limit: 3600.0,
            memory_length: 10,
            gamma: 1e-4,
            delta: 0.5,
            epsilon0: 1e-6,
            shrink_factor: 0.1,
            epsilon_floor: 1e-16,
            target_objective: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParam("tolerance must be positive".into()));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 || self.gamma >= 1.0 {
            return Err(Error::InvalidParam("gamma must lie in (0,1)".into()));
        }
        if self.delta.is_nan() || self.delta <= 0.0 || self.delta >= 1.0 {
            return Err(Error::InvalidParam("delta must lie in (0,1)".into()));
        }
        if self.time_limit.is_nan() || self.time_limit <= 0.0 {
            return Err(Error::InvalidParam("time limit must be positive".into()));
        }
        EpsilonController::new(self.epsilon0, self.shrink_factor, self.epsilon_floor)?;
        Ok(())
    }
}

/// Mutable per-run state of the active-set solver. Owned by a single
/// [`solve`] call.
pub struct SolverState {
    pub x: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub partition: ActiveSetPartition,
    pub bb: BBState,
    pub memory: LineSearchMemory,
    pub epsilon: EpsilonController,
    pub trace: ConvergenceTrace,
}

/// Residual `‖x − P(x − g)‖` of the full-ball projected-gradient step.
pub fn projected_gradient_residual(x: &[f64], g: &[f64], tau: f64) -> Result<f64> {
    let shifted: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - gi).collect();
    let p = project_l1_ball(&shifted, tau)?;
    Ok(dist2(x, &p))
}

/// Runs the active-set solver from a feasible starting point.
///
/// Each iteration estimates the active set, applies the mass-transfer descent
/// move under ε adaptation, takes a spectral projected-gradient step on the
/// non-active manifold, and accepts it through the non-monotone Armijo
/// search. Stops on the projected-gradient residual, the optional objective
/// target, or the iteration/time budgets.
pub fn solve<O: ObjectiveOracle>(
    problem: &ProblemInstance<O>,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<(SolverResult, ConvergenceTrace)> {
    config.validate()?;
    problem.validate_point(x0)?;
    let tau = problem.radius();
    let n = problem.dimension();
    let oracle = problem.oracle();
    let start = Instant::now();

    let mut state = SolverState {
        x: x0.to_vec(),
        x_tilde: x0.to_vec(),
        partition: ActiveSetPartition::all_nonactive(n, &vec![0.0; n]),
        bb: BBState::new(),
        memory: LineSearchMemory::new(config.memory_length),
        epsilon: EpsilonController::new(
            config.epsilon0,
            config.shrink_factor,
            config.epsilon_floor,
        )?,
        trace: ConvergenceTrace::new(),
    };

    let (mut phi_x, mut g) = oracle.eval_grad(&state.x);
    if !phi_x.is_finite() || !all_finite(&g) {
        return Err(Error::NonFinite("oracle output at the starting point"));
    }

    let mut iterations = 0usize;
    let status;
    let residual;
    loop {
        let res = projected_gradient_residual(&state.x, &g, tau)?;
        if res <= config.tolerance {
            status = SolverStatus::Converged;
            residual = res;
            break;
        }
        if let Some(target) = config.target_objective {
            if phi_x <= target {
                status = SolverStatus::Converged;
                residual = res;
                break;
            }
        }
        if iterations >= config.max_iterations {
            status = SolverStatus::IterationLimit;
            residual = res;
            break;
        }
        if start.elapsed().as_secs_f64() >= config.time_limit {
            status = SolverStatus::TimeLimit;
            residual = res;
            break;
        }
        if norm_inf(&g) == 0.0 {
            // Unconstrained-stationary point is constrained-stationary.
            status = SolverStatus::Converged;
            residual = res;
            break;
        }

        // Descent move with ε adaptation: retry with a smaller ε whenever a
        // non-vacuous move fails to decrease the objective.
        let phi_tilde;
        loop {
            state.partition = estimate(&state.x, &g, tau, state.epsilon.epsilon())?;
            state.x_tilde = descent_move(&state.x, &g, &state.partition, None)?;
            if state.x_tilde == state.x {
                phi_tilde = phi_x;
                break;
            }
            let cand = oracle.eval(&state.x_tilde);
            match state.epsilon.adapt(phi_x, cand, &state.x, &state.x_tilde) {
                EpsilonDecision::Accept => {
                    phi_tilde = cand;
                    break;
                }
                EpsilonDecision::Retry => continue,
                EpsilonDecision::FloorReached => {
                    state.partition = ActiveSetPartition::all_nonactive(n, &g);
                    state.x_tilde = state.x.clone();
                    phi_tilde = phi_x;
                    break;
                }
            }
        }
        debug_assert!(check_feasible(&state.x_tilde, tau, FEASIBILITY_TOL));
        debug_assert!(phi_tilde <= phi_x);

        let moved = state.x_tilde != state.x;
        let g_tilde = if moved {
            let gt = oracle.grad(&state.x_tilde);
            if !all_finite(&gt) {
                return Err(Error::NonFinite("oracle gradient at the moved point"));
            }
            gt
        } else {
            g.clone()
        };

        let m = state
            .bb
            .update(&state.x_tilde, &g_tilde, state.partition.nonactive());
        let step = crate::direction::spectral_step(m);
        let d = direction(
            &state.x_tilde,
            &g_tilde,
            state.partition.nonactive(),
            step,
            tau,
        )?;

        state.memory.push(phi_tilde);
        let phi_bar = state.memory.reference();
        let ls = armijo_nonmonotone(
            &state.x_tilde,
            &d,
            &g_tilde,
            phi_bar,
            config.gamma,
            config.delta,
            |p| oracle.eval(p),
        );
        if ls.capped {
            state.trace.ls_cap_hits += 1;
        }

        let x_next: Vec<f64> = state
            .x_tilde
            .iter()
            .zip(&d)
            .map(|(xt, di)| xt + ls.alpha * di)
            .collect();

        state.trace.push(TraceRow {
            iter: iterations,
            time_s: start.elapsed().as_secs_f64(),
            obj: phi_tilde,
            residual: res,
            n_active: state.partition.active().len(),
            n_nonactive: state.partition.nonactive().len(),
            alpha: ls.alpha,
            epsilon: state.epsilon.epsilon(),
        });

        // No representable progress: shrink ε so the next estimate can
        // change; the residual test above decides termination.
        if !moved && x_next == state.x {
            state.epsilon.shrink();
        }

        state.x = x_next;
        iterations += 1;
        let (phi_next, g_next) = oracle.eval_grad(&state.x);
        if !phi_next.is_finite() || !all_finite(&g_next) {
            return Err(Error::NonFinite("oracle output during iteration"));
        }
        phi_x = phi_next;
        g = g_next;
    }

    debug_assert!(check_feasible(&state.x, tau, FEASIBILITY_TOL));
    Ok((
        SolverResult {
            objective: phi_x,
            residual,
            iterations,
            status,
            sparsity: sparsity(&state.x),
            x: state.x,
        },
        state.trace,
    ))
}

/// Consistency cross-check between the two stationarity measures: at a point
/// accepted by the residual test, the worst violation Ψᵢ should be small
/// relative to the gradient scale.
pub fn stationarity_cross_check(x: &[f64], g: &[f64], tau: f64, tolerance: f64) -> bool {
    let psi = stationarity_violation(x, g, tau);
    let worst = psi.iter().fold(0.0f64, |m, v| m.max(*v));
    worst <= 10.0 * tolerance * (1.0 + crate::vecmath::norm2(g))
}
