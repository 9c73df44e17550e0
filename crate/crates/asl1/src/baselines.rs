//! Comparison solvers: non-monotone spectral projected gradient over the
//! full ball (NM-SPG) and the away-step Frank-Wolfe method (AFW).

use std::collections::BTreeMap;
use std::time::Instant;

use crate::direction::{armijo_nonmonotone, bb_coefficient, LineSearchMemory};
use crate::error::{Error, Result};
use crate::problem::{
    check_feasible, sparsity, ConvergenceTrace, ObjectiveOracle, ProblemInstance, SolverResult,
    SolverStatus, TraceRow, FEASIBILITY_TOL, SPARSITY_TOL,
};
use crate::projection::project_l1_ball;
use crate::solver::{projected_gradient_residual, SolverConfig};
use crate::vecmath::{all_finite, dot, sign_pos};

/// Atoms with weight at or below this are dropped from the AFW support.
const WEIGHT_DROP_TOL: f64 = 1e-12;

/// Spectral projected gradient with non-monotone Armijo line search over the
/// full ℓ1-ball. Shares the line-search and safeguard constants with the
/// active-set solver for a controlled comparison.
pub fn solve_nmspg<O: ObjectiveOracle>(
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

    let mut x = x0.to_vec();
    let (mut phi, mut g) = oracle.eval_grad(&x);
    if !phi.is_finite() || !all_finite(&g) {
        return Err(Error::NonFinite("oracle output at the starting point"));
    }
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut memory = LineSearchMemory::new(config.memory_length);
    let mut trace = ConvergenceTrace::new();

    let mut iterations = 0usize;
    let status;
    let residual;
    loop {
        let res = projected_gradient_residual(&x, &g, tau)?;
        if res <= config.tolerance {
            status = SolverStatus::Converged;
            residual = res;
            break;
        }
        if let Some(target) = config.target_objective {
            if phi <= target {
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

        // Full-vector BB pair from the previous iterate.
        let m = match &prev {
            None => 1.0,
            Some((px, pg)) => {
                let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
                bb_coefficient(&s, &y, &x, &g)
            }
        };
        let step = crate::direction::spectral_step(m);
        let shifted: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
        let proj = project_l1_ball(&shifted, tau)?;
        let d: Vec<f64> = proj.iter().zip(&x).map(|(p, xi)| p - xi).collect();

        memory.push(phi);
        let phi_bar = memory.reference();
        let ls = armijo_nonmonotone(&x, &d, &g, phi_bar, config.gamma, config.delta, |p| {
            oracle.eval(p)
        });
        if ls.capped {
            trace.ls_cap_hits += 1;
        }

        let x_next: Vec<f64> = x
            .iter()
            .zip(&d)
            .map(|(xi, di)| xi + ls.alpha * di)
            .collect();

        let zeros = x.iter().filter(|v| v.abs() <= SPARSITY_TOL).count();
        trace.push(TraceRow {
            iter: iterations,
            time_s: start.elapsed().as_secs_f64(),
            obj: phi,
            residual: res,
            n_active: zeros,
            n_nonactive: n - zeros,
            alpha: ls.alpha,
            epsilon: 0.0,
        });

        prev = Some((std::mem::take(&mut x), std::mem::take(&mut g)));
        x = x_next;
        iterations += 1;
        let (phi_next, g_next) = oracle.eval_grad(&x);
        if !phi_next.is_finite() || !all_finite(&g_next) {
            return Err(Error::NonFinite("oracle output during iteration"));
        }
        phi = phi_next;
        g = g_next;
    }

    debug_assert!(check_feasible(&x, tau, FEASIBILITY_TOL));
    Ok((
        SolverResult {
            objective: phi,
            residual,
            iterations,
            status,
            sparsity: sparsity(&x),
            x,
        },
        trace,
    ))
}

/// Vertex of the ball: `sign · τ·e_index` with `negative` selecting −τ.
pub type Atom = (usize, bool);

/// Convex-combination representation of the AFW iterate over the vertices
/// `±τeᵢ`. Weights are non-negative and sum to one.
#[derive(Debug, Clone, Default)]
pub struct AtomWeights {
    weights: BTreeMap<Atom, f64>,
}

impl AtomWeights {
    /// Builds from explicit weights, validating the simplex invariants.
    pub fn new(weights: BTreeMap<Atom, f64>, dimension: usize) -> Result<Self> {
        if weights.iter().any(|(&(i, _), _)| i >= dimension) {
            return Err(Error::InvalidParam("atom index out of range".into()));
        }
        if weights.values().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParam(
                "atom weights must be non-negative".into(),
            ));
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParam(format!(
                "atom weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self { weights })
    }

    /// Represents the origin as the cancelling pair ½(+τe₁) + ½(−τe₁).
    pub fn origin_pair() -> Self {
        let mut weights = BTreeMap::new();
        weights.insert((0, false), 0.5);
        weights.insert((0, true), 0.5);
        Self { weights }
    }

    pub fn weights(&self) -> &BTreeMap<Atom, f64> {
        &self.weights
    }

    /// The represented point `Σ w·(±τ·e_i)`.
    pub fn point(&self, dimension: usize, tau: f64) -> Vec<f64> {
        let mut x = vec![0.0; dimension];
        for (&(i, neg), &w) in &self.weights {
            x[i] += if neg { -tau * w } else { tau * w };
        }
        x
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    fn weight_sum(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Removes near-zero atoms and renormalizes the sum to one.
    fn drop_and_renormalize(&mut self) {
        self.weights.retain(|_, w| *w > WEIGHT_DROP_TOL);
        let sum = self.weight_sum();
        debug_assert!(sum > 0.0);
        for w in self.weights.values_mut() {
            *w /= sum;
        }
    }
}

/// Away-step Frank-Wolfe over the 2n vertices `±τeᵢ` with a monotone Armijo
/// line search on the chosen segment.
///
/// Per iteration the linear minimization oracle picks the toward vertex
/// `s = −τ·sign(gⱼ)·eⱼ` for the steepest coordinate j; the away vertex is the
/// worst atom in the current support. The away step size is capped at
/// `w_v/(1 − w_v)` so the away weight never turns negative.
pub fn solve_afw<O: ObjectiveOracle>(
    problem: &ProblemInstance<O>,
    x0_weights: AtomWeights,
    config: &SolverConfig,
) -> Result<(SolverResult, ConvergenceTrace)> {
    config.validate()?;
    let tau = problem.radius();
    let n = problem.dimension();
    let oracle = problem.oracle();
    let start = Instant::now();

    let mut weights = AtomWeights::new(x0_weights.weights, n)?;
    let mut x = weights.point(n, tau);
    let (mut phi, mut g) = oracle.eval_grad(&x);
    if !phi.is_finite() || !all_finite(&g) {
        return Err(Error::NonFinite("oracle output at the starting point"));
    }
    let mut trace = ConvergenceTrace::new();

    let mut iterations = 0usize;
    let status;
    let residual;
    loop {
        let res = projected_gradient_residual(&x, &g, tau)?;
        if res <= config.tolerance {
            status = SolverStatus::Converged;
            residual = res;
            break;
        }
        if let Some(target) = config.target_objective {
            if phi <= target {
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

        // Linear minimization oracle over the ball: the toward vertex sits on
        // the steepest coordinate, opposite the gradient sign.
        let mut j = 0;
        for i in 1..n {
            if g[i].abs() > g[j].abs() {
                j = i;
            }
        }
        let toward: Atom = (j, sign_pos(g[j]) > 0.0);
        let g_toward = -tau * g[j].abs();
        let gx = dot(&g, &x);
        let gap_toward = gx - g_toward;
        debug_assert!(gap_toward >= -1e-12);

        // Away vertex: support atom with the largest gᵀv.
        let (&away, &w_away) = weights
            .weights()
            .iter()
            .max_by(|a, b| {
                let ga = atom_grad(&g, tau, *a.0);
                let gb = atom_grad(&g, tau, *b.0);
                ga.partial_cmp(&gb).unwrap()
            })
            .expect("support is never empty");
        let gap_away = atom_grad(&g, tau, away) - gx;

        let toward_step = gap_toward >= gap_away;
        let (d, alpha_max): (Vec<f64>, f64) = if toward_step {
            let mut d: Vec<f64> = x.iter().map(|xi| -xi).collect();
            d[j] += if toward.1 { -tau } else { tau };
            (d, 1.0)
        } else {
            let mut d = x.clone();
            let (ai, aneg) = away;
            d[ai] -= if aneg { -tau } else { tau };
            let cap = if w_away < 1.0 {
                w_away / (1.0 - w_away)
            } else {
                1.0
            };
            (d, cap)
        };

        let gd = dot(&g, &d);
        if gd >= 0.0 {
            // Stationary over the atom set; the residual check above decides
            // whether the tolerance was actually met.
            status = if res <= config.tolerance {
                SolverStatus::Converged
            } else {
                SolverStatus::IterationLimit
            };
            residual = res;
            break;
        }

        // Monotone Armijo backtracking from α_max on the chosen segment.
        let mut alpha = alpha_max;
        let mut accepted = None;
        for _ in 0..=crate::direction::BACKTRACK_CAP {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let phi_trial = oracle.eval(&trial);
            if phi_trial.is_finite() && phi_trial <= phi + config.gamma * alpha * gd {
                accepted = Some(alpha);
                break;
            }
            alpha *= config.delta;
        }
        let Some(alpha) = accepted else {
            trace.ls_cap_hits += 1;
            status = if res <= config.tolerance {
                SolverStatus::Converged
            } else {
                SolverStatus::IterationLimit
            };
            residual = res;
            break;
        };

        // Weight update: toward steps shrink everything toward the new atom,
        // away steps inflate and subtract from the away atom.
        if toward_step {
            for w in weights.weights.values_mut() {
                *w *= 1.0 - alpha;
            }
            *weights.weights.entry(toward).or_insert(0.0) += alpha;
        } else {
            for w in weights.weights.values_mut() {
                *w *= 1.0 + alpha;
            }
            let w = weights
                .weights
                .get_mut(&away)
                .expect("away atom in support");
            *w -= alpha;
            if *w < 0.0 {
                debug_assert!(*w > -1e-12);
                *w = 0.0;
            }
        }
        weights.drop_and_renormalize();
        let x_next = weights.point(n, tau);

        let zeros = x.iter().filter(|v| v.abs() <= SPARSITY_TOL).count();
        trace.push(TraceRow {
            iter: iterations,
            time_s: start.elapsed().as_secs_f64(),
            obj: phi,
            residual: res,
            n_active: zeros,
            n_nonactive: n - zeros,
            alpha,
            epsilon: 0.0,
        });

        if x_next == x {
            // Stalled in floating point; stop honestly.
            status = if res <= config.tolerance {
                SolverStatus::Converged
            } else {
                SolverStatus::IterationLimit
            };
            residual = res;
            iterations += 1;
            break;
        }

        x = x_next;
        iterations += 1;
        let (phi_next, g_next) = oracle.eval_grad(&x);
        if !phi_next.is_finite() || !all_finite(&g_next) {
            return Err(Error::NonFinite("oracle output during iteration"));
        }
        phi = phi_next;
        g = g_next;

        debug_assert!((weights.weight_sum() - 1.0).abs() <= 1e-10);
        debug_assert!(check_feasible(&x, tau, FEASIBILITY_TOL));
    }

    Ok((
        SolverResult {
            objective: phi,
            residual,
            iterations,
            status,
            sparsity: sparsity(&x),
            x,
        },
        trace,
    ))
}

fn atom_grad(g: &[f64], tau: f64, atom: Atom) -> f64 {
    let (i, neg) = atom;
    if neg {
        -tau * g[i]
    } else {
        tau * g[i]
    }
}
