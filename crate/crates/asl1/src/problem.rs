//! Problem definition, objective oracle contract, solver results and
//! convergence traces.

use crate::error::{Error, Result};
use crate::vecmath::{all_finite, norm1};

/// Feasibility slack absorbing projection round-off: a point is accepted as
/// lying in the ball when `‖x‖₁ ≤ τ·(1 + FEASIBILITY_TOL)`.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// A coordinate counts as zero for sparsity statistics when `|xᵢ| ≤ 1e-5`.
pub const SPARSITY_TOL: f64 = 1e-5;

/// Smooth objective with value and gradient evaluation.
///
/// Implementations must be deterministic: two calls with the same `x` return
/// bitwise-equal values. Oracles are immutable once built and `Sync`, so one
/// instance can back several concurrent solver runs.
pub trait ObjectiveOracle: Sync {
    /// Expected input length n.
    fn dim(&self) -> usize;

    /// φ(x).
    fn eval(&self, x: &[f64]) -> f64;

    /// ∇φ(x).
    fn grad(&self, x: &[f64]) -> Vec<f64>;

    /// Fused value + gradient; override when the two share work.
    fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.eval(x), self.grad(x))
    }
}

impl<T: ObjectiveOracle + ?Sized> ObjectiveOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        (**self).grad(x)
    }
    fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (**self).eval_grad(x)
    }
}

impl<T: ObjectiveOracle + ?Sized> ObjectiveOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        (**self).grad(x)
    }
    fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (**self).eval_grad(x)
    }
}

/// Smooth objective paired with the ℓ1-ball radius τ.
///
/// Immutable after construction; safe to share across concurrent solver runs.
pub struct ProblemInstance<O> {
    oracle: O,
    radius: f64,
    dimension: usize,
}

impl<O: ObjectiveOracle> ProblemInstance<O> {
    /// Requires `radius > 0` and a nonempty oracle dimension.
    pub fn new(oracle: O, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        let dimension = oracle.dim();
        if dimension == 0 {
            return Err(Error::InvalidParam("dimension must be at least 1".into()));
        }
        Ok(Self {
            oracle,
            radius,
            dimension,
        })
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Checks dimension and ball membership of a candidate iterate.
    pub fn validate_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        if !check_feasible(x, self.radius, FEASIBILITY_TOL) {
            return Err(Error::Infeasible {
                norm: norm1(x),
                radius: self.radius,
            });
        }
        Ok(())
    }
}

/// True iff `‖x‖₁ ≤ τ·(1 + tol)`. `tol` must be non-negative.
pub fn check_feasible(x: &[f64], tau: f64, tol: f64) -> bool {
    debug_assert!(tol >= 0.0);
    norm1(x) <= tau * (1.0 + tol)
}

/// Maximum relative disagreement between the oracle gradient and central
/// finite differences of the oracle value, over all coordinates:
/// `max_i |gᵢ − fdᵢ| / (1 + |fdᵢ|)` with step `1e-6·(1 + |xᵢ|)`.
pub fn gradient_check<O: ObjectiveOracle>(oracle: &O, x: &[f64]) -> Result<f64> {
    if x.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: x.len(),
        });
    }
    if !all_finite(x) {
        return Err(Error::NonFinite("gradient_check input"));
    }
    let g = oracle.grad(x);
    if !all_finite(&g) {
        return Err(Error::NonFinite("oracle gradient"));
    }
    let mut worst = 0.0f64;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fplus = oracle.eval(&xp);
        xp[i] = x[i] - h;
        let fminus = oracle.eval(&xp);
        xp[i] = x[i];
        if !fplus.is_finite() || !fminus.is_finite() {
            return Err(Error::NonFinite("oracle value"));
        }
        let fd = (fplus - fminus) / (2.0 * h);
        worst = worst.max((g[i] - fd).abs() / (1.0 + fd.abs()));
    }
    Ok(worst)
}

/// Fraction of coordinates with `|xᵢ| ≤ 1e-5`.
pub fn sparsity(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().filter(|v| v.abs() <= SPARSITY_TOL).count() as f64 / x.len() as f64
}

/// Why a solver run terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    /// The active stopping rule was met: projected-gradient residual below
    /// tolerance, or the configured objective target reached. Also used when
    /// the gradient vanishes exactly.
    Converged,
    /// Iteration budget exhausted, or the solver stalled with no
    /// representable progress before meeting the tolerance.
    IterationLimit,
    /// Wall-clock budget exhausted; the last iterate is reported.
    TimeLimit,
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolverStatus::Converged => "Converged",
            SolverStatus::IterationLimit => "IterationLimit",
            SolverStatus::TimeLimit => "TimeLimit",
        };
        f.write_str(s)
    }
}

/// Final outcome of a solver run.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x: Vec<f64>,
    /// φ at the final iterate.
    pub objective: f64,
    /// `‖x − P(x − ∇φ(x))‖` at the final iterate.
    pub residual: f64,
    /// Completed iterations.
    pub iterations: usize,
    pub status: SolverStatus,
    /// Fraction of coordinates with `|xᵢ| ≤ 1e-5`.
    pub sparsity: f64,
}

/// One per-iteration record.
///
/// For the active-set solver `obj` is φ(x̃ᵏ), the post-move value feeding the
/// non-monotone line-search memory; `residual` is measured at xᵏ before the
/// move. Baselines record φ(xᵏ) and fill `n_active`/`n_nonactive` with the
/// zero/nonzero counts of the iterate and `epsilon` with 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub time_s: f64,
    pub obj: f64,
    pub residual: f64,
    pub n_active: usize,
    pub n_nonactive: usize,
    pub alpha: f64,
    pub epsilon: f64,
}

/// Per-iteration history of a run, suitable for the CSV writer.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
    /// Number of line searches that hit the backtracking cap.
    pub ls_cap_hits: usize,
}

impl ConvergenceTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, row: TraceRow) {
        if let Some(last) = self.rows.last() {
            debug_assert!(row.iter > last.iter);
            debug_assert!(row.time_s >= last.time_s);
        }
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// φ(x) = ‖x − c‖², ∇φ(x) = 2(x − c).
    pub(crate) struct ShiftedQuadratic {
        pub c: Vec<f64>,
    }

    impl ObjectiveOracle for ShiftedQuadratic {
        fn dim(&self) -> usize {
            self.c.len()
        }
        fn eval(&self, x: &[f64]) -> f64 {
            x.iter()
                .zip(&self.c)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum()
        }
        fn grad(&self, x: &[f64]) -> Vec<f64> {
            x.iter()
                .zip(&self.c)
                .map(|(xi, ci)| 2.0 * (xi - ci))
                .collect()
        }
    }

    #[test]
    fn feasible_examples() {
        assert!(check_feasible(&[0.0, 0.0], 1.0, 0.0));
        assert!(!check_feasible(&[0.6, -0.5], 1.0, 0.0)); // ‖x‖₁ = 1.1
        assert!(check_feasible(&[0.99, 0.0], 0.99, 0.0)); // boundary point
    }

    #[test]
    fn problem_rejects_bad_radius() {
        let q = ShiftedQuadratic { c: vec![0.0, 0.0] };
        assert!(ProblemInstance::new(&q, 0.0).is_err());
        assert!(ProblemInstance::new(&q, -1.0).is_err());
        assert!(ProblemInstance::new(&q, f64::NAN).is_err());
    }

    #[test]
    fn validate_point_checks_dim_and_ball() {
        let q = ShiftedQuadratic { c: vec![0.0, 0.0] };
        let p = ProblemInstance::new(&q, 1.0).unwrap();
        assert!(p.validate_point(&[0.2, 0.3]).is_ok());
        assert!(matches!(
            p.validate_point(&[0.2, 0.3, 0.4]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            p.validate_point(&[0.9, 0.9]),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn gradient_check_exact_quadratic() {
        // LASSO-style oracle with A = I₂, b = (1,1): φ(0) = 2, ∇φ(0) = (-2,-2).
        let q = ShiftedQuadratic { c: vec![1.0, 1.0] };
        let g = q.grad(&[0.0, 0.0]);
        assert_eq!(g, vec![-2.0, -2.0]);
        let err = gradient_check(&q, &[0.0, 0.0]).unwrap();
        assert!(err <= 1e-7, "err = {err}");
    }

    #[test]
    fn gradient_check_random_quadratic() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let q = ShiftedQuadratic { c };
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let err = gradient_check(&q, &x).unwrap();
            assert!(err <= 1e-5, "err = {err}");
        }
    }

    #[test]
    fn oracle_determinism_is_bitwise() {
        let q = ShiftedQuadratic {
            c: vec![0.3, -0.7, 0.1],
        };
        let x = [0.11, -0.02, 0.5];
        assert_eq!(q.eval(&x).to_bits(), q.eval(&x).to_bits());
        let (g1, g2) = (q.grad(&x), q.grad(&x));
        for (a, b) in g1.iter().zip(&g2) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn sparsity_threshold() {
        assert_eq!(sparsity(&[0.0, 1e-6, 0.5, -2.0]), 0.5);
        assert_eq!(sparsity(&[]), 0.0);
    }
}
