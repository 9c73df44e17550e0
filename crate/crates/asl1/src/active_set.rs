//! Active-set machinery: estimate which variables vanish at a stationary
//! point, move their ℓ1 mass onto the steepest free coordinate, and adapt
//! the estimate parameter ε when the promised decrease fails to show.

use crate::error::{Error, Result};
use crate::problem::{check_feasible, FEASIBILITY_TOL};
use crate::vecmath::{dot, norm1, sign_pos};

/// Partition of the coordinates at a feasible point x.
///
/// `active` holds the indices estimated to be zero at the nearest stationary
/// point, `nonactive` its complement, and `steepest` every maximizer of
/// |∇ᵢφ(x)|. All three lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSetPartition {
    active: Vec<usize>,
    nonactive: Vec<usize>,
    steepest: Vec<usize>,
}

impl ActiveSetPartition {
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn nonactive(&self) -> &[usize] {
        &self.nonactive
    }

    pub fn steepest(&self) -> &[usize] {
        &self.steepest
    }

    /// Trivial partition declaring every variable non-active. Used when the
    /// ε controller bottoms out and the active estimate is no longer trusted.
    pub fn all_nonactive(n: usize, g: &[f64]) -> Self {
        Self {
            active: Vec::new(),
            nonactive: (0..n).collect(),
            steepest: steepest_indices(g),
        }
    }
}

fn steepest_indices(g: &[f64]) -> Vec<usize> {
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if gmax == 0.0 {
        return Vec::new();
    }
    (0..g.len()).filter(|&i| g[i].abs() == gmax).collect()
}

/// Active/non-active estimate at a feasible point.
///
/// Index i is estimated active iff, with lo = ετ·∇φ(x)ᵀ(τeᵢ + x) and
/// hi = ετ·∇φ(x)ᵀ(τeᵢ − x), either `lo ≤ 0 ≤ xᵢ ≤ hi` or
/// `lo ≤ xᵢ ≤ 0 ≤ hi`. The steepest set collects every maximizer of |gᵢ|
/// and is empty only when g = 0.
pub fn estimate(x: &[f64], g: &[f64], tau: f64, epsilon: f64) -> Result<ActiveSetPartition> {
    if x.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: g.len(),
        });
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !check_feasible(x, tau, FEASIBILITY_TOL) {
        return Err(Error::Infeasible {
            norm: norm1(x),
            radius: tau,
        });
    }
    let gx = dot(g, x);
    let mut active = Vec::new();
    let mut nonactive = Vec::new();
    for i in 0..x.len() {
        let lo = epsilon * tau * (tau * g[i] + gx);
        let hi = epsilon * tau * (tau * g[i] - gx);
        let xi = x[i];
        let is_active =
            (lo <= 0.0 && 0.0 <= xi && xi <= hi) || (lo <= xi && xi <= 0.0 && 0.0 <= hi);
        if is_active {
            active.push(i);
        } else {
            nonactive.push(i);
        }
    }
    Ok(ActiveSetPartition {
        active,
        nonactive,
        steepest: steepest_indices(g),
    })
}

/// The descent move x̃: zero the coordinates in Â and transfer their ℓ1 mass
/// onto the steepest coordinate j against the gradient sign:
/// `x̃ⱼ = xⱼ − sign(gⱼ)·Σ_{h∈Â}|x_h|`, with sign(0) = +1.
///
/// `a_hat` defaults to the full active estimate. Ties in the steepest set
/// break to the smallest index. Always `‖x̃‖₁ ≤ ‖x‖₁`.
pub fn descent_move(
    x: &[f64],
    g: &[f64],
    partition: &ActiveSetPartition,
    a_hat: Option<&[usize]>,
) -> Result<Vec<f64>> {
    let Some(&j) = partition.steepest().first() else {
        return Err(Error::ZeroGradient);
    };
    let a_hat = a_hat.unwrap_or_else(|| partition.active());
    debug_assert!(a_hat.iter().all(|i| partition.active().contains(i)));
    let mut x_tilde = x.to_vec();
    let mut mass = 0.0;
    for &h in a_hat {
        if h == j {
            continue;
        }
        mass += x[h].abs();
        x_tilde[h] = 0.0;
    }
    x_tilde[j] = x[j] - sign_pos(g[j]) * mass;
    // Exact in real arithmetic; the slack absorbs summation round-off.
    debug_assert!(norm1(&x_tilde) <= norm1(x) * (1.0 + 1e-12) + 1e-300);
    Ok(x_tilde)
}

/// Decision of the ε controller after a descent move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonDecision {
    /// The move produced the expected decrease (or was vacuous); keep going.
    Accept,
    /// ε was shrunk; re-estimate the active set and retry the move.
    Retry,
    /// ε already sits at the floor; the caller must fall back to Â = ∅,
    /// i.e. x̃ = x.
    FloorReached,
}

/// Adaptive ε for the active-set estimate.
///
/// The theory ties ε to constants (Lipschitz L, C) that are never computed;
/// instead ε starts at a small value and shrinks geometrically whenever the
/// decrease promised by the descent move is not obtained. Monotonically
/// non-increasing during a run and never below the floor.
#[derive(Debug, Clone)]
pub struct EpsilonController {
    epsilon: f64,
    shrink_factor: f64,
    floor: f64,
}

impl EpsilonController {
    pub fn new(epsilon: f64, shrink_factor: f64, floor: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(0.0..1.0).contains(&shrink_factor) || shrink_factor == 0.0 {
            return Err(Error::InvalidParam(format!(
                "shrink factor must lie in (0,1), got {shrink_factor}"
            )));
        }
        if floor.is_nan() || floor <= 0.0 || floor > epsilon {
            return Err(Error::InvalidParam(format!(
                "floor must satisfy 0 < floor ≤ epsilon, got {floor}"
            )));
        }
        Ok(Self {
            epsilon,
            shrink_factor,
            floor,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// One geometric shrink, clamped at the floor. Returns false when ε was
    /// already at the floor and could not shrink further.
    pub fn shrink(&mut self) -> bool {
        if self.epsilon <= self.floor {
            return false;
        }
        self.epsilon = (self.epsilon * self.shrink_factor).max(self.floor);
        true
    }

    /// Accept/retry decision after evaluating the move x → x̃.
    ///
    /// A non-vacuous move must strictly decrease the objective; otherwise ε
    /// shrinks and the caller retries with a fresh estimate.
    pub fn adapt(
        &mut self,
        phi_before: f64,
        phi_after: f64,
        x: &[f64],
        x_tilde: &[f64],
    ) -> EpsilonDecision {
        if x == x_tilde {
            return EpsilonDecision::Accept;
        }
        if phi_after < phi_before {
            return EpsilonDecision::Accept;
        }
        if self.shrink() {
            EpsilonDecision::Retry
        } else {
            EpsilonDecision::FloorReached
        }
    }
}

/// Per-coordinate stationarity violation
/// `Ψᵢ(x) = max{0, −∇φ(x)ᵀ(τeᵢ − x), −∇φ(x)ᵀ(−τeᵢ − x)}`.
///
/// A feasible x is stationary iff every Ψᵢ is zero.
pub fn stationarity_violation(x: &[f64], g: &[f64], tau: f64) -> Vec<f64> {
    debug_assert_eq!(x.len(), g.len());
    let gx = dot(g, x);
    (0..x.len())
        .map(|i| {
            let plus = -(tau * g[i] - gx);
            let minus = -(-tau * g[i] - gx);
            plus.max(minus).max(0.0)
        })
        .collect()
}
