//! Spectral (Barzilai-Borwein) projected-gradient direction on the
//! non-active manifold and the non-monotone Armijo line search.

use std::collections::VecDeque;

use crate::error::Result;
use crate::projection::{project_restricted, RestrictedManifold};
use crate::vecmath::{dot, norm2};

/// Safeguard bounds for the spectral coefficient.
pub const M_LOW: f64 = 1e-10;
pub const M_HIGH: f64 = 1e10;

/// Backtracking is abandoned after this many step reductions.
pub const BACKTRACK_CAP: usize = 60;

/// Safeguarded spectral coefficient from a secant pair restricted to the
/// non-active coordinates.
///
/// With mₐ = sᵀy/‖s‖² and m_b = ‖y‖²/sᵀy:
/// * 0 < mₐ < m̄  →  max(m̲, mₐ)
/// * mₐ ≥ m̄      →  max(m̲, min(m̄, m_b))
/// * mₐ ≤ 0       →  max(m̲, min(1, ‖g_N‖/‖x̃_N‖))
///
/// `‖s‖ = 0` falls into the last branch, and a zero `x̃_N` there yields 1.
///
/// For quadratics mₐ is the secant Rayleigh quotient, a curvature; the step
/// size that scales the gradient in the search direction is its safeguarded
/// inverse, see [`spectral_step`].
pub fn bb_coefficient(s: &[f64], y: &[f64], x_n: &[f64], g_n: &[f64]) -> f64 {
    let ss = dot(s, s);
    let sy = dot(s, y);
    let m_a = if ss > 0.0 { sy / ss } else { 0.0 };
    if m_a > 0.0 && m_a < M_HIGH {
        m_a.max(M_LOW)
    } else if m_a >= M_HIGH {
        let m_b = dot(y, y) / sy;
        m_b.clamp(M_LOW, M_HIGH)
    } else {
        let xn = norm2(x_n);
        if xn == 0.0 {
            1.0
        } else {
            (norm2(g_n) / xn).clamp(M_LOW, 1.0)
        }
    }
}

/// Gradient multiplier for the projected step: the safeguarded inverse of
/// the curvature estimate, so well-conditioned secants recover the classic
/// spectral step ‖s‖²/sᵀy.
pub fn spectral_step(m: f64) -> f64 {
    (1.0 / m).clamp(M_LOW, M_HIGH)
}

/// Secant bookkeeping across iterations.
///
/// The pair (s, y) compares the current and previous post-move iterates and
/// gradients on the coordinates both iterations agree are non-active; when
/// that intersection is empty the coefficient resets to 1. The first
/// iteration returns 1.
#[derive(Debug, Clone, Default)]
pub struct BBState {
    prev: Option<PrevIterate>,
    m: f64,
}

#[derive(Debug, Clone)]
struct PrevIterate {
    nonactive: Vec<usize>,
    x_n: Vec<f64>,
    g_n: Vec<f64>,
}

impl BBState {
    pub fn new() -> Self {
        Self { prev: None, m: 1.0 }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Computes mᵏ for the current iterate and stores the restricted copies
    /// for the next call. `nonactive` must be sorted ascending.
    pub fn update(&mut self, x_tilde: &[f64], g_tilde: &[f64], nonactive: &[usize]) -> f64 {
        let x_n: Vec<f64> = nonactive.iter().map(|&i| x_tilde[i]).collect();
        let g_n: Vec<f64> = nonactive.iter().map(|&i| g_tilde[i]).collect();
        let m = match &self.prev {
            None => 1.0,
            Some(prev) => {
                let mut s = Vec::new();
                let mut y = Vec::new();
                let (mut a, mut b) = (0, 0);
                while a < nonactive.len() && b < prev.nonactive.len() {
                    match nonactive[a].cmp(&prev.nonactive[b]) {
                        std::cmp::Ordering::Less => a += 1,
                        std::cmp::Ordering::Greater => b += 1,
                        std::cmp::Ordering::Equal => {
                            s.push(x_n[a] - prev.x_n[b]);
                            y.push(g_n[a] - prev.g_n[b]);
                            a += 1;
                            b += 1;
                        }
                    }
                }
                if s.is_empty() {
                    1.0
                } else {
                    bb_coefficient(&s, &y, &x_n, &g_n)
                }
            }
        };
        self.prev = Some(PrevIterate {
            nonactive: nonactive.to_vec(),
            x_n,
            g_n,
        });
        self.m = m;
        m
    }
}

/// Projected spectral-gradient direction on the manifold 𝓑_N:
/// `d = P(x̃ − m·∇φ(x̃))_{𝓑_N} − x̃`, zero on the active coordinates.
///
/// Requires x̃ feasible with x̃ᵢ = 0 outside N, which yields the descent
/// bound `gᵀd ≤ −(1/m)‖d‖²`.
pub fn direction(
    x_tilde: &[f64],
    g_tilde: &[f64],
    nonactive: &[usize],
    m: f64,
    tau: f64,
) -> Result<Vec<f64>> {
    debug_assert!((M_LOW..=M_HIGH).contains(&m));
    let n = x_tilde.len();
    let manifold = RestrictedManifold::new(tau, nonactive.to_vec(), n)?;
    let shifted: Vec<f64> = x_tilde
        .iter()
        .zip(g_tilde)
        .map(|(xi, gi)| xi - m * gi)
        .collect();
    let x_hat = project_restricted(&shifted, &manifold)?;
    Ok(x_hat
        .iter()
        .zip(x_tilde)
        .map(|(hat, xt)| hat - xt)
        .collect())
}

/// Ring buffer of the most recent `n_m + 1` post-move objective values; the
/// line-search reference value is their maximum.
#[derive(Debug, Clone)]
pub struct LineSearchMemory {
    buf: VecDeque<f64>,
    n_m: usize,
}

impl LineSearchMemory {
    pub fn new(n_m: usize) -> Self {
        Self {
            buf: VecDeque::with_capacity(n_m + 1),
            n_m,
        }
    }

    pub fn push(&mut self, phi: f64) {
        if self.buf.len() == self.n_m + 1 {
            self.buf.pop_front();
        }
        self.buf.push_back(phi);
    }

    /// φ̄ᵏ = max of the buffer. Panics if nothing has been pushed.
    pub fn reference(&self) -> f64 {
        self.buf.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}

/// Step size and cap flag returned by the line search.
#[derive(Debug, Clone, Copy)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    /// True when backtracking hit the cap and the best trial was taken.
    pub capped: bool,
}

/// Non-monotone Armijo backtracking.
///
/// Returns α = 0 when gᵀd ≥ 0. Otherwise tries α = 1, δ, δ², … until
/// `φ(x̃ + α·d) ≤ φ̄ + γ·α·gᵀd`, where φ̄ is the non-monotone reference
/// value. Non-finite trial values count as failures. After
/// [`BACKTRACK_CAP`] reductions the finite trial with the best objective is
/// taken (α = 0 if none was finite) and the outcome is flagged.
pub fn armijo_nonmonotone<F: FnMut(&[f64]) -> f64>(
    x_tilde: &[f64],
    d: &[f64],
    g_tilde: &[f64],
    phi_ref: f64,
    gamma: f64,
    delta: f64,
    mut eval: F,
) -> LineSearchOutcome {
    let gd = dot(g_tilde, d);
    if gd >= 0.0 {
        return LineSearchOutcome {
            alpha: 0.0,
            capped: false,
        };
    }
    let mut alpha = 1.0;
    let mut best: Option<(f64, f64)> = None; // (phi, alpha)
    let mut trial = vec![0.0; x_tilde.len()];
    for _ in 0..=BACKTRACK_CAP {
        for (t, (xi, di)) in trial.iter_mut().zip(x_tilde.iter().zip(d)) {
            *t = xi + alpha * di;
        }
        let phi = eval(&trial);
        if phi.is_finite() {
            if phi <= phi_ref + gamma * alpha * gd {
                return LineSearchOutcome {
                    alpha,
                    capped: false,
                };
            }
            if best.is_none_or(|(bp, _)| phi < bp) {
                best = Some((phi, alpha));
            }
        }
        alpha *= delta;
    }
    LineSearchOutcome {
        alpha: best.map_or(0.0, |(_, a)| a),
        capped: true,
    }
}
