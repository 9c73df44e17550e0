//! Least-squares and logistic-regression objective oracles over
//! compressed-row sparse data.

use crate::error::{Error, Result};
use crate::problem::ObjectiveOracle;

#[cfg(debug_assertions)]
use std::sync::atomic::{AtomicU64, Ordering};

/// Row-compressed sparse matrix (CSR).
///
/// Column indices are strictly increasing within each row; row offsets are
/// non-decreasing with `offsets[rows] = nnz`.
#[derive(Debug)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    /// Nonzero visits across all sweeps, for asserting oracle cost in tests.
    #[cfg(debug_assertions)]
    visits: AtomicU64,
}

impl Clone for SparseMatrix {
    fn clone(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.clone(),
            #[cfg(debug_assertions)]
            visits: AtomicU64::new(0),
        }
    }
}

impl SparseMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != rows + 1 {
            return Err(Error::InvalidParam(format!(
                "row_offsets length {} does not match rows {}",
                row_offsets.len(),
                rows
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::InvalidParam(
                "row offsets must span the value array".into(),
            ));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidParam(
                "col_indices and values length differ".into(),
            ));
        }
        for r in 0..rows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::InvalidParam(
                    "row offsets must be non-decreasing".into(),
                ));
            }
            let row = &col_indices[lo..hi];
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidParam(format!(
                        "column indices not strictly increasing in row {r}"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last >= cols {
                    return Err(Error::InvalidParam(format!(
                        "column index {last} out of range in row {r}"
                    )));
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
            #[cfg(debug_assertions)]
            visits: AtomicU64::new(0),
        })
    }

    /// Builds CSR storage from dense rows, keeping every nonzero entry.
    pub fn from_dense_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            offsets.push(values.len());
        }
        Self::new(rows.len(), cols, offsets, indices, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    #[cfg(debug_assertions)]
    fn record_sweep(&self) {
        self.visits.fetch_add(self.nnz() as u64, Ordering::Relaxed);
    }

    #[cfg(not(debug_assertions))]
    fn record_sweep(&self) {}

    /// Total nonzero visits recorded so far (debug builds).
    #[cfg(debug_assertions)]
    pub fn nonzero_visits(&self) -> u64 {
        self.visits.load(Ordering::Relaxed)
    }

    /// y = A·x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.record_sweep();
        (0..self.rows)
            .map(|r| {
                let (idx, vals) = self.row(r);
                idx.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    /// y = Aᵀ·r, accumulated row by row.
    pub fn mul_transpose_vec(&self, r: &[f64]) -> Vec<f64> {
        debug_assert_eq!(r.len(), self.rows);
        self.record_sweep();
        let mut out = vec![0.0; self.cols];
        for (i, &ri) in r.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                out[j] += v * ri;
            }
        }
        out
    }
}

/// φ(x) = ‖Ax − b‖² with ∇φ(x) = 2Aᵀ(Ax − b).
///
/// The unscaled square (no ½ factor) keeps objective magnitudes aligned with
/// the reported benchmark convention.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    a: SparseMatrix,
    b: Vec<f64>,
}

impl LassoProblem {
    pub fn new(a: SparseMatrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: b.len(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    fn residual_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.a.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        r
    }
}

impl ObjectiveOracle for LassoProblem {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        self.residual_vec(x).iter().map(|r| r * r).sum()
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.eval_grad(x).1
    }

    fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        // r = Ax − b is computed once and shared by value and gradient.
        let r = self.residual_vec(x);
        let phi = r.iter().map(|v| v * v).sum();
        let mut g = self.a.mul_transpose_vec(&r);
        for gi in g.iter_mut() {
            *gi *= 2.0;
        }
        (phi, g)
    }
}

/// φ(x) = Σᵢ log(1 + exp(−yᵢ·xᵀaᵢ)) with labels yᵢ ∈ {−1, +1}.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    a: SparseMatrix,
    labels: Vec<f64>,
}

impl LogisticProblem {
    pub fn new(a: SparseMatrix, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: labels.len(),
            });
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidParam("labels must be +1 or -1".into()));
        }
        Ok(Self { a, labels })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn samples(&self) -> usize {
        self.a.rows()
    }
}

/// log(1 + exp(−t)) without overflow for large |t|.
fn log1p_exp_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// σ(−t) = 1 / (1 + exp(t)), stable on both tails.
fn sigma_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

impl ObjectiveOracle for LogisticProblem {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        self.a.record_sweep();
        (0..self.samples())
            .map(|i| {
                let (idx, vals) = self.a.row(i);
                let margin: f64 = idx.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
                log1p_exp_neg(self.labels[i] * margin)
            })
            .sum()
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.eval_grad(x).1
    }

    fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        let l = self.samples();
        // Pass 1: margins tᵢ = yᵢ·xᵀaᵢ and the objective.
        self.a.record_sweep();
        let mut coeff = vec![0.0; l];
        let mut phi = 0.0;
        for (i, c) in coeff.iter_mut().enumerate() {
            let (idx, vals) = self.a.row(i);
            let margin: f64 = idx.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
            let t = self.labels[i] * margin;
            phi += log1p_exp_neg(t);
            *c = -self.labels[i] * sigma_neg(t);
        }
        // Pass 2: ∇φ = Σᵢ coeffᵢ·aᵢ.
        self.a.record_sweep();
        let mut g = vec![0.0; self.dim()];
        for (i, &c) in coeff.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (idx, vals) = self.a.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                g[j] += c * v;
            }
        }
        (phi, g)
    }
}
