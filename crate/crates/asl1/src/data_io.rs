//! Instance ingestion (LIBSVM text format, synthetic generators) and
//! trace/result output.
//!
//! All generators draw from a seeded ChaCha8 stream so instances are
//! bit-reproducible across platforms.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::objectives::{LassoProblem, LogisticProblem, SparseMatrix};
use crate::problem::{ConvergenceTrace, TraceRow};
use crate::vecmath::norm1;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a binary-classification dataset in LIBSVM text format:
/// `label idx:val idx:val …` with 1-based feature indices.
///
/// Labels are remapped onto {−1, +1}: files already using {−1, +1} pass
/// through, {0, 1} maps 0 → −1, and {1, 2} maps 2 → −1. Mixing conventions
/// in one file is rejected. Blank lines are skipped and `#` starts a
/// comment. The feature count is the largest index seen unless
/// `n_override` widens it.
pub fn read_libsvm(path: &Path, n_override: Option<usize>) -> Result<LogisticProblem> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);

    let mut raw_labels: Vec<f64> = Vec::new();
    let mut row_entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg: format!("cannot parse label '{label_tok}'"),
        })?;
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("malformed feature token '{tok}'"),
            })?;
            let idx: usize = idx_str.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("bad feature index '{idx_str}'"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: "feature indices are 1-based".into(),
                });
            }
            let val: f64 = val_str.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("bad feature value '{val_str}'"),
            })?;
            if let Some(&(last, _)) = entries.last() {
                if idx <= last {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno,
                        msg: format!(
                            "feature indices must be strictly increasing, got {idx} after {last}"
                        ),
                    });
                }
            }
            max_index = max_index.max(idx);
            entries.push((idx, val));
        }
        raw_labels.push(label);
        row_entries.push(entries);
    }

    let labels = remap_labels(path, &raw_labels)?;
    let n = match n_override {
        Some(n) if n >= max_index => n,
        Some(n) => {
            return Err(Error::InvalidParam(format!(
                "dimension override {n} is below the largest feature index {max_index}"
            )))
        }
        None => max_index,
    };

    let mut offsets = Vec::with_capacity(row_entries.len() + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    offsets.push(0);
    for entries in &row_entries {
        for &(idx, val) in entries {
            indices.push(idx - 1);
            values.push(val);
        }
        offsets.push(values.len());
    }
    let a = SparseMatrix::new(row_entries.len(), n, offsets, indices, values)?;
    LogisticProblem::new(a, labels)
}

/// Maps a file's raw label set onto {−1, +1} by convention; mixed or unknown
/// conventions are an error.
fn remap_labels(path: &Path, raw: &[f64]) -> Result<Vec<f64>> {
    let in_set = |allowed: &[f64]| raw.iter().all(|l| allowed.contains(l));
    if in_set(&[-1.0, 1.0]) {
        Ok(raw.to_vec())
    } else if in_set(&[0.0, 1.0]) {
        Ok(raw
            .iter()
            .map(|&l| if l == 0.0 { -1.0 } else { 1.0 })
            .collect())
    } else if in_set(&[1.0, 2.0]) {
        Ok(raw
            .iter()
            .map(|&l| if l == 2.0 { -1.0 } else { 1.0 })
            .collect())
    } else {
        Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "labels do not follow a single {-1,+1}, {0,1} or {1,2} convention".into(),
        })
    }
}

/// Writes a dataset in LIBSVM text format (labels ±1, 1-based indices).
pub fn write_libsvm(problem: &LogisticProblem, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..problem.samples() {
        let label = problem.labels()[i];
        let mut line = if label > 0.0 {
            String::from("+1")
        } else {
            String::from("-1")
        };
        let (idx, vals) = problem.matrix().row(i);
        for (&j, &v) in idx.iter().zip(vals) {
            line.push_str(&format!(" {}:{}", j + 1, format_f64(v)));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Synthetic least-squares instance: `A ∈ R^{m×n}` uniform on (0,1) with
/// m = n/2, a ±1-sparse planted solution with round(0.05·m) nonzeros,
/// `b = A·x* + 0.001·v` with standard-normal noise, and radius
/// `τ = 0.99·‖x*‖₁`.
///
/// Returns the problem, the planted x*, and τ. Deterministic under the seed.
pub fn generate_lasso(n: usize, seed: u64) -> Result<(LassoProblem, Vec<f64>, f64)> {
    if n < 20 {
        return Err(Error::InvalidParam(format!(
            "instance size must be at least 20, got {n}"
        )));
    }
    let m = n / 2;
    let k = (0.05 * m as f64).round() as usize;
    if k < 1 {
        return Err(Error::InvalidParam(format!(
            "instance too small: round(0.05·{m}) nonzeros is zero"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Draw order is part of the format: A row-major, then support positions,
    // then signs, then noise.
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let positions = rand::seq::index::sample(&mut rng, n, k);
    let mut xstar = vec![0.0; n];
    for pos in positions.iter() {
        xstar[pos] = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    }
    let a = SparseMatrix::from_dense_rows(&rows, n)?;
    let mut b = a.mul_vec(&xstar);
    for bi in b.iter_mut() {
        let noise: f64 = rng.sample(StandardNormal);
        *bi += 0.001 * noise;
    }
    let tau = 0.99 * norm1(&xstar);
    Ok((LassoProblem::new(a, b)?, xstar, tau))
}

/// Synthetic sparse logistic-regression instance: `l` samples over `n`
/// features with ~10% density and entries uniform on (−1,1); labels are the
/// signs of margins against a ±1-sparse planted weight vector plus noise.
///
/// Deterministic under the seed.
pub fn generate_logistic(l: usize, n: usize, seed: u64) -> Result<LogisticProblem> {
    if l == 0 || n == 0 {
        return Err(Error::InvalidParam("instance must be non-empty".into()));
    }
    let k = ((0.05 * n as f64).round() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut offsets = Vec::with_capacity(l + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    offsets.push(0);
    for _ in 0..l {
        for j in 0..n {
            if rng.gen::<f64>() < 0.1 {
                indices.push(j);
                values.push(rng.gen_range(-1.0..1.0));
            }
        }
        offsets.push(values.len());
    }
    let a = SparseMatrix::new(l, n, offsets, indices, values)?;

    let positions = rand::seq::index::sample(&mut rng, n, k);
    let mut wstar = vec![0.0; n];
    for pos in positions.iter() {
        wstar[pos] = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    }
    let margins = a.mul_vec(&wstar);
    let labels: Vec<f64> = margins
        .iter()
        .map(|&t| {
            let noise: f64 = rng.sample(StandardNormal);
            if t + 0.1 * noise < 0.0 {
                -1.0
            } else {
                1.0
            }
        })
        .collect();
    LogisticProblem::new(a, labels)
}

/// Renders with 17 significant digits so the value round-trips bit-exactly.
fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a convergence trace as CSV with the fixed header
/// `iter,time_s,obj,residual,n_active,n_nonactive,alpha,epsilon`.
pub fn write_trace(trace: &ConvergenceTrace, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "iter,time_s,obj,residual,n_active,n_nonactive,alpha,epsilon"
    )
    .map_err(|e| io_err(path, e))?;
    for row in &trace.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.iter,
            format_f64(row.time_s),
            format_f64(row.obj),
            format_f64(row.residual),
            row.n_active,
            row.n_nonactive,
            format_f64(row.alpha),
            format_f64(row.epsilon),
        )
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a CSV trace produced by [`write_trace`].
pub fn read_trace(path: &Path) -> Result<ConvergenceTrace> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if lineno == 0 {
            if line != "iter,time_s,obj,residual,n_active,n_nonactive,alpha,epsilon" {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 1,
                    msg: "unexpected trace header".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("bad float '{s}'"),
            })
        };
        let parse_u = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("bad integer '{s}'"),
            })
        };
        rows.push(TraceRow {
            iter: parse_u(fields[0])?,
            time_s: parse_f(fields[1])?,
            obj: parse_f(fields[2])?,
            residual: parse_f(fields[3])?,
            n_active: parse_u(fields[4])?,
            n_nonactive: parse_u(fields[5])?,
            alpha: parse_f(fields[6])?,
            epsilon: parse_f(fields[7])?,
        });
    }
    Ok(ConvergenceTrace {
        rows,
        ls_cap_hits: 0,
    })
}
