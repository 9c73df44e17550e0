//! End-to-end checks of the command-line driver.

use std::process::Command;

fn asl1() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asl1"))
}

fn stdout_of(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn solve_synthetic_lasso_converges_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = asl1()
        .args([
            "solve",
            "--solver",
            "asl1",
            "--problem",
            "lasso",
            "--synthetic",
            "128",
            "--seed",
            "7",
            "--trace",
        ])
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    assert!(text.contains("status:     Converged"), "{text}");
    assert!(text.contains("pct_zeros"));
    assert!(text.contains("iterations"));

    let content = std::fs::read_to_string(&trace).unwrap();
    assert!(content.starts_with("iter,time_s,obj,residual,n_active,n_nonactive,alpha,epsilon"));
    assert!(content.lines().count() > 1);
}

#[test]
fn solve_missing_input_exits_one() {
    let out = asl1()
        .args(["solve", "--solver", "asl1", "--problem", "logistic"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn solve_lasso_requires_synthetic() {
    let out = asl1()
        .args(["solve", "--problem", "lasso"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_iteration_limit_exits_two() {
    let out = asl1()
        .args([
            "solve",
            "--solver",
            "nmspg",
            "--problem",
            "lasso",
            "--synthetic",
            "64",
            "--seed",
            "3",
            "--max-iter",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout_of(&out).contains("IterationLimit"));
}

#[test]
fn solve_time_limit_reports_last_iterate() {
    let out = asl1()
        .args([
            "solve",
            "--solver",
            "afw",
            "--problem",
            "lasso",
            "--synthetic",
            "256",
            "--seed",
            "5",
            "--tol",
            "1e-14",
            "--time-limit",
            "0.05",
        ])
        .output()
        .unwrap();
    // Either the clock expires first (exit 2) or the solver stalls at its
    // floating-point floor (also a limit status).
    assert_eq!(out.status.code(), Some(2), "stdout: {}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("Limit"), "{text}");
    assert!(text.contains("objective"));
}

#[test]
fn solve_logistic_from_libsvm_file_with_tau_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tiny.libsvm");
    std::fs::write(
        &data,
        "+1 1:0.9 3:0.4\n-1 2:1.1\n+1 1:0.2 2:0.3 3:0.5\n-1 3:0.8\n",
    )
    .unwrap();
    let out = asl1()
        .args([
            "solve",
            "--solver",
            "asl1",
            "--problem",
            "logistic",
            "--tau-fraction",
            "0.5",
            "--input",
        ])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    assert!(text.contains("n:          3"), "{text}");
    // τ = 0.5·n = 1.5
    assert!(text.contains("tau:        1.5"), "{text}");
}

#[test]
fn compare_emits_table_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = asl1()
        .args([
            "compare",
            "--problem",
            "lasso",
            "--synthetic",
            "64",
            "--seeds",
            "1-2",
            "--solvers",
            "asl1,nmspg,afw",
            "--trace-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance\tsolver\tobj\ttime_s\tpct_zeros\tstatus\titers"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6); // 2 instances × 3 solvers
    for solver in ["asl1", "nmspg", "afw"] {
        assert_eq!(rows.iter().filter(|r| r.contains(solver)).count(), 2);
        for seed in ["1", "2"] {
            assert!(dir.path().join(format!("{solver}_{seed}.csv")).exists());
        }
    }
}

#[test]
fn compare_single_solver_is_degenerate_table() {
    let out = asl1()
        .args([
            "compare",
            "--problem",
            "lasso",
            "--synthetic",
            "64",
            "--seeds",
            "4",
            "--solvers",
            "asl1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 2); // header + one row
}

#[test]
fn compare_stdout_is_deterministic_modulo_timing() {
    let strip_time = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| {
                let cols: Vec<&str> = l.split('\t').collect();
                if cols.len() == 7 {
                    format!(
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        cols[0], cols[1], cols[2], cols[4], cols[5], cols[6]
                    )
                } else {
                    l.to_string()
                }
            })
            .collect()
    };
    let run = || {
        let out = asl1()
            .args([
                "compare",
                "--problem",
                "logistic",
                "--synthetic",
                "40",
                "--samples",
                "100",
                "--tau-fraction",
                "0.05",
                "--seeds",
                "1-3",
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        strip_time(&stdout_of(&out))
    };
    assert_eq!(run(), run());
}
