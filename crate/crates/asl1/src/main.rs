//! Command-line driver: solve single ℓ1-ball instances or run the
//! three-solver comparison harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use asl1::{
    data_io, solve_afw, solve_nmspg, AtomWeights, ConvergenceTrace, LassoProblem, LogisticProblem,
    ObjectiveOracle, ProblemInstance, SolverConfig, SolverResult, SolverStatus,
};

#[derive(Parser)]
#[command(
    name = "asl1",
    about = "First-order solvers for minimization over the l1-ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with a chosen solver and report the outcome.
    Solve(SolveArgs),
    /// Run the comparison harness: the active-set solver fixes the target
    /// objective, then each baseline runs until it matches it.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Asl1,
    Nmspg,
    Afw,
}

impl SolverKind {
    fn name(self) -> &'static str {
        match self {
            SolverKind::Asl1 => "asl1",
            SolverKind::Nmspg => "nmspg",
            SolverKind::Afw => "afw",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemKind {
    Lasso,
    Logistic,
}

#[derive(Args)]
struct InstanceArgs {
    /// Problem family.
    #[arg(long, value_enum, default_value = "lasso")]
    problem: ProblemKind,

    /// Path to a LIBSVM-format dataset (logistic only).
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,

    /// Generate a synthetic instance of this dimension instead of reading a file.
    #[arg(long)]
    synthetic: Option<usize>,

    /// Sample count for synthetic logistic instances (defaults to n/2).
    #[arg(long)]
    samples: Option<usize>,

    /// Ball radius; "auto" uses the generator's radius for synthetic LASSO.
    #[arg(long, default_value = "auto")]
    tau: String,

    /// Radius as a fraction of the dimension, τ = fraction·n;
    /// takes precedence over --tau.
    #[arg(long)]
    tau_fraction: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "asl1")]
    solver: SolverKind,

    #[command(flatten)]
    instance: InstanceArgs,

    /// Seed for synthetic instances.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,

    /// Wall-clock budget in seconds for the optimization loop.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,

    /// Write the per-iteration trace to this CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Seeds of the synthetic instances, e.g. "1-10" or "3,5,9".
    #[arg(long, default_value = "1")]
    seeds: String,

    /// Comma-separated solver list.
    #[arg(long, default_value = "asl1,nmspg,afw")]
    solvers: String,

    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,

    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,

    /// Write per-run traces into this directory as <solver>_<instance>.csv.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

enum Instance {
    Lasso { problem: LassoProblem, tau: f64 },
    Logistic { problem: LogisticProblem, tau: f64 },
}

impl Instance {
    fn tau(&self) -> f64 {
        match self {
            Instance::Lasso { tau, .. } | Instance::Logistic { tau, .. } => *tau,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Instance::Lasso { problem, .. } => problem.dim(),
            Instance::Logistic { problem, .. } => problem.dim(),
        }
    }
}

fn build_instance(args: &InstanceArgs, seed: u64) -> Result<Instance, String> {
    match args.problem {
        ProblemKind::Lasso => {
            let n = args
                .synthetic
                .ok_or("LASSO instances are synthetic; pass --synthetic N")?;
            let (problem, _xstar, auto_tau) =
                data_io::generate_lasso(n, seed).map_err(|e| e.to_string())?;
            let tau = resolve_tau(args, n, Some(auto_tau))?;
            Ok(Instance::Lasso { problem, tau })
        }
        ProblemKind::Logistic => {
            let problem = if let Some(path) = &args.input {
                data_io::read_libsvm(path, None).map_err(|e| e.to_string())?
            } else if let Some(n) = args.synthetic {
                let l = args.samples.unwrap_or_else(|| (n / 2).max(1));
                data_io::generate_logistic(l, n, seed).map_err(|e| e.to_string())?
            } else {
                return Err("pass --input PATH or --synthetic N".into());
            };
            let n = problem.dim();
            let tau = resolve_tau(args, n, None)?;
            Ok(Instance::Logistic { problem, tau })
        }
    }
}

fn resolve_tau(args: &InstanceArgs, n: usize, auto: Option<f64>) -> Result<f64, String> {
    if let Some(frac) = args.tau_fraction {
        if frac <= 0.0 {
            return Err("--tau-fraction must be positive".into());
        }
        return Ok(frac * n as f64);
    }
    match args.tau.as_str() {
        "auto" => {
            auto.ok_or("no automatic radius for this problem; pass --tau or --tau-fraction".into())
        }
        value => {
            let tau: f64 = value
                .parse()
                .map_err(|_| format!("cannot parse --tau value '{value}'"))?;
            if tau <= 0.0 {
                return Err("--tau must be positive".into());
            }
            Ok(tau)
        }
    }
}

struct RunOutcome {
    result: SolverResult,
    trace: ConvergenceTrace,
    wall_s: f64,
}

fn run_solver(
    kind: SolverKind,
    instance: &Instance,
    config: &SolverConfig,
) -> Result<RunOutcome, String> {
    let started = Instant::now();
    let run = |res: asl1::Result<(SolverResult, ConvergenceTrace)>| -> Result<RunOutcome, String> {
        let (result, trace) = res.map_err(|e| e.to_string())?;
        Ok(RunOutcome {
            result,
            trace,
            wall_s: started.elapsed().as_secs_f64(),
        })
    };
    match instance {
        Instance::Lasso { problem, tau } => {
            let p = ProblemInstance::new(problem, *tau).map_err(|e| e.to_string())?;
            let x0 = vec![0.0; problem.dim()];
            match kind {
                SolverKind::Asl1 => run(asl1::solve(&p, &x0, config)),
                SolverKind::Nmspg => run(solve_nmspg(&p, &x0, config)),
                SolverKind::Afw => run(solve_afw(&p, AtomWeights::origin_pair(), config)),
            }
        }
        Instance::Logistic { problem, tau } => {
            let p = ProblemInstance::new(problem, *tau).map_err(|e| e.to_string())?;
            let x0 = vec![0.0; problem.dim()];
            match kind {
                SolverKind::Asl1 => run(asl1::solve(&p, &x0, config)),
                SolverKind::Nmspg => run(solve_nmspg(&p, &x0, config)),
                SolverKind::Afw => run(solve_afw(&p, AtomWeights::origin_pair(), config)),
            }
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<SolverStatus, String> {
    let instance = build_instance(&args.instance, args.seed)?;
    let config = SolverConfig {
        tolerance: args.tol,
        max_iterations: args.max_iter,
        time_limit: args.time_limit,
        ..SolverConfig::default()
    };
    let outcome = run_solver(args.solver, &instance, &config)?;
    if let Some(path) = &args.trace {
        data_io::write_trace(&outcome.trace, path).map_err(|e| e.to_string())?;
    }
    println!("solver:     {}", args.solver.name());
    println!("n:          {}", instance.dim());
    println!("tau:        {:.6e}", instance.tau());
    println!("status:     {}", outcome.result.status);
    println!("objective:  {:.12e}", outcome.result.objective);
    println!("residual:   {:.6e}", outcome.result.residual);
    println!("pct_zeros:  {:.2}", 100.0 * outcome.result.sparsity);
    println!("iterations: {}", outcome.result.iterations);
    println!("time_s:     {:.3}", outcome.wall_s);
    Ok(outcome.result.status)
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: u64 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad seed '{part}'"))?;
            let hi: u64 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad seed '{part}'"))?;
            if hi < lo {
                return Err(format!("empty seed range '{part}'"));
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().map_err(|_| format!("bad seed '{part}'"))?);
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(seeds)
}

fn parse_solvers(spec: &str) -> Result<Vec<SolverKind>, String> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        match part.trim() {
            "asl1" => out.push(SolverKind::Asl1),
            "nmspg" => out.push(SolverKind::Nmspg),
            "afw" => out.push(SolverKind::Afw),
            other => return Err(format!("unknown solver '{other}'")),
        }
    }
    if out.is_empty() {
        return Err("no solvers given".into());
    }
    Ok(out)
}

fn cmd_compare(args: &CompareArgs) -> Result<(), String> {
    let seeds = parse_seeds(&args.seeds)?;
    let solvers = parse_solvers(&args.solvers)?;
    if let Some(dir) = &args.trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }

    println!("instance\tsolver\tobj\ttime_s\tpct_zeros\tstatus\titers");
    for &seed in &seeds {
        let instance = build_instance(&args.instance, seed)?;
        let base = SolverConfig {
            tolerance: args.tol,
            max_iterations: args.max_iter,
            time_limit: args.time_limit,
            ..SolverConfig::default()
        };
        // The active-set run fixes the reference objective f*.
        let reference = run_solver(SolverKind::Asl1, &instance, &base)?;
        let fstar = reference.result.objective;
        let band = fstar + 1e-6 * (1.0 + fstar.abs());

        for &kind in &solvers {
            let outcome = if kind == SolverKind::Asl1 {
                // Reuse the reference run instead of solving twice.
                RunOutcome {
                    result: reference.result.clone(),
                    trace: reference.trace.clone(),
                    wall_s: reference.wall_s,
                }
            } else {
                let harness = SolverConfig {
                    target_objective: Some(band),
                    ..base.clone()
                };
                run_solver(kind, &instance, &harness)?
            };
            println!(
                "{}\t{}\t{:.12e}\t{:.3}\t{:.2}\t{}\t{}",
                seed,
                kind.name(),
                outcome.result.objective,
                outcome.wall_s,
                100.0 * outcome.result.sparsity,
                outcome.result.status,
                outcome.result.iterations,
            );
            if let Some(dir) = &args.trace_dir {
                let path = dir.join(format!("{}_{}.csv", kind.name(), seed));
                data_io::write_trace(&outcome.trace, Path::new(&path))
                    .map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => match cmd_solve(&args) {
            Ok(SolverStatus::Converged) => ExitCode::SUCCESS,
            Ok(_) => ExitCode::from(2),
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Command::Compare(args) => match cmd_compare(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
    }
}
