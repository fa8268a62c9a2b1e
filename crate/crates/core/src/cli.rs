//! Command-line front end: `atomkit <subcommand> ...`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::apps::{
    bench_csv, gen_demix_instance, gen_lasso_instance, gen_matcomp_instance, matcomp_dual,
    matcomp_primal, run_matcomp_benchmark, run_mca_demix,
};
use crate::atoms::{alignment_residual, polar_gap, AtomicSet};
use crate::element::{Element, Extended};
use crate::error::{Error, Result};
use crate::io::{format_matrix_csv, read_matrix_csv, read_text, write_pgm, write_text};
use crate::linmap::LinearMap;
use crate::recipe::Recipe;
use crate::selftest::run_selftest;
use crate::solvers::{
    dual_cg_least_squares, primal_cg, recover_from_certificate, CgOptions, CgTrace, DualOptions,
    LeastSquares, RecoveryOptions, SmoothObjective, StepRule,
};

#[derive(Debug, Parser)]
#[command(
    name = "atomkit",
    version,
    about = "Gauges, support functions, alignment checks and conditional-gradient solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Seed for every random draw.
    #[arg(long, env = "ATOMKIT_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Atomic set recipe (JSON).
    #[arg(long)]
    set: PathBuf,
    /// Point as CSV, one matrix row per line.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Problem {
    Lasso,
    Matcomp,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Step {
    Exact,
    Harmonic,
    Away,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gauge of a point.
    Gauge(PointArgs),
    /// Support function at a direction.
    Support(PointArgs),
    /// Atoms exposed by a direction.
    Expose {
        #[command(flatten)]
        point: PointArgs,
        /// Maximum number of atoms returned.
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Alignment residual of a pair (x, z).
    Align {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        z: PathBuf,
        /// Aligned when the residual is at most tol·(1 + γ(x)σ(z)).
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Least squares over a scaled atomic ball.
    Solve {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long, value_enum, default_value_t = Solver::Primal)]
        solver: Solver,
        /// Ball radius; defaults to the instance's radius.
        #[arg(long)]
        tau: Option<f64>,
        /// Gap threshold for stopping.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        /// Primal step rule.
        #[arg(long, value_enum, default_value_t = Step::Away)]
        step: Step,
        /// Matrix size for `matcomp`.
        #[arg(long, default_value_t = 100)]
        size: usize,
        /// Atomic set recipe for `custom`.
        #[arg(long)]
        set: Option<PathBuf>,
        /// Matrix A for `custom` (CSV); the identity when omitted.
        #[arg(long)]
        a: Option<PathBuf>,
        /// Data b for `custom` (CSV).
        #[arg(long)]
        b: Option<PathBuf>,
        /// Write the solution as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Benchmarks.
    Bench {
        #[command(subcommand)]
        bench: Bench,
    },
    /// Sparse + low-rank + DCT-sparse image demixing.
    Demix {
        #[arg(long, default_value_t = 64)]
        size: usize,
        /// Defaults to 0.9 times the largest planted component gauge.
        #[arg(long)]
        tau: Option<f64>,
        /// Stage-one iterations.
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 0.02)]
        sparse_frac: f64,
        #[arg(long, default_value_t = 0.02)]
        dct_frac: f64,
        /// Directory for PGM images and metrics.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Run the property self-test suites.
    Selftest {
        /// Only suites whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        seed: SeedArg,
    },
}

#[derive(Debug, Subcommand)]
enum Bench {
    /// Primal vs dual conditional gradient on random completion problems.
    Matcomp {
        /// Comma-separated square sizes.
        #[arg(long, value_delimiter = ',', default_value = "100")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        /// Singular pairs kept for the dual recovery.
        #[arg(long, default_value_t = 4)]
        ell: usize,
        /// Leave out the timing columns.
        #[arg(long)]
        no_time: bool,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
}

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::ShapeMismatch { .. }
        | Error::BadDensity(_)
        | Error::BadFraction(_)
        | Error::NotOrthonormal { .. }
        | Error::NonPositiveWeight { .. } => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

fn ext_json(v: Extended) -> Value {
    match v {
        Extended::Finite(x) => json!(x),
        Extended::Infinite => json!("inf"),
    }
}

fn matrix_json(x: &Element) -> Value {
    if x.cols() == 1 {
        json!(x.as_slice())
    } else {
        Value::Array((0..x.rows()).map(|i| json!(x.row(i))).collect())
    }
}

fn load_set(path: &Path) -> Result<AtomicSet> {
    Recipe::parse(&read_text(path)?)?.build()
}

/// Reads a point and reshapes it to `shape` when only the layout differs.
fn load_point(path: &Path, shape: (usize, usize)) -> Result<Element> {
    let x = read_matrix_csv(path)?;
    if x.shape() == shape || x.len() != shape.0 * shape.1 {
        return Ok(x);
    }
    x.reshape(shape.0, shape.1)
}

fn trace_json(trace: &CgTrace) -> Value {
    Value::Array(
        trace
            .records
            .iter()
            .map(|r| json!({ "k": r.k, "gap": r.gap, "objective": r.objective }))
            .collect(),
    )
}

struct Output<'a> {
    out: &'a mut dyn Write,
}

impl Output<'_> {
    fn json(&mut self, v: &Value) -> Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(v)?)?;
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn solve(
    problem: Problem,
    solver: Solver,
    tau: Option<f64>,
    eps: Option<f64>,
    iters: usize,
    step: Step,
    size: usize,
    set: Option<PathBuf>,
    a: Option<PathBuf>,
    b: Option<PathBuf>,
    seed: u64,
) -> Result<(Value, Option<Element>)> {
    if let Problem::Matcomp = problem {
        let mut inst = gen_matcomp_instance(size, size, 0.10, 0.1, seed)?;
        if let Some(t) = tau {
            inst.planted_nuclear = t;
        }
        let (residual, rank, trace) = match solver {
            Solver::Primal => {
                let r = matcomp_primal(&inst, iters)?;
                (r.residual, r.rank, r.trace)
            }
            Solver::Dual => {
                let r = matcomp_dual(&inst, iters, 4)?;
                (r.residual, r.rank, r.trace)
            }
        };
        let v = json!({
            "problem": "matcomp",
            "solver": if solver == Solver::Primal { "primal" } else { "dual" },
            "size": size,
            "tau": inst.planted_nuclear,
            "residual": residual,
            "rank": rank,
            "trace": trace_json(&trace),
        });
        return Ok((v, None));
    }
    let (obj, set, default_tau, name) = match problem {
        Problem::Lasso => {
            let inst = gen_lasso_instance(10, 20, 2, 0.0, seed)?;
            (inst.objective()?, inst.set(), Some(inst.tau), "lasso")
        }
        _ => {
            let set_path = set.ok_or_else(|| {
                Error::InvalidArgument("--set is required for --problem custom".into())
            })?;
            let b_path = b.ok_or_else(|| {
                Error::InvalidArgument("--b is required for --problem custom".into())
            })?;
            let set = load_set(&set_path)?;
            let (map, b) = match a {
                Some(p) => {
                    let m = read_matrix_csv(&p)?;
                    let b = load_point(&b_path, (m.rows(), 1))?;
                    (LinearMap::dense(m), b)
                }
                None => (LinearMap::Identity, load_point(&b_path, set.shape())?),
            };
            (LeastSquares::new(map, b, set.shape())?, set, None, "custom")
        }
    };
    let tau = tau
        .or(default_tau)
        .ok_or_else(|| Error::InvalidArgument("--tau is required for --problem custom".into()))?;
    let (x, gap, converged, trace) = match solver {
        Solver::Primal => {
            let opts = CgOptions {
                eps,
                max_iter: iters,
                step: match step {
                    Step::Exact => StepRule::Exact,
                    Step::Harmonic => StepRule::Harmonic,
                    Step::Away => StepRule::Away,
                },
                ..CgOptions::default()
            };
            let r = primal_cg(&obj, &set, tau, &opts)?;
            (r.x, r.gap, r.converged, r.trace)
        }
        Solver::Dual => {
            let opts = DualOptions {
                eps,
                max_iter: iters,
                ..DualOptions::default()
            };
            let r = dual_cg_least_squares(&obj.map, &obj.b, &set, tau, &opts)?;
            let parts = [set.clone()];
            let x = recover_from_certificate(
                &obj,
                &r.certificate,
                &parts,
                tau,
                &RecoveryOptions::default(),
            )?
            .remove(0);
            (x, r.certificate.gap_at_exit, r.converged, r.trace)
        }
    };
    let v = json!({
        "problem": name,
        "solver": if solver == Solver::Primal { "primal" } else { "dual" },
        "tau": tau,
        "converged": converged,
        "iterations": trace.steps(),
        "gap": gap,
        "objective": obj.eval(&x)?,
        "gauge": ext_json(set.gauge(&x)?),
        "x": matrix_json(&x),
    });
    Ok((v, Some(x)))
}

fn execute(cli: Cli, out: &mut Output) -> Result<i32> {
    match cli.command {
        Command::Gauge(p) => {
            let set = load_set(&p.set)?;
            let x = load_point(&p.input, set.shape())?;
            out.json(&json!({ "gauge": ext_json(set.gauge(&x)?) }))?;
        }
        Command::Support(p) => {
            let set = load_set(&p.set)?;
            let z = load_point(&p.input, set.shape())?;
            out.json(&json!({ "support": ext_json(set.support(&z)?) }))?;
        }
        Command::Expose { point, k, tol } => {
            let set = load_set(&point.set)?;
            let z = load_point(&point.input, set.shape())?;
            let face = set.expose(&z, k, tol)?;
            let atoms: Vec<Value> = face
                .atoms
                .iter()
                .map(|a| json!({ "tag": a.tag.label(), "element": matrix_json(&a.element) }))
                .collect();
            out.json(&json!({
                "support_value": face.support_value,
                "tol": face.tol,
                "atoms": atoms,
            }))?;
        }
        Command::Align { set, x, z, tol } => {
            let set = load_set(&set)?;
            let x = load_point(&x, set.shape())?;
            let z = load_point(&z, set.shape())?;
            let residual = alignment_residual(&set, &x, &z)?;
            let scale = 1.0 + polar_gap(&set, &x, &z)?.map_or(0.0, |(_, gs)| gs.abs());
            out.json(&json!({ "residual": residual, "aligned": residual <= tol * scale }))?;
        }
        Command::Solve {
            problem,
            solver,
            tau,
            eps,
            iters,
            step,
            size,
            set,
            a,
            b,
            out: path,
            seed,
        } => {
            let (v, x) = solve(
                problem, solver, tau, eps, iters, step, size, set, a, b, seed.seed,
            )?;
            if let (Some(path), Some(x)) = (path, x) {
                write_text(&path, &format_matrix_csv(&x))?;
            }
            out.json(&v)?;
        }
        Command::Bench {
            bench:
                Bench::Matcomp {
                    sizes,
                    iters,
                    ell,
                    no_time,
                    out: path,
                    seed,
                },
        } => {
            if sizes.is_empty() {
                return Err(Error::InvalidArgument("--sizes needs at least one size".into()));
            }
            let rows = run_matcomp_benchmark(&sizes, iters, ell, seed.seed)?;
            let csv = bench_csv(&rows, !no_time);
            match path {
                Some(p) => write_text(&p, &csv)?,
                None => write!(out.out, "{csv}")?,
            }
        }
        Command::Demix {
            size,
            tau,
            iters,
            rank,
            sparse_frac,
            dct_frac,
            out: dir,
            seed,
        } => {
            let inst = gen_demix_instance(size, sparse_frac, rank, dct_frac, seed.seed)?;
            let tau = match tau {
                Some(t) => t,
                None => inst.default_tau()?,
            };
            let r = run_mca_demix(&inst, tau, iters)?;
            let metrics = serde_json::to_value(&r.metrics)?;
            if let Some(dir) = dir {
                std::fs::create_dir_all(&dir)?;
                for (name, img) in r.images(&inst) {
                    write_pgm(&dir.join(format!("{name}.pgm")), img)?;
                }
                write_text(
                    &dir.join("metrics.json"),
                    &format!("{}\n", serde_json::to_string_pretty(&metrics)?),
                )?;
            }
            out.json(&metrics)?;
        }
        Command::Selftest { filter, seed } => {
            let reports = run_selftest(filter.as_deref(), seed.seed)?;
            let ok = reports.iter().all(|r| r.ok());
            out.json(&json!({ "suites": reports, "ok": ok }))?;
            if !ok {
                return Ok(EXIT_SELFTEST);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, &mut Output { out }) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
