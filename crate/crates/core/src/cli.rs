//! `gapcert` command line: `run`, `verify` and `sweep`.
//!
//! Every entry point returns a process exit code (0 ok, 1 verification
//! failure, 2 bad input) so tests can drive it in-process.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::diagnostics::{self, theorem_iterations, VerificationReport, KRYLOV_MAX_DIM};
use crate::error::Error;
use crate::methods::{run_method, Method, MethodKind, PlaneVariant, RunOptions};
use crate::problem::{GenSpec, Objective, Profile, ProblemFile, QuadraticProblem};
use crate::trace::{CertifiedTrace, CsvSidecar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Relative accuracy used by `sweep`: `f(y) − f* ≤ 1e−6·(f(x₀) − f*)`.
pub const SWEEP_REL_TARGET: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "gapcert", version, about = "Certified first-order methods for convex quadratics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method and write its certificate trace.
    Run(RunArgs),
    /// Check a trace file (or a fresh run) against the certificate inequalities.
    Verify(VerifyArgs),
    /// Iterations to 1e-6 relative accuracy over a grid of methods, κ and seeds.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Problem file (JSON with n, A or spectrum, b, x0).
    #[arg(long, value_name = "FILE", conflicts_with = "gen")]
    pub problem: Option<PathBuf>,
    /// Generator spec, e.g. n=50,profile=geometric,kappa=100,seed=7
    #[arg(long, value_name = "SPEC")]
    pub gen: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, default_value = "nesterov")]
    pub method: String,
    /// span | footnote_affine (nemirovski_plane only)
    #[arg(long, default_value = "span")]
    pub plane_variant: String,
    /// Maximum iterations (default 2n).
    #[arg(long)]
    pub iters: Option<usize>,
    /// Stop once ‖g_k‖ ≤ tol·‖g_0‖.
    #[arg(long, default_value_t = 1e-12)]
    pub grad_tol: f64,
    /// Report L_k, G_k and rate bounds against the known minimizer.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub anchored: bool,
    /// Recompute v_k and m_k from the full history each step (default: on for n ≤ 64).
    #[arg(long, action = clap::ArgAction::Set)]
    pub paranoid: Option<bool>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Trace output; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trace format (default: from the --out extension, else csv).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write a gnuplot script plotting the CSV trace.
    #[arg(long, value_name = "FILE")]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Trace to check: .json, or .csv with its .meta.json sidecar.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["problem", "gen"])]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "cg,nesterov,gradient_descent")]
    pub methods_list: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub kappa_list: Vec<f64>,
    #[arg(long = "seed", value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value = "geometric")]
    pub profile: String,
    /// Per-run iteration cap.
    #[arg(long, default_value_t = 1_000_000)]
    pub iters: usize,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn input_error(err: &mut dyn Write, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    EXIT_INPUT
}

/// Parses `args` (program name first) and dispatches.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match cli.command {
        Command::Run(a) => cmd_run(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
    }
}

pub fn load_problem(args: &ProblemArgs) -> Result<QuadraticProblem, Error> {
    match (&args.problem, &args.gen) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            let file: ProblemFile = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            file.into_problem()
        }
        (None, Some(spec)) => spec.parse::<GenSpec>()?.generate(),
        (Some(_), Some(_)) => Err(Error::InvalidInput("give either --problem or --gen, not both".into())),
        (None, None) => Err(Error::InvalidInput("a problem is required (--problem FILE or --gen SPEC)".into())),
    }
}

fn method_kind(args: &MethodArgs) -> Result<MethodKind, Error> {
    let method: Method = args.method.parse()?;
    let variant: PlaneVariant = args.plane_variant.parse()?;
    Ok(MethodKind::new(method).with_plane_variant(variant))
}

fn run_options(args: &MethodArgs, p: &QuadraticProblem) -> RunOptions {
    let mut opts = RunOptions::for_problem(p)
        .with_grad_tol(args.grad_tol)
        .with_anchored(args.anchored);
    if let Some(k) = args.iters {
        opts = opts.with_iters(k);
    }
    if let Some(on) = args.paranoid {
        opts = opts.with_paranoid(on);
    }
    opts
}

/// Writes `data` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(data)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn sidecar_path(trace_path: &Path) -> PathBuf {
    let mut s = trace_path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn format_for(path: Option<&Path>, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    })
}

fn trace_json(trace: &CertifiedTrace) -> String {
    // Only serde_json's own float formatting is used, which round-trips.
    serde_json::to_string_pretty(trace).expect("trace serializes") + "\n"
}

/// Every check a trace can support without the problem data.
fn trace_checks(trace: &CertifiedTrace) -> Result<VerificationReport, Error> {
    diagnostics::check_certificate(trace)
}

/// Certificate checks plus the CG structural checks for in-memory runs.
pub fn full_checks(trace: &CertifiedTrace, p: &QuadraticProblem) -> Result<VerificationReport, Error> {
    let mut report = trace_checks(trace)?;
    let has_vectors = trace.rows.iter().all(|r| r.vectors.is_some());
    if has_vectors && p.n() <= KRYLOV_MAX_DIM {
        report.merge(diagnostics::check_krylov_membership(trace, p)?);
        if trace.meta.method == Method::Cg {
            report.merge(diagnostics::check_cg_orthogonality(trace, p)?);
            report.merge(diagnostics::check_cg_termination(trace, p)?);
        }
    }
    Ok(report)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"))
}

pub fn summary_line(trace: &CertifiedTrace, report: &VerificationReport) -> String {
    let worst = report
        .checks
        .iter()
        .filter(|c| c.worst.is_some() && c.tolerance.is_some())
        .max_by(|a, b| {
            let r = |c: &diagnostics::CheckResult| c.worst.unwrap() / c.tolerance.unwrap();
            r(a).total_cmp(&r(b))
        });
    let worst = match worst {
        Some(c) => format!("{}={:.3e}(tol {:.1e})", c.check, c.worst.unwrap(), c.tolerance.unwrap()),
        None => "none".to_string(),
    };
    format!(
        "method={} n={} iterations={} status={} final_gap={} worst={} certificate={}",
        trace.meta.method,
        trace.meta.n,
        trace.iterations(),
        trace.status.name(),
        fmt_opt(trace.final_gap()),
        worst,
        if report.pass { "pass" } else { "FAIL" },
    )
}

fn gnuplot_script(csv: &Path) -> String {
    let name = csv.display();
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale y\n\
         set xlabel 'iteration'\n\
         set ylabel 'f(y_k) - f*'\n\
         # gap column: G_anchored, bound column: bound_rhs\n\
         plot '{name}' using 1:10 with lines title 'G_k', \\\n     \
         '{name}' using 1:13 with lines title 'bound'\n"
    )
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let problem = match load_problem(&args.problem) {
        Ok(p) => p,
        Err(e) => return input_error(err, e),
    };
    let kind = match method_kind(&args.method) {
        Ok(k) => k,
        Err(e) => return input_error(err, e),
    };
    let format = format_for(args.out.as_deref(), args.format);
    if args.gnuplot.is_some() && (format != Format::Csv || args.out.is_none()) {
        return input_error(err, "--gnuplot needs a CSV trace written with --out");
    }
    let opts = run_options(&args.method, &problem);
    let trace = match run_method(&kind, &problem, &opts) {
        Ok(t) => t,
        Err(e) => return input_error(err, e),
    };
    let report = match trace_checks(&trace) {
        Ok(r) => r,
        Err(e) => return input_error(err, e),
    };
    let body = match format {
        Format::Csv => trace.to_csv(),
        Format::Json => trace_json(&trace),
    };
    let summary = summary_line(&trace, &report);
    match &args.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, body.as_bytes()) {
                return input_error(err, format!("cannot write {}: {e}", path.display()));
            }
            if format == Format::Csv {
                let meta = serde_json::to_string_pretty(&trace.sidecar()).expect("sidecar serializes") + "\n";
                if let Err(e) = write_atomic(&sidecar_path(path), meta.as_bytes()) {
                    return input_error(err, format!("cannot write sidecar: {e}"));
                }
            }
            if let Some(gp) = &args.gnuplot {
                if let Err(e) = write_atomic(gp, gnuplot_script(path).as_bytes()) {
                    return input_error(err, format!("cannot write {}: {e}", gp.display()));
                }
            }
            let _ = writeln!(out, "{summary}");
        }
        None => {
            let _ = out.write_all(body.as_bytes());
            let _ = writeln!(err, "{summary}");
        }
    }
    EXIT_OK
}

pub fn load_trace(path: &Path) -> Result<CertifiedTrace, Error> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", p.display())))
    };
    let text = read(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        return serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())));
    }
    let side = sidecar_path(path);
    let sidecar: CsvSidecar = serde_json::from_str(&read(&side)?)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", side.display())))?;
    CertifiedTrace::from_csv(&text, sidecar)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = match &args.trace {
        Some(path) => load_trace(path).and_then(|t| trace_checks(&t)),
        None => load_problem(&args.problem).and_then(|p| {
            let kind = method_kind(&args.method)?;
            let trace = run_method(&kind, &p, &run_options(&args.method, &p))?;
            full_checks(&trace, &p)
        }),
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => return input_error(err, e),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, json.as_bytes()) {
                return input_error(err, format!("cannot write {}: {e}", path.display()));
            }
        }
        None => {
            let _ = out.write_all(json.as_bytes());
        }
    }
    for c in report.failed() {
        let at = c.at_iter.map_or_else(String::new, |k| format!(" at iteration {k}"));
        let _ = writeln!(err, "violation: check={}{at} worst={}", c.check, fmt_opt(c.worst));
    }
    if report.pass {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub kappa: f64,
    pub seed: u64,
    pub n: usize,
    /// First iteration with `f(y_k) − f* ≤ target`, or the last one run.
    pub iterations: usize,
    /// Rate-bound iteration count; `None` for methods without one.
    pub predicted: Option<usize>,
    pub reached: bool,
}

pub const SWEEP_HEADER: &str = "method,kappa,seed,n,iterations,predicted,reached";

fn sweep_one(kind: &MethodKind, spec: &GenSpec, max_iters: usize) -> Result<SweepRow, Error> {
    let p = spec.generate()?;
    let target = SWEEP_REL_TARGET * (p.value(p.x0()) - p.f_star());
    let opts = RunOptions::for_problem(&p)
        .with_iters(max_iters)
        .with_grad_tol(0.0)
        .with_paranoid(false)
        .with_vectors(false)
        .with_stop_at_gap(target);
    let trace = run_method(kind, &p, &opts)?;
    let hit = trace.rows.iter().find(|r| r.f_y - p.f_star() <= target);
    let predicted = match kind.method {
        Method::GradientDescent => None,
        _ => Some(theorem_iterations(kind.schedule_mu(p.mu()), p.l(), p.initial_distance_sq(), target)?),
    };
    Ok(SweepRow {
        method: kind.label(),
        kappa: spec.kappa,
        seed: spec.seed,
        n: spec.n,
        iterations: hit.map_or(trace.iterations(), |r| r.k),
        predicted,
        reached: hit.is_some(),
    })
}

pub fn sweep_rows(args: &SweepArgs) -> Result<Vec<SweepRow>, Error> {
    if args.methods_list.is_empty() || args.kappa_list.is_empty() || args.seeds.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    let profile = match args.profile.as_str() {
        "uniform" => Profile::Uniform,
        "geometric" => Profile::Geometric,
        "clustered" => Profile::Clustered,
        other => return Err(Error::InvalidInput(format!("unknown profile '{other}'"))),
    };
    let kinds = args
        .methods_list
        .iter()
        .map(|m| m.trim().parse::<Method>().map(MethodKind::new))
        .collect::<Result<Vec<_>, _>>()?;
    let mut grid = Vec::new();
    for kind in &kinds {
        for &kappa in &args.kappa_list {
            for &seed in &args.seeds {
                grid.push((kind.clone(), GenSpec::new(args.n, profile.clone(), kappa, seed)));
            }
        }
    }
    // Whole runs in parallel; collect keeps grid order.
    grid.par_iter().map(|(k, s)| sweep_one(k, s, args.iters)).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.method,
            r.kappa,
            r.seed,
            r.n,
            r.iterations,
            r.predicted.map_or_else(String::new, |p| p.to_string()),
            r.reached
        );
    }
    s
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let rows = match sweep_rows(args) {
        Ok(r) => r,
        Err(e) => return input_error(err, e),
    };
    let csv = sweep_csv(&rows);
    match &args.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, csv.as_bytes()) {
                return input_error(err, format!("cannot write {}: {e}", path.display()));
            }
            let _ = writeln!(out, "wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let _ = out.write_all(csv.as_bytes());
        }
    }
    EXIT_OK
}
