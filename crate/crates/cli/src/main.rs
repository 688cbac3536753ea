//! `eafe`: solve, convergence studies and mesh monotonicity checks.
//!
//! Exit codes: 0 ok, 1 negative verdict, 2 configuration error, 3 solver
//! failure.

mod config;
mod fields;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eafe_core::analysis::{convergence_study, error_norms, monotonicity_audit, write_csv, StudyOptions};
use eafe_core::linalg::solve;
use eafe_core::scheme::assemble;
use eafe_core::vtk::write_vtk;

use config::{resolve, Need};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<eafe_core::Error> for CliError {
    fn from(e: eafe_core::Error) -> Self {
        fn is_solver(e: &eafe_core::Error) -> bool {
            match e {
                eafe_core::Error::Solver(_) => true,
                eafe_core::Error::Context { source, .. } => is_solver(source),
                _ => false,
            }
        }
        if is_solver(&e) {
            CliError::Solver(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

impl From<OnOff> for bool {
    fn from(v: OnOff) -> bool {
        matches!(v, OnOff::On)
    }
}

fn parse_dim(s: &str) -> Result<usize, String> {
    match s {
        "2" => Ok(2),
        "3" => Ok(3),
        _ => Err("must be 2 or 3".into()),
    }
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Catalog problem name.
    #[arg(long, value_name = "NAME")]
    pub problem: Option<String>,
    /// Mesh file in the plain-text mesh format.
    #[arg(long, value_name = "PATH")]
    pub mesh: Option<PathBuf>,
    /// Structured mesh subdivisions per side (coarsest level for converge).
    #[arg(long, value_name = "INT")]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_dim)]
    pub dim: Option<usize>,
    #[arg(long, value_name = "INT")]
    pub levels: Option<usize>,
    /// Output file (solution for solve, CSV for converge).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Relative residual tolerance of the linear solver.
    #[arg(long, value_name = "FLOAT")]
    pub tol: Option<f64>,
    /// Merge element contributions in a fixed order.
    #[arg(long, value_enum)]
    pub deterministic: Option<OnOff>,
}

#[derive(Debug, Parser)]
#[command(name = "eafe", version, about = "Exponentially fitted finite elements for convection-diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assemble and solve one problem, write the solution as legacy VTK.
    Solve(GlobalArgs),
    /// Run a convergence study on refined structured meshes.
    Converge(GlobalArgs),
    /// Check that edge weight sums are nonnegative (exit 1 if not).
    CheckMonotone(GlobalArgs),
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{}: {e}", path.display()))
}

fn cmd_solve(args: &GlobalArgs) -> Result<u8, CliError> {
    let rc = resolve(args, Need::Problem)?;
    let mesh = rc.load_mesh()?;
    let sys = assemble(&mesh, &rc.coeffs, &rc.assembly)?;
    let (u, report) = solve(&sys.matrix, &sys.rhs, &rc.solver)?;
    let summary = format!(
        "problem={} dofs={} iterations={} residual={:.3e} method={}",
        rc.name,
        mesh.n_vertices(),
        report.iterations,
        report.residual,
        report.method
    );
    if !report.converged {
        return Err(CliError::Solver(format!("{summary} (tolerance {:.1e} not reached)", rc.solver.tol)));
    }
    let out = rc.solution_out.clone().unwrap_or_else(|| PathBuf::from("solution.vtk"));
    let mut w = create(&out)?;
    write_vtk(&mesh, "u", &u, &mut w).and_then(|_| w.flush()).map_err(io_err(&out))?;
    let mut line = summary;
    if let Some(ex) = &rc.exact {
        let e = error_norms(&mesh, &u, ex, 4)?;
        line.push_str(&format!(" err_l2={:.6e} err_h1={:.6e}", e.exact.l2, e.exact.h1));
    }
    println!("{line} out={}", out.display());
    Ok(0)
}

fn cmd_converge(args: &GlobalArgs) -> Result<u8, CliError> {
    if args.mesh.is_some() {
        return Err(CliError::Config("converge uses structured meshes; give --n, not --mesh".into()));
    }
    let rc = resolve(args, Need::Problem)?;
    let exact = rc
        .exact
        .clone()
        .ok_or_else(|| CliError::Config(format!("problem '{}' has no exact solution", rc.name)))?;
    let n0 = match &rc.mesh {
        Some(config::MeshSource::Structured { n, .. }) => *n,
        Some(config::MeshSource::File(_)) => {
            return Err(CliError::Config("converge uses structured meshes, not a mesh file".into()))
        }
        None => 4,
    };
    if rc.levels == 0 {
        return Err(CliError::Config("levels must be positive".into()));
    }
    let opts = StudyOptions {
        assembly: rc.assembly.clone(),
        solver: rc.solver.clone(),
        ..StudyOptions::new(rc.dim, n0, rc.levels)
    };
    let outcome = convergence_study(&rc.coeffs, &exact, &opts);
    match &rc.csv_out {
        Some(p) => {
            let mut w = create(p)?;
            write_csv(&outcome.records, &mut w).and_then(|_| w.flush()).map_err(io_err(p))?;
        }
        None => write_csv(&outcome.records, std::io::stdout().lock()).map_err(io_err(Path::new("stdout")))?,
    }
    if let Some(e) = outcome.error {
        return Err(e.into());
    }
    if let Some(last) = outcome.records.last() {
        let fmt = |r: Option<f64>| r.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
        let msg = format!(
            "final rates: l2={} h1={} interp_h1={}",
            fmt(last.rate_l2),
            fmt(last.rate_h1),
            fmt(last.rate_interp_h1)
        );
        // keep stdout a clean CSV when the table goes there
        if rc.csv_out.is_some() {
            println!("{msg}");
        } else {
            eprintln!("{msg}");
        }
    }
    Ok(0)
}

fn cmd_check_monotone(args: &GlobalArgs) -> Result<u8, CliError> {
    let rc = resolve(args, Need::DiffusionOnly)?;
    let mesh = rc.load_mesh()?;
    let r = monotonicity_audit(&mesh, &rc.coeffs, rc.assembly.omega_degree)?;
    println!("verdict: {}", if r.monotone { "monotone" } else { "not_monotone" });
    println!("edges: {}", r.edge_sums.len());
    println!("min_edge_sum: {:.6e}", r.min_sum);
    println!("violators: {}", r.violators.len());
    for v in &r.violators {
        println!("violator {} {} {:.6e}", v.lo + 1, v.hi + 1, v.sum);
    }
    Ok(if r.monotone { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Converge(a) => cmd_converge(a),
        Command::CheckMonotone(a) => cmd_check_monotone(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("eafe: {e}");
            ExitCode::from(e.code())
        }
    }
}
