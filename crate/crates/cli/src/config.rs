use std::path::{Path, PathBuf};

use eafe_core::analysis::ExactSolution;
use eafe_core::catalog;
use eafe_core::coeff::CoefficientSet;
use eafe_core::linalg::{Preconditioner, SolverOptions};
use eafe_core::mesh::{generate_structured, read_mesh, Domain, SimplicialMesh};
use eafe_core::scheme::{AssemblyOptions, EdgeRule};
use serde::Deserialize;

use crate::fields::build_coefficients;
use crate::{CliError, GlobalArgs};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub problem: ProblemSection,
    pub coefficients: Option<CoefficientSection>,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Catalog problem name.
    pub name: Option<String>,
    pub dim: Option<usize>,
    pub mesh: Option<PathBuf>,
    pub n: Option<usize>,
    pub levels: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSection {
    #[serde(rename = "D")]
    pub d: Option<String>,
    pub b: Option<String>,
    pub gamma: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    /// Dirichlet boundary values.
    pub u_d: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum AutoBool {
    Flag(bool),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub alpha_scaling: Option<bool>,
    pub constant_beta: Option<AutoBool>,
    pub edge_points: Option<usize>,
    pub edge_panels: Option<usize>,
    pub omega_degree: Option<usize>,
    pub mass_degree: Option<usize>,
    pub face_degree: Option<usize>,
    pub deterministic: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub restart: Option<usize>,
    pub preconditioner: Option<String>,
    pub dense_threshold: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub solution: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

pub enum MeshSource {
    File(SimplicialMesh),
    Structured { dim: usize, n: usize },
}

/// Everything a subcommand needs, validated.
pub struct RunConfig {
    pub name: String,
    pub dim: usize,
    pub coeffs: CoefficientSet,
    pub exact: Option<ExactSolution>,
    pub mesh: Option<MeshSource>,
    pub levels: usize,
    pub assembly: AssemblyOptions,
    pub solver: SolverOptions,
    /// Solution file for `solve`.
    pub solution_out: Option<PathBuf>,
    /// Table for `converge`; standard output when absent.
    pub csv_out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load_mesh(&self) -> Result<SimplicialMesh, CliError> {
        let mesh = match &self.mesh {
            Some(MeshSource::File(m)) => m.clone(),
            Some(MeshSource::Structured { dim, n }) => {
                generate_structured(*dim, *n, Domain::unit()).map_err(|e| CliError::Config(e.to_string()))?
            }
            None => return Err(CliError::Config("no mesh given: use --mesh PATH or --n INT".into())),
        };
        if mesh.dim() != self.dim {
            return Err(CliError::Config(format!(
                "mesh is {}D but the problem is {}D",
                mesh.dim(),
                self.dim
            )));
        }
        Ok(mesh)
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn unknown_problem(name: &str) -> CliError {
    CliError::Config(format!(
        "unknown problem '{name}'; available: {}",
        catalog::NAMES.join(", ")
    ))
}

/// What a subcommand requires of the problem definition.
#[derive(Clone, Copy, PartialEq)]
pub enum Need {
    /// Coefficients must be given.
    Problem,
    /// Coefficients default to `D = I` when none are given.
    DiffusionOnly,
}

pub fn resolve(args: &GlobalArgs, need: Need) -> Result<RunConfig, CliError> {
    let (file, base) = match &args.config {
        Some(p) => (read_config(p)?, p.parent().map(Path::to_path_buf).unwrap_or_default()),
        None => (ConfigFile::default(), PathBuf::new()),
    };

    let mesh_file = match (&args.mesh, &file.problem.mesh) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(p)) if args.n.is_none() => Some(base.join(p)),
        _ => None,
    };
    let n = args.n.or(if args.mesh.is_some() { None } else { file.problem.n });
    if args.mesh.is_some() && args.n.is_some() || mesh_file.is_some() && n.is_some() {
        return Err(CliError::Config("give exactly one mesh source (a mesh file or a structured n)".into()));
    }
    if let Some(p) = &mesh_file {
        if !p.is_file() {
            return Err(CliError::Config(format!("mesh file not found: {}", p.display())));
        }
    }

    let name = args.problem.clone().or(file.problem.name.clone());
    if name.is_some() && file.coefficients.is_some() {
        return Err(CliError::Config(
            "a problem may come from the catalog or from [coefficients], not both".into(),
        ));
    }
    let catalog_entry = match &name {
        Some(n) => Some(catalog::lookup(n).ok_or_else(|| unknown_problem(n))?),
        None => None,
    };

    let file_mesh = match &mesh_file {
        Some(p) => Some(read_mesh(p).map_err(|e| CliError::Config(e.to_string()))?),
        None => None,
    };
    let mesh_dim = file_mesh.as_ref().map(SimplicialMesh::dim);
    let dims = [args.dim, file.problem.dim, catalog_entry.as_ref().map(|p| p.dim), mesh_dim];
    let mut dim = None;
    for d in dims.into_iter().flatten() {
        if !(2..=3).contains(&d) {
            return Err(CliError::Config(format!("dimension must be 2 or 3, got {d}")));
        }
        match dim {
            None => dim = Some(d),
            Some(prev) if prev != d => {
                return Err(CliError::Config(format!("conflicting dimensions {prev} and {d}")))
            }
            _ => {}
        }
    }
    let dim = dim.unwrap_or(2);

    let (label, mut coeffs, exact) = match (catalog_entry, &file.coefficients) {
        (Some(p), _) => (p.name.to_string(), p.coeffs, p.exact),
        (None, Some(c)) => ("config".to_string(), build_coefficients(dim, c)?, None),
        (None, None) if need == Need::DiffusionOnly => ("identity".to_string(), CoefficientSet::new(dim), None),
        (None, None) => {
            return Err(CliError::Config(format!(
                "no problem given: use --problem NAME or a [coefficients] section; available: {}",
                catalog::NAMES.join(", ")
            )))
        }
    };

    let s = &file.scheme;
    if s.alpha_scaling == Some(true) {
        coeffs = coeffs.alpha_scaled();
    }
    let mut assembly = AssemblyOptions::default();
    let default_rule = EdgeRule::default();
    assembly.edge_rule = EdgeRule {
        points: s.edge_points.unwrap_or(default_rule.points),
        panels: s.edge_panels.unwrap_or(default_rule.panels),
    };
    if assembly.edge_rule.points == 0 || assembly.edge_rule.panels == 0 {
        return Err(CliError::Config("edge_points and edge_panels must be positive".into()));
    }
    assembly.omega_degree = s.omega_degree.unwrap_or(assembly.omega_degree);
    assembly.mass_degree = s.mass_degree.unwrap_or(assembly.mass_degree);
    assembly.face_degree = s.face_degree.unwrap_or(assembly.face_degree);
    assembly.constant_beta = match &s.constant_beta {
        None => None,
        Some(AutoBool::Flag(b)) => Some(*b),
        Some(AutoBool::Word(w)) if w == "auto" => None,
        Some(AutoBool::Word(w)) => {
            return Err(CliError::Config(format!("constant_beta must be true, false or \"auto\", got \"{w}\"")))
        }
    };
    assembly.deterministic = match args.deterministic {
        Some(flag) => flag.into(),
        None => s.deterministic.unwrap_or(true),
    };

    let v = &file.solver;
    let mut solver = SolverOptions::default();
    solver.tol = args.tol.or(v.tol).unwrap_or(solver.tol);
    if !(solver.tol > 0.0) {
        return Err(CliError::Config(format!("tolerance must be positive, got {}", solver.tol)));
    }
    solver.max_iter = v.max_iter.unwrap_or(solver.max_iter);
    solver.restart = v.restart.unwrap_or(solver.restart).max(1);
    solver.dense_threshold = v.dense_threshold.unwrap_or(solver.dense_threshold);
    if let Some(p) = &v.preconditioner {
        solver.preconditioner = match p.as_str() {
            "none" => Preconditioner::None,
            "jacobi" => Preconditioner::Jacobi,
            "ilu0" => Preconditioner::Ilu0,
            other => {
                return Err(CliError::Config(format!(
                    "unknown preconditioner '{other}' (none, jacobi, ilu0)"
                )))
            }
        };
    }

    let mesh = match (file_mesh, n) {
        (Some(m), _) => Some(MeshSource::File(m)),
        (None, Some(0)) => return Err(CliError::Config("n must be positive".into())),
        (None, Some(n)) => Some(MeshSource::Structured { dim, n }),
        (None, None) => None,
    };

    Ok(RunConfig {
        name: label,
        dim,
        coeffs,
        exact,
        mesh,
        levels: args.levels.or(file.problem.levels).unwrap_or(4),
        assembly,
        solver,
        solution_out: args.out.clone().or(file.output.solution.map(|p| base.join(p))),
        csv_out: args.out.clone().or(file.output.csv.map(|p| base.join(p))),
    })
}
