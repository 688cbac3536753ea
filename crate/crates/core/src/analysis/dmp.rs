use super::monotone::monotonicity_audit;
use crate::coeff::{CoefficientSet, Field};
use crate::linalg::{solve, SolveReport, SolverOptions};
use crate::mesh::SimplicialMesh;
use crate::scheme::{assemble_unconstrained, AssemblyOptions};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct DmpOutcome {
    pub solution: Vec<f64>,
    /// Range of the prescribed boundary values.
    pub bounds: (f64, f64),
    /// Range of the discrete solution.
    pub range: (f64, f64),
    pub tolerance: f64,
    pub passed: bool,
    /// Whether the mesh audit guarantees the principle. When false the
    /// outcome is an observation only.
    pub guaranteed: bool,
    pub report: SolveReport,
}

/// Solves with `f = 0` and nodal Dirichlet data `boundary` (indexed by
/// vertex, only Dirichlet vertices read) and checks that the solution stays
/// within the boundary range up to `1e-10 * (hi - lo + 1)`.
pub fn dmp_experiment(
    mesh: &SimplicialMesh,
    coeffs: &CoefficientSet,
    boundary: &[f64],
    assembly: &AssemblyOptions,
    solver: &SolverOptions,
) -> Result<DmpOutcome> {
    let c = CoefficientSet {
        source: Field::Constant(0.0),
        neumann_flux: Field::Constant(0.0),
        ..coeffs.clone()
    };
    let mut sys = assemble_unconstrained(mesh, &c, assembly)?;
    sys.apply_dirichlet(boundary)?;
    let (lo, hi) = sys
        .dirichlet_mask
        .iter()
        .zip(boundary)
        .filter(|(m, _)| **m)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, &v)| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return Err(Error::InvalidArgument("no Dirichlet vertices".into()));
    }
    let (u, report) = solve(&sys.matrix, &sys.rhs, solver)?;
    if !report.converged {
        return Err(Error::Solver(format!(
                "residual {:.3e} after {} iterations ({})",
                report.residual, report.iterations, report.method
        )));
    }
    let range = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let tolerance = 1e-10 * (hi - lo + 1.0);
    let passed = range.0 >= lo - tolerance && range.1 <= hi + tolerance;
    let audit = monotonicity_audit(mesh, coeffs, assembly.omega_degree)?;
    let reaction_ok = match &coeffs.reaction {
        Field::Constant(g) => *g >= 0.0,
        Field::Function(_) => true,
    };
    Ok(DmpOutcome {
        solution: u,
        bounds: (lo, hi),
        range,
        tolerance,
        passed,
        guaranteed: audit.monotone && reaction_ok,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, Domain};
    use crate::Point;

    #[test]
    fn convection_dominated_stays_bounded() {
        let m = generate_structured(2, 8, Domain::unit()).unwrap();
        let c = CoefficientSet::new(2).with_velocity(Field::Constant(Point::new(1e3, 4e2, 0.0)));
        let g: Vec<f64> = m.vertices().iter().map(|x| if x[0] < 0.5 { 1.0 } else { -2.0 }).collect();
        let out = dmp_experiment(&m, &c, &g, &AssemblyOptions::default(), &SolverOptions::default()).unwrap();
        assert!(out.passed && out.guaranteed);
        assert_eq!(out.bounds, (-2.0, 1.0));
    }

    #[test]
    fn constant_data_gives_constant_solution() {
        let m = generate_structured(2, 6, Domain::unit()).unwrap();
        let c = CoefficientSet::new(2).with_velocity(Field::Constant(Point::new(-3.0, 7.0, 0.0)));
        let out = dmp_experiment(&m, &c, &vec![0.5; m.n_vertices()], &AssemblyOptions::default(), &SolverOptions::default()).unwrap();
        assert!(out.solution.iter().all(|v| (v - 0.5).abs() < 1e-12));
        assert!(out.passed);
    }

    #[test]
    fn obtuse_mesh_is_not_guaranteed() {
        use crate::mesh::{BoundaryTag, SimplicialMesh};
        let m = SimplicialMesh::with_hull_boundary(
            2,
            vec![Point::new(0., 0., 0.), Point::new(4., 0., 0.), Point::new(2., 0.2, 0.)],
            vec![vec![0, 1, 2]],
            BoundaryTag::Dirichlet,
        )
        .unwrap();
        let out = dmp_experiment(&m, &CoefficientSet::new(2), &[0.0, 1.0, 0.3], &AssemblyOptions::default(), &SolverOptions::default()).unwrap();
        assert!(!out.guaranteed);
        assert_eq!(out.range, (0.0, 1.0));
    }
}
