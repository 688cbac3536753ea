use std::io::Write;

use super::norms::{error_norms, ExactSolution};
use crate::coeff::CoefficientSet;
use crate::linalg::{solve, SolveReport, SolverOptions};
use crate::mesh::{generate_structured, Domain};
use crate::scheme::{assemble, AssemblyOptions};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "level,h,dofs,err_l2,err_h1_semi,err_h1,err_interp_h1,rate_l2,rate_h1";

#[derive(Clone, Debug)]
pub struct StudyOptions {
    pub dim: usize,
    /// Subdivisions per side on the coarsest level; doubled on every level.
    pub n0: usize,
    pub levels: usize,
    pub domain: Domain,
    pub assembly: AssemblyOptions,
    pub solver: SolverOptions,
    /// Simplex rule degree for the error integrals.
    pub quad_degree: usize,
}

impl StudyOptions {
    pub fn new(dim: usize, n0: usize, levels: usize) -> Self {
        StudyOptions {
            dim,
            n0,
            levels,
            domain: Domain::unit(),
            assembly: AssemblyOptions::default(),
            solver: SolverOptions::default(),
            quad_degree: 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub err_l2: f64,
    pub err_h1_semi: f64,
    pub err_h1: f64,
    pub err_interp_h1: f64,
    /// `log2(e_{2h} / e_h)` against the previous level.
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
    pub rate_h1_semi: Option<f64>,
    pub rate_interp_h1: Option<f64>,
    pub solve: SolveReport,
}

/// Completed levels, plus the error that stopped the study, if any.
#[derive(Debug)]
pub struct StudyOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub error: Option<Error>,
}

fn rate(prev: f64, cur: f64) -> f64 {
    (prev / cur).log2()
}

/// Solves on structured meshes with `n0, 2 n0, 4 n0, ...` subdivisions and
/// records error norms against `exact`. A failing level stops the study and
/// keeps the levels done so far.
pub fn convergence_study(coeffs: &CoefficientSet, exact: &ExactSolution, opts: &StudyOptions) -> StudyOutcome {
    let mut records: Vec<ConvergenceRecord> = Vec::with_capacity(opts.levels);
    for level in 0..opts.levels {
        let n = opts.n0 << level;
        match run_level(coeffs, exact, opts, level, n) {
            Ok(mut rec) => {
                if let Some(p) = records.last() {
                    rec.rate_l2 = Some(rate(p.err_l2, rec.err_l2));
                    rec.rate_h1 = Some(rate(p.err_h1, rec.err_h1));
                    rec.rate_h1_semi = Some(rate(p.err_h1_semi, rec.err_h1_semi));
                    rec.rate_interp_h1 = Some(rate(p.err_interp_h1, rec.err_interp_h1));
                }
                records.push(rec);
            }
            Err(e) => {
                return StudyOutcome {
                    records,
                    error: Some(e.context(format!("level {level} (n = {n})"))),
                }
            }
        }
    }
    StudyOutcome { records, error: None }
}

fn run_level(
    coeffs: &CoefficientSet,
    exact: &ExactSolution,
    opts: &StudyOptions,
    level: usize,
    n: usize,
) -> Result<ConvergenceRecord> {
    let mesh = generate_structured(opts.dim, n, opts.domain)?;
    let sys = assemble(&mesh, coeffs, &opts.assembly)?;
    let (uh, report) = solve(&sys.matrix, &sys.rhs, &opts.solver)?;
    if !report.converged {
        return Err(Error::Solver(format!(
            "residual {:.3e} after {} iterations ({})",
            report.residual, report.iterations, report.method
        )));
    }
    let e = error_norms(&mesh, &uh, exact, opts.quad_degree)?;
    Ok(ConvergenceRecord {
        level,
        n,
        h: mesh.max_diameter(),
        dofs: mesh.n_vertices(),
        err_l2: e.exact.l2,
        err_h1_semi: e.exact.h1_semi,
        err_h1: e.exact.h1,
        err_interp_h1: e.interp.h1,
        rate_l2: None,
        rate_h1: None,
        rate_h1_semi: None,
        rate_interp_h1: None,
        solve: report,
    })
}

/// Writes the records as CSV with [`CSV_HEADER`]; rates are empty on the
/// first level.
pub fn write_csv<W: Write>(records: &[ConvergenceRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let opt = |r: Option<f64>| r.map(|v| format!("{v:.6}")).unwrap_or_default();
    for r in records {
        writeln!(
            w,
            "{},{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{}",
            r.level,
            r.h,
            r.dofs,
            r.err_l2,
            r.err_h1_semi,
            r.err_h1,
            r.err_interp_h1,
            opt(r.rate_l2),
            opt(r.rate_h1)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Field;
    use crate::Point;
    use std::f64::consts::PI;

    fn poisson() -> (CoefficientSet, ExactSolution) {
        let c = CoefficientSet::new(2).with_source(Field::function(|x| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()));
        let ex = ExactSolution::new(
            |x| (PI * x[0]).sin() * (PI * x[1]).sin(),
            |x| Point::new(PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos(), 0.0),
        );
        (c, ex)
    }

    #[test]
    fn rates_and_csv() {
        let (c, ex) = poisson();
        let out = convergence_study(&c, &ex, &StudyOptions::new(2, 4, 3));
        assert!(out.error.is_none());
        let r = &out.records;
        assert_eq!(r.len(), 3);
        assert!(r[0].rate_h1.is_none());
        for k in 1..3 {
            assert_eq!(r[k].rate_l2.unwrap(), (r[k - 1].err_l2 / r[k].err_l2).log2());
            assert!(r[k].rate_h1.unwrap() > 0.8);
        }
        let mut buf = Vec::new();
        write_csv(r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].ends_with(",,"));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn failure_keeps_completed_levels() {
        let (c, ex) = poisson();
        let mut opts = StudyOptions::new(2, 2, 3);
        opts.solver.dense_threshold = 10;
        opts.solver.max_iter = 1;
        opts.solver.restart = 1;
        let out = convergence_study(&c, &ex, &opts);
        // level 0 (9 dofs) goes through the dense path, level 1 fails
        assert_eq!(out.records.len(), 1);
        let msg = out.error.unwrap().to_string();
        assert!(msg.contains("level 1"), "{msg}");
    }
}
