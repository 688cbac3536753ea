use std::sync::Arc;

use rayon::prelude::*;

use crate::mesh::SimplicialMesh;
use crate::quadrature::SimplexRule;
use crate::{Error, Point, Result};

/// A reference solution and its gradient.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    pub grad: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
}

impl ExactSolution {
    pub fn new(
        u: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        ExactSolution {
            u: Arc::new(u),
            grad: Arc::new(grad),
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        (self.u)(x)
    }

    pub fn gradient(&self, x: &Point) -> Point {
        (self.grad)(x)
    }
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ExactSolution")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormTriple {
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
}

impl NormTriple {
    fn from_squares(l2: f64, semi: f64) -> Self {
        NormTriple {
            l2: l2.sqrt(),
            h1_semi: semi.sqrt(),
            h1: (l2 + semi).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    /// Norms of `u - u_h`.
    pub exact: NormTriple,
    /// Norms of `u_I - u_h` with `u_I` the nodal interpolant of `u`.
    pub interp: NormTriple,
}

/// Error norms of the piecewise linear `uh` against `exact`, integrated with
/// a simplex rule of the given degree on every element.
pub fn error_norms(mesh: &SimplicialMesh, uh: &[f64], exact: &ExactSolution, degree: usize) -> Result<ErrorNorms> {
    if uh.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "{} nodal values for {} vertices",
            uh.len(),
            mesh.n_vertices()
        )));
    }
    let rule = SimplexRule::new(mesh.dim(), degree);
    let parts: Vec<[f64; 4]> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|k| {
            let geom = mesh.element_geometry(k)?;
            let cell = mesh.cell(k);
            let gl = geom.grad_lambda();
            let grad_h: Point = cell.iter().zip(gl).map(|(&v, g)| g * uh[v]).sum();
            let grad_d: Point = cell
                .iter()
                .zip(gl)
                .map(|(&v, g)| g * (exact.value(mesh.vertex(v)) - uh[v]))
                .sum();
            let mut acc = [0.0; 4];
            for (bary, w) in &rule.points {
                let x = geom.point(bary);
                let lam = &bary[..cell.len()];
                let vh: f64 = cell.iter().zip(lam).map(|(&v, l)| uh[v] * l).sum();
                let vi: f64 = cell.iter().zip(lam).map(|(&v, l)| exact.value(mesh.vertex(v)) * l).sum();
                acc[0] += w * (exact.value(&x) - vh).powi(2);
                acc[1] += w * (exact.gradient(&x) - grad_h).norm_squared();
                acc[2] += w * (vi - vh).powi(2);
                acc[3] += w * grad_d.norm_squared();
            }
            Ok(acc.map(|a| a * geom.measure))
        })
        .collect::<Result<_>>()?;
    let mut total = [0.0; 4];
    for p in &parts {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(ErrorNorms {
        exact: NormTriple::from_squares(total[0], total[1]),
        interp: NormTriple::from_squares(total[2], total[3]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, Domain};
    use crate::scheme::interpolate;

    #[test]
    fn linear_function_is_reproduced() {
        let m = generate_structured(2, 3, Domain::unit()).unwrap();
        let ex = ExactSolution::new(|x| 1.0 + 2.0 * x[0] - x[1], |_| Point::new(2.0, -1.0, 0.0));
        let uh = interpolate(&m, |x| ex.value(x));
        let e = error_norms(&m, &uh, &ex, 4).unwrap();
        assert!(e.exact.h1 < 1e-13 && e.interp.h1 < 1e-13);
    }

    #[test]
    fn zero_discrete_gives_norm_of_exact() {
        // ||x y||_L2 on the unit square is 1/3, |x y|_H1^2 = 2/3
        let m = generate_structured(2, 2, Domain::unit()).unwrap();
        let ex = ExactSolution::new(|x| x[0] * x[1], |x| Point::new(x[1], x[0], 0.0));
        let e = error_norms(&m, &vec![0.0; m.n_vertices()], &ex, 4).unwrap();
        assert!((e.exact.l2 - 1.0 / 3.0).abs() < 1e-13);
        assert!((e.exact.h1_semi - (2.0f64 / 3.0).sqrt()).abs() < 1e-13);
        assert!((e.exact.h1 - (1.0f64 / 9.0 + 2.0 / 3.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn length_mismatch() {
        let m = generate_structured(2, 2, Domain::unit()).unwrap();
        let ex = ExactSolution::new(|_| 0.0, |_| Point::zeros());
        assert!(error_norms(&m, &[0.0], &ex, 2).is_err());
    }
}
