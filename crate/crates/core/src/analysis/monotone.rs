use std::collections::BTreeMap;

use crate::coeff::{CoefficientSet, Field};
use crate::linalg::{mmatrix_check, MMatrixVerdict};
use crate::mesh::SimplicialMesh;
use crate::quadrature::SimplexRule;
use crate::scheme::{assemble, edge_weights, AssemblyOptions};
use crate::{Point, Result};

/// Sum of `omega_E^T(D)` over the cells containing one global edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSum {
    pub lo: usize,
    pub hi: usize,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityReport {
    /// One entry per global edge, ordered by `(lo, hi)`.
    pub edge_sums: Vec<EdgeSum>,
    pub min_sum: f64,
    pub max_abs_omega: f64,
    pub violators: Vec<EdgeSum>,
    /// Every edge sum is `>= -1e-12 * max |omega|`.
    pub monotone: bool,
}

/// Checks that every edge weight sum is nonnegative, i.e. the mesh is
/// Delaunay in the metric of `D`. `D` is sampled with a simplex rule of
/// `omega_degree` when it varies.
pub fn monotonicity_audit(mesh: &SimplicialMesh, coeffs: &CoefficientSet, omega_degree: usize) -> Result<MonotonicityReport> {
    let rule = if coeffs.diffusion.is_constant() {
        SimplexRule::new(mesh.dim(), 1)
    } else {
        SimplexRule::new(mesh.dim(), omega_degree)
    };
    let mut sums: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut max_abs: f64 = 0.0;
    for k in 0..mesh.n_cells() {
        let geom = mesh.element_geometry(k)?;
        let omega = edge_weights(&geom, |x| coeffs.diffusion_at(x), &rule).map_err(|e| e.context(format!("element {k}")))?;
        let cell = mesh.cell(k);
        for (e, edge) in geom.edges().iter().enumerate() {
            let (a, b) = (cell[edge.i], cell[edge.j]);
            *sums.entry((a.min(b), a.max(b))).or_insert(0.0) += omega[e];
            max_abs = max_abs.max(omega[e].abs());
        }
    }
    let edge_sums: Vec<EdgeSum> = sums.into_iter().map(|((lo, hi), sum)| EdgeSum { lo, hi, sum }).collect();
    let tol = 1e-12 * max_abs;
    let violators: Vec<EdgeSum> = edge_sums.iter().filter(|e| e.sum < -tol).copied().collect();
    let min_sum = edge_sums.iter().map(|e| e.sum).fold(f64::INFINITY, f64::min);
    Ok(MonotonicityReport {
        monotone: violators.is_empty(),
        edge_sums,
        min_sum,
        max_abs_omega: max_abs,
        violators,
    })
}

/// Assembles the full scheme for the potential gradient `beta` (so that
/// `b = D beta`) with `gamma = 0` and the mesh's own boundary tags, and runs
/// the matrix-level M-matrix check on the constrained matrix.
pub fn monotonicity_cross_check(
    mesh: &SimplicialMesh,
    coeffs: &CoefficientSet,
    beta: Point,
    opts: &AssemblyOptions,
) -> Result<MMatrixVerdict> {
    let d = coeffs.diffusion.clone();
    let velocity = match &d {
        Field::Constant(t) => Field::Constant(t * beta),
        Field::Function(f) => {
            let f = f.clone();
            Field::function(move |x| f(x) * beta)
        }
    };
    let c = CoefficientSet {
        velocity,
        reaction: Field::Constant(0.0),
        ..coeffs.clone()
    };
    let sys = assemble(mesh, &c, opts)?;
    Ok(mmatrix_check(&sys.matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::tensor_from_rows;
    use crate::mesh::{generate_structured, BoundaryTag, Domain};

    #[test]
    fn structured_square_identity_is_monotone() {
        let m = generate_structured(2, 4, Domain::unit()).unwrap();
        let r = monotonicity_audit(&m, &CoefficientSet::new(2), 1).unwrap();
        assert!(r.monotone);
        assert_eq!(r.edge_sums.len(), m.edge_list().len());
        for e in &r.edge_sums {
            let (p, q) = (m.vertex(e.lo), m.vertex(e.hi));
            let diagonal = p[0] != q[0] && p[1] != q[1];
            let boundary = (p[0] == q[0] && (p[0] == 0.0 || p[0] == 1.0)) || (p[1] == q[1] && (p[1] == 0.0 || p[1] == 1.0));
            let expected = if diagonal {
                0.0
            } else if boundary {
                0.5
            } else {
                1.0
            };
            assert!((e.sum - expected).abs() < 1e-14, "{e:?}");
        }
        let v = monotonicity_cross_check(&m, &CoefficientSet::new(2), Point::new(20.0, 0.0, 0.0), &AssemblyOptions::default()).unwrap();
        assert!(v.sign_pattern && v.is_m_matrix);
    }

    #[test]
    fn obtuse_triangle_fails() {
        let m = SimplicialMesh::with_hull_boundary(
            2,
            vec![Point::new(0., 0., 0.), Point::new(4., 0., 0.), Point::new(2., 0.2, 0.)],
            vec![vec![0, 1, 2]],
            BoundaryTag::Dirichlet,
        )
        .unwrap();
        let r = monotonicity_audit(&m, &CoefficientSet::new(2), 1).unwrap();
        assert!(!r.monotone);
        assert_eq!(r.violators.len(), 1);
        assert_eq!((r.violators[0].lo, r.violators[0].hi), (0, 1));
        // omega = cot(angle at (2, 0.2)) / 2
        let angle = 2.0 * (2.0f64).atan2(0.2);
        assert!((r.violators[0].sum - 0.5 / angle.tan()).abs() < 1e-12);
    }

    #[test]
    fn strong_anisotropy_breaks_euclidean_delaunay() {
        let m = generate_structured(2, 4, Domain::unit()).unwrap();
        let c = CoefficientSet::new(2).with_diffusion(Field::Constant(tensor_from_rows(&[&[1., 0.], &[0., 100.]])));
        let r = monotonicity_audit(&m, &c, 1).unwrap();
        // diagonal weights: -|T| grad(l_i) . D grad(l_j) on the two triangles
        for e in &r.edge_sums {
            let (p, q) = (m.vertex(e.lo), m.vertex(e.hi));
            if p[0] != q[0] && p[1] != q[1] {
                assert!(e.sum.abs() < 1e-12);
            }
        }
        // a rotated anisotropy makes diagonals negative
        let c = CoefficientSet::new(2).with_diffusion(Field::Constant(tensor_from_rows(&[&[50.5, -49.5], &[-49.5, 50.5]])));
        let r = monotonicity_audit(&m, &c, 1).unwrap();
        assert!(!r.monotone);
        for v in &r.violators {
            let (p, q) = (m.vertex(v.lo), m.vertex(v.hi));
            assert!(p[0] != q[0] && p[1] != q[1]);
        }
    }
}
