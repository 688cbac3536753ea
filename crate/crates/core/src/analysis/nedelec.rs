use crate::mesh::ElementGeometry;
use crate::quadrature::SimplexRule;
use crate::scheme::edge_weights;
use crate::{Point, Result, Tensor};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NedelecResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Largest single term on either side, for relative comparisons.
    pub scale: f64,
}

/// Checks, for a constant field `j` and a linear `v` given by its vertex
/// values, that
///
/// ```text
/// int_T D j . grad v = sum_E omega_E(D) (j . tau_E) (v_i - v_j)
/// ```
///
/// where the left side is computed by expanding `j` in the lowest order
/// Nedelec basis `phi_E = lambda_j grad(lambda_i) - lambda_i grad(lambda_j)`,
/// oriented so that `phi_E . tau_E = 1`, and integrating each basis function
/// exactly.
pub fn nedelec_identity_test(geom: &ElementGeometry, d: &Tensor, j: &Point, v: &[f64]) -> Result<NedelecResidual> {
    let gl = geom.grad_lambda();
    let grad_v: Point = gl.iter().zip(v).map(|(g, vk)| g * *vk).sum();
    let omega = edge_weights(geom, |_| Ok(*d), &SimplexRule::new(geom.dim, 1))?;
    let mean = geom.measure / geom.n_vertices() as f64;
    let (mut lhs, mut rhs, mut scale) = (0.0, 0.0, 0.0f64);
    for (e, edge) in geom.edges().iter().enumerate() {
        let jt = j.dot(&edge.tau);
        let phi_int = (gl[edge.i] - gl[edge.j]) * mean;
        let l = jt * (d * phi_int).dot(&grad_v);
        let r = omega[e] * jt * (v[edge.i] - v[edge.j]);
        lhs += l;
        rhs += r;
        scale = scale.max(l.abs()).max(r.abs());
    }
    Ok(NedelecResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::tensor_from_rows;

    #[test]
    fn unit_triangle() {
        let q = [Point::new(0., 0., 0.), Point::new(1., 0., 0.), Point::new(0., 1., 0.)];
        let g = ElementGeometry::from_vertices(2, &q, 0, 1.0).unwrap();
        let d = tensor_from_rows(&[&[2., 0.5], &[0.5, 1.]]);
        let j = Point::new(0.3, -1.2, 0.0);
        let v = [0.4, -0.7, 1.3];
        let r = nedelec_identity_test(&g, &d, &j, &v).unwrap();
        // direct value: |T| (D j) . grad v
        let grad_v = Point::new(v[1] - v[0], v[2] - v[0], 0.0);
        assert!((r.lhs - 0.5 * (d * j).dot(&grad_v)).abs() < 1e-14);
        assert!(r.residual < 1e-13);
    }

    #[test]
    fn zero_flux_and_right_angle_edge() {
        let q = [Point::new(0., 0., 0.), Point::new(1., 0., 0.), Point::new(0., 1., 0.)];
        let g = ElementGeometry::from_vertices(2, &q, 0, 1.0).unwrap();
        let r = nedelec_identity_test(&g, &Tensor::identity(), &Point::zeros(), &[0.3, 0.1, 2.0]).unwrap();
        assert_eq!(r.residual, 0.0);
        // v = y, J = (1, 0): J . grad v = 0, and the only edge with both
        // J . tau != 0 and v_i != v_j is (1, 2), whose weight vanishes
        let r = nedelec_identity_test(&g, &Tensor::identity(), &Point::new(1.0, 0.0, 0.0), &[0.0, 0.0, 1.0]).unwrap();
        assert!(r.lhs.abs() < 1e-15 && r.rhs.abs() < 1e-15);
        assert!(r.residual <= 1e-14);
    }
}
