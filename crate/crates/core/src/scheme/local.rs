use super::edge::{edge_exponential_constant, edge_exponential_data, edge_weights, EdgeQuadrature};
use super::AssemblyOptions;
use crate::coeff::CoefficientSet;
use crate::mesh::ElementGeometry;
use crate::quadrature::SimplexRule;
use crate::{Point, Result, Tensor};

/// Exponential and diffusion data of one (element, edge) incidence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeData {
    pub cell: usize,
    /// Local endpoints, `tau = q_i - q_j`.
    pub i: usize,
    pub j: usize,
    pub omega: f64,
    pub dpsi: f64,
    pub harm_gauged: f64,
    pub ci: f64,
    pub cj: f64,
}

/// Dense `(dim + 1) x (dim + 1)` element matrix; rows are test functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalMatrix {
    pub n: usize,
    pub a: [[f64; 4]; 4],
}

impl LocalMatrix {
    pub fn zeros(n: usize) -> Self {
        LocalMatrix { n, a: [[0.0; 4]; 4] }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.a[r][c]
    }
}

/// Rules shared by all elements of one assembly.
pub(crate) struct Rules {
    pub edge: EdgeQuadrature,
    pub omega: SimplexRule,
    pub mass: SimplexRule,
    pub omega_constant: SimplexRule,
}

impl Rules {
    pub fn new(dim: usize, opts: &AssemblyOptions) -> Self {
        Rules {
            edge: EdgeQuadrature::new(opts.edge_rule),
            omega: SimplexRule::new(dim, opts.omega_degree),
            mass: SimplexRule::new(dim, opts.mass_degree),
            omega_constant: SimplexRule::new(dim, 1),
        }
    }
}

pub(crate) fn edge_data_with(
    geom: &ElementGeometry,
    coeffs: &CoefficientSet,
    opts: &AssemblyOptions,
    rules: &Rules,
) -> Result<Vec<EdgeData>> {
    let scaled = coeffs.alpha_scaling;
    let tensor_at = |x: &Point| -> Result<Tensor> {
        if scaled {
            Ok(coeffs.scaled_fields(x)?.0)
        } else {
            coeffs.diffusion_at(x)
        }
    };
    let omega_rule = if coeffs.diffusion.is_constant() {
        &rules.omega_constant
    } else {
        &rules.omega
    };
    let omega = edge_weights(geom, tensor_at, omega_rule)?;

    let constant = opts.constant_beta.unwrap_or_else(|| coeffs.beta_is_constant());
    let center = geom.point(&[1.0 / (geom.dim as f64 + 1.0); 4][..=geom.dim]);
    let (beta_c, weight_c) = if constant {
        let w = if scaled { 1.0 / coeffs.alpha(&center)? } else { 1.0 };
        (coeffs.beta(&center)?, w)
    } else {
        (Point::zeros(), 1.0)
    };

    let q = geom.vertices();
    let mut out = Vec::with_capacity(geom.edges().len());
    for (e, edge) in geom.edges().iter().enumerate() {
        let ex = if constant {
            edge_exponential_constant(beta_c.dot(&edge.tau), weight_c)
        } else {
            edge_exponential_data(
                &q[edge.j],
                &edge.tau,
                |x| coeffs.beta(x),
                |x| if scaled { Ok(1.0 / coeffs.alpha(x)?) } else { Ok(1.0) },
                &rules.edge,
                opts.gauge.for_edge(geom.cell, e),
            )?
        };
        out.push(EdgeData {
            cell: geom.cell,
            i: edge.i,
            j: edge.j,
            omega: omega[e],
            dpsi: ex.dpsi,
            harm_gauged: ex.harm_gauged,
            ci: ex.ci,
            cj: ex.cj,
        });
    }
    Ok(out)
}

pub(crate) fn local_matrix_from(n: usize, edges: &[EdgeData]) -> LocalMatrix {
    let mut m = LocalMatrix::zeros(n);
    for e in edges {
        let (ci, cj) = (e.omega * e.ci, e.omega * e.cj);
        m.a[e.i][e.i] += ci;
        m.a[e.i][e.j] -= cj;
        m.a[e.j][e.i] -= ci;
        m.a[e.j][e.j] += cj;
    }
    m
}

/// Edge data of every local edge of `geom`.
pub fn edge_data(geom: &ElementGeometry, coeffs: &CoefficientSet, opts: &AssemblyOptions) -> Result<Vec<EdgeData>> {
    edge_data_with(geom, coeffs, opts, &Rules::new(geom.dim, opts))
}

/// The exponentially fitted element matrix (convection-diffusion part only).
pub fn local_eafe_matrix(geom: &ElementGeometry, coeffs: &CoefficientSet, opts: &AssemblyOptions) -> Result<LocalMatrix> {
    Ok(local_matrix_from(geom.n_vertices(), &edge_data(geom, coeffs, opts)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{tensor_from_rows, Field};

    fn p2(x: f64, y: f64) -> Point {
        Point::new(x, y, 0.0)
    }

    fn unit_triangle() -> ElementGeometry {
        ElementGeometry::from_vertices(2, &[p2(0., 0.), p2(1., 0.), p2(0., 1.)], 0, 1.0).unwrap()
    }

    #[test]
    fn zero_velocity_gives_p1_stiffness() {
        let g = unit_triangle();
        let d = tensor_from_rows(&[&[2., 0.5], &[0.5, 1.]]);
        let c = CoefficientSet::new(2).with_diffusion(Field::Constant(d));
        let m = local_eafe_matrix(&g, &c, &AssemblyOptions::default()).unwrap();
        let gl = g.grad_lambda();
        for r in 0..3 {
            for s in 0..3 {
                let k = g.measure * gl[r].dot(&(d * gl[s]));
                assert!((m.get(r, s) - k).abs() <= 1e-13, "({r},{s})");
            }
        }
    }

    #[test]
    fn constant_beta_unit_triangle_pair() {
        let g = unit_triangle();
        let c = CoefficientSet::new(2).with_velocity(Field::Constant(p2(1., 0.)));
        let ed = edge_data(&g, &c, &AssemblyOptions::default()).unwrap();
        // edge (0, 1): tau = (-1, 0), t = -1
        assert_eq!((ed[0].i, ed[0].j), (0, 1));
        assert!((ed[0].dpsi + 1.0).abs() < 1e-15);
        assert!((ed[0].omega * ed[0].ci - 0.290_988_353_434_663).abs() < 1e-12);
        assert!((ed[0].omega * ed[0].cj - 0.790_988_353_434_663).abs() < 1e-12);
    }

    #[test]
    fn columns_sum_to_zero() {
        let g = ElementGeometry::from_vertices(
            3,
            &[
                Point::new(0.1, 0., 0.),
                Point::new(1., 0.2, 0.),
                Point::new(0., 1., 0.3),
                Point::new(0.2, 0.3, 1.),
            ],
            0,
            1.0,
        )
        .unwrap();
        let c = CoefficientSet::new(3)
            .with_velocity(Field::function(|x: &Point| Point::new(3.0 * x[1], -x[0], 1.0)))
            .with_diffusion(Field::function(|x: &Point| Tensor::identity() * (1.0 + x[2])));
        let m = local_eafe_matrix(&g, &c, &AssemblyOptions::default()).unwrap();
        for col in 0..4 {
            let s: f64 = (0..4).map(|r| m.get(r, col)).sum();
            assert!(s.abs() < 1e-13);
        }
    }
}
