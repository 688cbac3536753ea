//! Per-edge exponential data and the diffusion edge weights.

use super::bernoulli::bernoulli;
use crate::mesh::ElementGeometry;
use crate::quadrature::{gauss_legendre, SimplexRule};
use crate::{Point, Result, Tensor};

/// Composite Gauss-Legendre rule along an edge: `panels` equal panels with
/// `points` nodes each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRule {
    pub points: usize,
    pub panels: usize,
}

impl Default for EdgeRule {
    fn default() -> Self {
        EdgeRule {
            points: 4,
            panels: 1,
        }
    }
}

/// Precomputed nodes for an [`EdgeRule`].
#[derive(Clone, Debug)]
pub struct EdgeQuadrature {
    rule: EdgeRule,
    nodes: Vec<(f64, f64)>,
}

impl EdgeQuadrature {
    pub fn new(rule: EdgeRule) -> Self {
        assert!(rule.points >= 1 && rule.panels >= 1, "edge rule needs points and panels");
        EdgeQuadrature {
            rule,
            nodes: gauss_legendre(rule.points),
        }
    }

    pub fn rule(&self) -> EdgeRule {
        self.rule
    }
}

/// Additive constant fixing the edge potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gauge {
    /// Subtract the largest sampled potential (overflow safe).
    MaxShift,
    /// `psi(q_j) = 0`.
    Tail,
    /// `psi(q_j) = c`.
    Offset(f64),
}

/// Exponential data of one oriented edge `q_j -> q_i`.
///
/// The edge flux moment is `ci u_i - cj u_j`; `(ci, cj)` does not depend on
/// the gauge. `harm_gauged` is the harmonic average in the gauge
/// `psi(q_j) = 0` and equals `cj`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeExponential {
    pub dpsi: f64,
    pub harm_gauged: f64,
    pub ci: f64,
    pub cj: f64,
}

/// Closed form for a potential gradient constant along the edge:
/// `t = beta . tau`, `(ci, cj) = (B(-t), B(t)) / w` where `w` is a constant
/// weight inside the averaged integral.
pub fn edge_exponential_constant(t: f64, weight: f64) -> EdgeExponential {
    let cj = bernoulli(t) / weight;
    EdgeExponential {
        dpsi: t,
        harm_gauged: cj,
        ci: bernoulli(-t) / weight,
        cj,
    }
}

/// Edge potential and harmonic average by quadrature.
///
/// `psi(s) = int_0^s beta(q_j + r tau) . tau dr` for `s` in `[0, 1]`, and the
/// averaged integral is `int_0^1 weight(x(s)) e^psi(s) ds`; `weight` is one
/// for the plain scheme and `1 / alpha` for the alpha-scaled flux.
pub fn edge_exponential_data<F, W>(
    qj: &Point,
    tau: &Point,
    potential_grad: F,
    weight: W,
    quad: &EdgeQuadrature,
    gauge: Gauge,
) -> Result<EdgeExponential>
where
    F: Fn(&Point) -> Result<Point>,
    W: Fn(&Point) -> Result<f64>,
{
    let panels = quad.rule.panels;
    let h = 1.0 / panels as f64;
    let g = |s: f64| -> Result<f64> { Ok(potential_grad(&(qj + tau * s))?.dot(tau)) };

    // (psi, weight * quadrature weight) at every outer node
    let mut samples = Vec::with_capacity(panels * quad.nodes.len());
    let mut psi_start = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for &(s, w) in &quad.nodes {
            let sigma = a + s * h;
            let len = sigma - a;
            let mut psi = psi_start;
            for &(r, wr) in &quad.nodes {
                psi += wr * len * g(a + r * len)?;
            }
            samples.push((psi, w * h * weight(&(qj + tau * sigma))?));
        }
        for &(s, w) in &quad.nodes {
            psi_start += w * h * g(a + s * h)?;
        }
    }
    let dpsi = psi_start;

    let evaluate = |shift: f64| {
        let integral: f64 = samples.iter().map(|&(psi, w)| w * (psi + shift).exp()).sum();
        ((dpsi + shift).exp() / integral, shift.exp() / integral)
    };
    let max_shift = || {
        -samples
            .iter()
            .map(|s| s.0)
            .fold(dpsi.max(0.0), f64::max)
    };
    let shift = match gauge {
        Gauge::MaxShift => max_shift(),
        Gauge::Tail => 0.0,
        Gauge::Offset(c) => c,
    };
    let (mut ci, mut cj) = evaluate(shift);
    if !(ci.is_finite() && cj.is_finite()) {
        (ci, cj) = evaluate(max_shift());
    }
    Ok(EdgeExponential {
        dpsi,
        harm_gauged: cj,
        ci,
        cj,
    })
}

/// `omega_E = -int_T D grad(lambda_i) . grad(lambda_j)` for every local
/// edge, with `D` sampled at the points of `rule`.
pub fn edge_weights<F>(geom: &ElementGeometry, tensor_at: F, rule: &SimplexRule) -> Result<[f64; 6]>
where
    F: Fn(&Point) -> Result<Tensor>,
{
    let gl = geom.grad_lambda();
    let mut omega = [0.0; 6];
    for (bary, w) in &rule.points {
        let d = tensor_at(&geom.point(bary))?;
        for (e, edge) in geom.edges().iter().enumerate() {
            omega[e] -= w * gl[edge.i].dot(&(d * gl[edge.j]));
        }
    }
    for o in omega.iter_mut() {
        *o *= geom.measure;
    }
    Ok(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::tensor_from_rows;

    fn p2(x: f64, y: f64) -> Point {
        Point::new(x, y, 0.0)
    }

    fn one(_: &Point) -> Result<f64> {
        Ok(1.0)
    }

    /// Adaptive Simpson, used as an oracle independent of Gauss rules.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    #[test]
    fn constant_beta_unit_edge() {
        let q = EdgeQuadrature::new(EdgeRule { points: 32, panels: 1 });
        let e = edge_exponential_data(&p2(0., 0.), &p2(1., 0.), |_| Ok(p2(1., 0.)), one, &q, Gauge::Tail).unwrap();
        assert!((e.dpsi - 1.0).abs() < 1e-15);
        assert!((e.harm_gauged - 0.581_976_706_869_326_4).abs() < 1e-14);
        let c = edge_exponential_constant(1.0, 1.0);
        assert!((c.harm_gauged - e.harm_gauged).abs() < 1e-14);
    }

    #[test]
    fn zero_beta_gives_unit_average() {
        let q = EdgeQuadrature::new(EdgeRule::default());
        let e = edge_exponential_data(&p2(0.3, 0.1), &p2(-1., 2.), |_| Ok(Point::zeros()), one, &q, Gauge::MaxShift).unwrap();
        assert_eq!(e.dpsi, 0.0);
        for v in [e.harm_gauged, e.ci, e.cj] {
            assert!((v - 1.0).abs() < 1e-15);
        }
        let c = edge_exponential_constant(0.0, 1.0);
        assert_eq!((c.ci, c.cj), (1.0, 1.0));
    }

    #[test]
    fn linear_beta_against_simpson_oracle() {
        let integral = simpson(&|s: f64| (0.5 * s * s).exp(), 0.0, 1.0, 1e-14);
        assert!((integral - 1.194_958).abs() < 1e-6);
        let q = EdgeQuadrature::new(EdgeRule { points: 8, panels: 2 });
        let e = edge_exponential_data(&p2(0., 0.), &p2(1., 0.), |x| Ok(p2(x[0], 0.)), one, &q, Gauge::Tail).unwrap();
        assert!((e.dpsi - 0.5).abs() < 1e-14);
        assert!((e.harm_gauged - 1.0 / integral).abs() < 1e-12);
        assert!((e.harm_gauged - 0.836_849).abs() < 1e-6);
    }

    #[test]
    fn quadrature_matches_closed_form_at_order_eight() {
        let q = EdgeQuadrature::new(EdgeRule { points: 8, panels: 1 });
        for k in -40..=40 {
            let t = k as f64 * 0.125;
            let tau = p2(0.3, -0.7);
            let beta = tau * (t / tau.norm_squared());
            let e = edge_exponential_data(&p2(1., 1.), &tau, |_| Ok(beta), one, &q, Gauge::MaxShift).unwrap();
            let c = edge_exponential_constant(t, 1.0);
            assert!((e.dpsi - t).abs() < 1e-12);
            assert!((e.harm_gauged - c.harm_gauged).abs() <= 1e-10 * c.harm_gauged.max(1.0), "t={t}");
            assert!((e.ci - c.ci).abs() <= 1e-10 * c.ci.max(1.0), "t={t}");
        }
    }

    #[test]
    fn coefficient_pair_is_gauge_invariant() {
        let q = EdgeQuadrature::new(EdgeRule { points: 6, panels: 2 });
        let beta = |x: &Point| Ok(p2(2.0 + x[1], -x[0] * x[0]));
        let base = edge_exponential_data(&p2(0.2, 0.1), &p2(0.5, 0.4), beta, one, &q, Gauge::Tail).unwrap();
        for c in [-30.0, -3.3, 0.0, 1.7, 25.0] {
            let e = edge_exponential_data(&p2(0.2, 0.1), &p2(0.5, 0.4), beta, one, &q, Gauge::Offset(c)).unwrap();
            assert!((e.ci / base.ci - 1.0).abs() < 1e-12);
            assert!((e.cj / base.cj - 1.0).abs() < 1e-12);
            assert_eq!(e.dpsi, base.dpsi);
        }
        let m = edge_exponential_data(&p2(0.2, 0.1), &p2(0.5, 0.4), beta, one, &q, Gauge::MaxShift).unwrap();
        assert!((m.ci / base.ci - 1.0).abs() < 1e-12);
        assert!(base.harm_gauged > 0.0);
    }

    #[test]
    fn huge_potential_does_not_overflow() {
        let q = EdgeQuadrature::new(EdgeRule::default());
        for t in [900.0, -900.0, 5000.0] {
            for gauge in [Gauge::MaxShift, Gauge::Tail] {
                let e = edge_exponential_data(&p2(0., 0.), &p2(1., 0.), |_| Ok(p2(t, 0.)), one, &q, gauge).unwrap();
                assert!(e.ci.is_finite() && e.cj.is_finite(), "t={t}");
                assert!(e.ci >= 0.0 && e.cj >= 0.0);
            }
        }
    }

    #[test]
    fn unit_triangle_weights() {
        let g = ElementGeometry::from_vertices(2, &[p2(0., 0.), p2(1., 0.), p2(0., 1.)], 0, 1.0).unwrap();
        let rule = SimplexRule::new(2, 1);
        let w = edge_weights(&g, |_| Ok(Tensor::identity()), &rule).unwrap();
        assert_eq!(&w[..3], &[0.5, 0.5, 0.0]);
        let d = tensor_from_rows(&[&[2., 0.], &[0., 1.]]);
        let w = edge_weights(&g, |_| Ok(d), &rule).unwrap();
        assert_eq!(w[0], 1.0);
    }
}
