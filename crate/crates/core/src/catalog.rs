//! Built-in problems on the unit square and cube.
//!
//! Manufactured problems use `u = prod_k sin(pi x_k)`, which vanishes on the
//! boundary, with constant `D`, `b` and `gamma`.

use std::f64::consts::PI;

use crate::analysis::ExactSolution;
use crate::coeff::{tensor_from_rows, CoefficientSet, DispersionParams, Field};
use crate::{Point, Result, Tensor};

#[derive(Clone, Debug)]
pub struct Problem {
    pub name: &'static str,
    pub description: &'static str,
    pub dim: usize,
    pub coeffs: CoefficientSet,
    pub exact: Option<ExactSolution>,
}

pub const NAMES: [&str; 7] = [
    "poisson2d",
    "eafe2d_constant",
    "eafe2d_tensor",
    "layer2d",
    "dispersion2d",
    "poisson3d",
    "eafe3d_tensor",
];

fn sine_product(dim: usize, x: &Point) -> (f64, Point, Tensor) {
    let s: Vec<f64> = (0..dim).map(|k| (PI * x[k]).sin()).collect();
    let c: Vec<f64> = (0..dim).map(|k| (PI * x[k]).cos()).collect();
    let prod_except = |skip: &[usize]| -> f64 { (0..dim).filter(|k| !skip.contains(k)).map(|k| s[k]).product() };
    let u = prod_except(&[]);
    let mut grad = Point::zeros();
    let mut hess = Tensor::zeros();
    for i in 0..dim {
        grad[i] = PI * c[i] * prod_except(&[i]);
        hess[(i, i)] = -PI * PI * u;
        for j in 0..dim {
            if j != i {
                hess[(i, j)] = PI * PI * c[i] * c[j] * prod_except(&[i, j]);
            }
        }
    }
    (u, grad, hess)
}

/// Coefficients and exact solution for `u = prod sin(pi x_k)` with constant
/// data: `f = -tr(D H) - b . grad u + gamma u`.
pub fn manufactured(dim: usize, d: Tensor, b: Point, gamma: f64) -> (CoefficientSet, ExactSolution) {
    let f = move |x: &Point| {
        let (u, g, h) = sine_product(dim, x);
        let tr: f64 = (0..dim).map(|i| (0..dim).map(|j| d[(i, j)] * h[(j, i)]).sum::<f64>()).sum();
        -tr - b.dot(&g) + gamma * u
    };
    let coeffs = CoefficientSet::new(dim)
        .with_diffusion(Field::Constant(d))
        .with_velocity(Field::Constant(b))
        .with_reaction(Field::Constant(gamma))
        .with_source(Field::function(f));
    let exact = ExactSolution::new(move |x| sine_product(dim, x).0, move |x| sine_product(dim, x).1);
    (coeffs, exact)
}

/// The dispersion problem's velocity.
pub const DISPERSION_VELOCITY: [f64; 2] = [2.0, 1.0];
pub const DISPERSION_PARAMS: DispersionParams = DispersionParams {
    k_d: 1e-4,
    k_t: 21.0,
    k_l: 2.1,
};

fn build(name: &str) -> Result<Option<Problem>> {
    let p = match name {
        "poisson2d" => {
            let (coeffs, exact) = manufactured(2, Tensor::identity(), Point::zeros(), 0.0);
            Problem {
                name: "poisson2d",
                description: "-lap u = f, u = sin(pi x) sin(pi y)",
                dim: 2,
                coeffs,
                exact: Some(exact),
            }
        }
        "eafe2d_constant" => {
            let (coeffs, exact) = manufactured(2, Tensor::identity(), Point::new(10.0, 5.0, 0.0), 0.0);
            Problem {
                name: "eafe2d_constant",
                description: "D = I, b = (10, 5), u = sin(pi x) sin(pi y)",
                dim: 2,
                coeffs,
                exact: Some(exact),
            }
        }
        "eafe2d_tensor" => {
            let d = tensor_from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]);
            let (coeffs, exact) = manufactured(2, d, Point::new(2.0, 1.0, 0.0), 1.0);
            Problem {
                name: "eafe2d_tensor",
                description: "D = [[2, 0.5], [0.5, 1]], b = (2, 1), gamma = 1, u = sin(pi x) sin(pi y)",
                dim: 2,
                coeffs,
                exact: Some(exact),
            }
        }
        "layer2d" => Problem {
            name: "layer2d",
            description: "D = 1e-6 I, b = (1, 0), f = 1, u = 0 on the boundary",
            dim: 2,
            coeffs: CoefficientSet::new(2)
                .with_diffusion(Field::Constant(Tensor::identity() * 1e-6))
                .with_velocity(Field::Constant(Point::new(1.0, 0.0, 0.0)))
                .with_source(Field::Constant(1.0)),
            exact: None,
        },
        "dispersion2d" => {
            let b = Point::new(DISPERSION_VELOCITY[0], DISPERSION_VELOCITY[1], 0.0);
            let d = crate::coeff::dispersion_tensor(2, DISPERSION_PARAMS, &b)?;
            let (coeffs, exact) = manufactured(2, d, b, 1.0);
            Problem {
                name: "dispersion2d",
                description: "dispersion tensor (1e-4, 21, 2.1), b = (2, 1), gamma = 1, u = sin(pi x) sin(pi y)",
                dim: 2,
                coeffs,
                exact: Some(exact),
            }
        }
        "poisson3d" => {
            let (coeffs, exact) = manufactured(3, Tensor::identity(), Point::zeros(), 0.0);
            Problem {
                name: "poisson3d",
                description: "-lap u = f, u = sin(pi x) sin(pi y) sin(pi z)",
                dim: 3,
                coeffs,
                exact: Some(exact),
            }
        }
        "eafe3d_tensor" => {
            let d = tensor_from_rows(&[&[2.0, 0.5, 0.2], &[0.5, 1.5, 0.3], &[0.2, 0.3, 1.0]]);
            let (coeffs, exact) = manufactured(3, d, Point::new(2.0, 1.0, -1.0), 1.0);
            Problem {
                name: "eafe3d_tensor",
                description: "full SPD D, b = (2, 1, -1), gamma = 1, u = sin(pi x) sin(pi y) sin(pi z)",
                dim: 3,
                coeffs,
                exact: Some(exact),
            }
        }
        _ => return Ok(None),
    };
    Ok(Some(p))
}

/// The named problem, or `None` if the name is unknown.
pub fn lookup(name: &str) -> Option<Problem> {
    build(name).ok().flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_names_resolve() {
        for n in NAMES {
            let p = lookup(n).unwrap();
            assert_eq!(p.name, n);
            assert_eq!(p.coeffs.dim, p.dim);
        }
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn tensor_source_closed_form() {
        let p = lookup("eafe2d_tensor").unwrap();
        for &(x, y) in &[(0.1, 0.7), (0.33, 0.21), (0.5, 0.5), (0.9, 0.05)] {
            let (sx, cx, sy, cy) = ((PI * x).sin(), (PI * x).cos(), (PI * y).sin(), (PI * y).cos());
            let expected = 3.0 * PI * PI * sx * sy - PI * PI * cx * cy - 2.0 * PI * cx * sy - PI * sx * cy + sx * sy;
            let got = p.coeffs.source.eval(&Point::new(x, y, 0.0));
            assert!((got - expected).abs() < 1e-12, "{got} {expected}");
        }
    }

    #[test]
    fn source_matches_finite_differences() {
        // L u evaluated by central differences of the flux
        let p = lookup("eafe3d_tensor").unwrap();
        let ex = p.exact.clone().unwrap();
        let d = p.coeffs.diffusion.eval(&Point::zeros());
        let b = p.coeffs.velocity.eval(&Point::zeros());
        let flux = |x: &Point| d * ex.gradient(x) + b * ex.value(x);
        let x = Point::new(0.31, 0.62, 0.44);
        let h = 1e-5;
        let mut div = 0.0;
        for k in 0..3 {
            let mut e = Point::zeros();
            e[k] = h;
            div += (flux(&(x + e))[k] - flux(&(x - e))[k]) / (2.0 * h);
        }
        let lu = -div + ex.value(&x);
        assert!((lu - p.coeffs.source.eval(&x)).abs() < 1e-5);
    }
}
