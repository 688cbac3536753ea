//! Problem coefficients `D`, `b`, `gamma`, `f`, `g` and Dirichlet data.
//!
//! The equation is `-div(D grad u + b u) + gamma u = f`. Fields are evaluated
//! pointwise; a field built from [`Field::Constant`] is known to be constant,
//! which lets assembly use closed-form edge weights.

pub mod expr;

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, SymmetricEigen};

use crate::{Error, Point, Result, Tensor};

/// A coefficient field: constant or an arbitrary thread-safe function.
pub enum Field<T> {
    Constant(T),
    Function(Arc<dyn Fn(&Point) -> T + Send + Sync>),
}

impl<T: Clone> Clone for Field<T> {
    fn clone(&self) -> Self {
        match self {
            Field::Constant(v) => Field::Constant(v.clone()),
            Field::Function(f) => Field::Function(Arc::clone(f)),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Field<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(v) => write!(f, "Constant({v:?})"),
            Field::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl<T: Clone> Field<T> {
    pub fn function(f: impl Fn(&Point) -> T + Send + Sync + 'static) -> Self {
        Field::Function(Arc::new(f))
    }

    pub fn eval(&self, x: &Point) -> T {
        match self {
            Field::Constant(v) => v.clone(),
            Field::Function(f) => f(x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Field::Constant(_))
    }
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<Point>;
pub type TensorField = Field<Tensor>;

/// Diffusion, transverse and longitudinal dispersion coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionParams {
    pub k_d: f64,
    pub k_t: f64,
    pub k_l: f64,
}

/// Builds a tensor from a `dim x dim` row-major block, padding 2D with the
/// identity in the third row and column.
pub fn tensor_from_rows(rows: &[&[f64]]) -> Tensor {
    let mut t = Tensor::identity();
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            t[(i, j)] = *v;
        }
    }
    t
}

fn pad(dim: usize, mut t: Tensor) -> Tensor {
    if dim == 2 {
        t[(0, 2)] = 0.0;
        t[(1, 2)] = 0.0;
        t[(2, 0)] = 0.0;
        t[(2, 1)] = 0.0;
        t[(2, 2)] = 1.0;
    }
    t
}

/// Cholesky factor of the leading `dim x dim` block, or `None` when the
/// block is not positive definite.
fn cholesky(dim: usize, a: &Tensor) -> Option<Tensor> {
    let mut l = Tensor::zeros();
    for j in 0..dim {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return None;
        }
        l[(j, j)] = d.sqrt();
        for i in j + 1..dim {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / l[(j, j)];
        }
    }
    Some(l)
}

fn cholesky_solve(dim: usize, l: &Tensor, b: &Point) -> Point {
    let mut y = Point::zeros();
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = Point::zeros();
    for i in (0..dim).rev() {
        let mut s = y[i];
        for k in i + 1..dim {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Extreme eigenvalues `(min, max)` of the leading symmetric block.
pub fn eigen_range(dim: usize, t: &Tensor) -> (f64, f64) {
    let ev: Vec<f64> = if dim == 2 {
        let m = Matrix2::new(t[(0, 0)], t[(0, 1)], t[(1, 0)], t[(1, 1)]);
        SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(*t).eigenvalues.iter().copied().collect()
    };
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Checks symmetry (1e-12 relative), finiteness and positive definiteness.
pub fn check_spd(dim: usize, t: &Tensor, x: &Point) -> Result<()> {
    let scale = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|ij| t[ij].abs())
        .fold(0.0, f64::max);
    for i in 0..dim {
        for j in 0..dim {
            if !t[(i, j)].is_finite() {
                return Err(Error::coefficient(x, "diffusion tensor is not finite"));
            }
            if (t[(i, j)] - t[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::coefficient(x, "diffusion tensor is not symmetric"));
            }
        }
    }
    if cholesky(dim, t).is_none() {
        return Err(Error::coefficient(x, "diffusion tensor is not positive definite"));
    }
    Ok(())
}

/// `D = k_d I + k_t b b^T/|b| + k_l (|b| I - b b^T/|b|)`, with `k_d I` at
/// `b = 0`.
pub fn dispersion_tensor(dim: usize, params: DispersionParams, b: &Point) -> Result<Tensor> {
    let DispersionParams { k_d, k_t, k_l } = params;
    let mut d = Tensor::zeros();
    let nb = b.norm();
    for i in 0..dim {
        d[(i, i)] = k_d;
    }
    if nb > 0.0 {
        for i in 0..dim {
            d[(i, i)] += k_l * nb;
            for j in 0..dim {
                d[(i, j)] += (k_t - k_l) * b[i] * b[j] / nb;
            }
        }
    }
    let d = pad(dim, d);
    check_spd(dim, &d, b).map_err(|_| {
        Error::coefficient(
            b,
            format!("dispersion tensor with k_d={k_d}, k_t={k_t}, k_l={k_l} is not positive definite at this velocity"),
        )
    })?;
    Ok(d)
}

/// All data of one convection-diffusion-reaction problem.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    pub dim: usize,
    pub diffusion: TensorField,
    pub velocity: VectorField,
    pub reaction: ScalarField,
    pub source: ScalarField,
    /// `g`, used on `NeumannIn` faces.
    pub neumann_flux: ScalarField,
    /// Prescribed values on Dirichlet vertices.
    pub dirichlet: ScalarField,
    /// Use the flux `J = alpha grad u + alpha D^-1 b u` with
    /// `alpha = (lambda_min(D) + lambda_max(D)) / 2`.
    pub alpha_scaling: bool,
}

impl CoefficientSet {
    /// `D = I`, everything else zero.
    pub fn new(dim: usize) -> Self {
        CoefficientSet {
            dim,
            diffusion: Field::Constant(Tensor::identity()),
            velocity: Field::Constant(Point::zeros()),
            reaction: Field::Constant(0.0),
            source: Field::Constant(0.0),
            neumann_flux: Field::Constant(0.0),
            dirichlet: Field::Constant(0.0),
            alpha_scaling: false,
        }
    }

    pub fn with_diffusion(mut self, d: TensorField) -> Self {
        self.diffusion = d;
        self
    }

    pub fn with_velocity(mut self, b: VectorField) -> Self {
        self.velocity = b;
        self
    }

    pub fn with_reaction(mut self, gamma: ScalarField) -> Self {
        self.reaction = gamma;
        self
    }

    pub fn with_source(mut self, f: ScalarField) -> Self {
        self.source = f;
        self
    }

    pub fn with_neumann_flux(mut self, g: ScalarField) -> Self {
        self.neumann_flux = g;
        self
    }

    pub fn with_dirichlet(mut self, u: ScalarField) -> Self {
        self.dirichlet = u;
        self
    }

    /// `D` from the dispersion model driven by the current velocity field.
    pub fn with_dispersion(mut self, params: DispersionParams) -> Result<Self> {
        let dim = self.dim;
        self.diffusion = match &self.velocity {
            Field::Constant(b) => Field::Constant(dispersion_tensor(dim, params, b)?),
            Field::Function(b) => {
                let b = Arc::clone(b);
                Field::function(move |x| {
                    // validated pointwise through diffusion_at
                    dispersion_tensor(dim, params, &b(x)).unwrap_or_else(|_| Tensor::from_element(f64::NAN))
                })
            }
        };
        Ok(self)
    }

    /// The alpha-scaled variant of this problem.
    pub fn alpha_scaled(&self) -> Self {
        CoefficientSet {
            alpha_scaling: true,
            ..self.clone()
        }
    }

    /// Whether `beta = D^-1 b` is known to be constant.
    pub fn beta_is_constant(&self) -> bool {
        self.diffusion.is_constant() && self.velocity.is_constant()
    }

    /// `D(x)`, padded in 2D and checked for symmetry and finiteness.
    pub fn diffusion_at(&self, x: &Point) -> Result<Tensor> {
        let d = pad(self.dim, self.diffusion.eval(x));
        let finite = (0..self.dim).all(|i| (0..self.dim).all(|j| d[(i, j)].is_finite()));
        if !finite {
            return Err(Error::coefficient(x, "diffusion tensor is not finite (or not positive definite)"));
        }
        Ok(d)
    }

    pub fn velocity_at(&self, x: &Point) -> Result<Point> {
        let mut b = self.velocity.eval(x);
        if self.dim == 2 {
            b[2] = 0.0;
        }
        if !b.iter().all(|v| v.is_finite()) {
            return Err(Error::coefficient(x, "velocity is not finite"));
        }
        Ok(b)
    }

    pub fn scalar_at(&self, field: &ScalarField, name: &str, x: &Point) -> Result<f64> {
        let v = field.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::coefficient(x, format!("{name} is not finite")))
        }
    }

    /// `beta = D^-1 b` at `x`, by Cholesky factorization of `D(x)`.
    pub fn beta(&self, x: &Point) -> Result<Point> {
        let d = self.diffusion_at(x)?;
        let b = self.velocity_at(x)?;
        check_spd(self.dim, &d, x)?;
        let l = cholesky(self.dim, &d).ok_or_else(|| Error::coefficient(x, "diffusion tensor is not positive definite"))?;
        Ok(cholesky_solve(self.dim, &l, &b))
    }

    /// `alpha(x) = (lambda_min + lambda_max) / 2` of `D(x)`.
    pub fn alpha(&self, x: &Point) -> Result<f64> {
        let d = self.diffusion_at(x)?;
        check_spd(self.dim, &d, x)?;
        let (lo, hi) = eigen_range(self.dim, &d);
        Ok(0.5 * (lo + hi))
    }

    /// `(D~, beta~) = (D / alpha, alpha D^-1 b)` at `x`.
    pub fn scaled_fields(&self, x: &Point) -> Result<(Tensor, Point)> {
        let a = self.alpha(x)?;
        let d = pad(self.dim, self.diffusion_at(x)? / a);
        Ok((d, self.beta(x)? * a))
    }

    /// Samples `D` at `points` and checks symmetry and positive definiteness.
    pub fn validate_at(&self, points: &[Point]) -> Result<()> {
        for x in points {
            let d = self.diffusion_at(x)?;
            check_spd(self.dim, &d, x)?;
            self.velocity_at(x)?;
            self.scalar_at(&self.reaction, "gamma", x)?;
            self.scalar_at(&self.source, "f", x)?;
        }
        Ok(())
    }
}
