//! Restarted GMRES with Jacobi or ILU(0) preconditioning and a dense LU
//! route for small systems.

use nalgebra::{DMatrix, DVector};

use super::CsrMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
    Ilu0,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Relative residual target `||b - Ax|| / ||b||`.
    pub tol: f64,
    /// Maximum total Krylov iterations.
    pub max_iter: usize,
    pub restart: usize,
    pub preconditioner: Preconditioner,
    /// Systems of order up to this size are solved by dense LU.
    pub dense_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 5000,
            restart: 50,
            preconditioner: Preconditioner::Jacobi,
            dense_threshold: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual recomputed from the returned solution.
    pub residual: f64,
    pub converged: bool,
    pub method: String,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64], bnorm: f64) -> f64 {
    let ax = a.apply(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let rn = norm(&r);
    if rn.is_finite() {
        rn / bnorm
    } else {
        f64::INFINITY
    }
}

/// Solves `A x = b`. The returned report's `converged` flag always agrees
/// with the recomputed residual.
pub fn solve(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.order();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, matrix order is {n}",
            b.len()
        )));
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        let report = SolveReport {
            iterations: 0,
            residual: 0.0,
            converged: true,
            method: "trivial".into(),
        };
        return Ok((vec![0.0; n], report));
    }
    let (x, iterations, method) = if n <= opts.dense_threshold {
        (dense_lu(a, b), 1, "dense-lu".to_string())
    } else {
        let pc = Precond::build(a, opts.preconditioner);
        let name = format!("gmres({})+{}", opts.restart, pc.name());
        let (x, it) = gmres(a, b, &pc, opts, bnorm);
        (x, it, name)
    };
    let residual = relative_residual(a, &x, b, bnorm);
    let report = SolveReport {
        iterations,
        residual,
        converged: residual <= opts.tol,
        method,
    };
    Ok((x, report))
}

fn dense_lu(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    let lu = a.to_dense().lu();
    match lu.solve(&DVector::from_column_slice(b)) {
        Some(x) if x.iter().all(|v| v.is_finite()) => x.as_slice().to_vec(),
        _ => vec![0.0; b.len()],
    }
}

enum Precond {
    Identity,
    Jacobi(Vec<f64>),
    Ilu(Ilu0),
}

impl Precond {
    fn build(a: &CsrMatrix, kind: Preconditioner) -> Self {
        let jacobi = || {
            let d = a.diagonal();
            if d.iter().all(|v| *v != 0.0 && v.is_finite()) {
                Precond::Jacobi(d.iter().map(|v| 1.0 / v).collect())
            } else {
                Precond::Identity
            }
        };
        match kind {
            Preconditioner::None => Precond::Identity,
            Preconditioner::Jacobi => jacobi(),
            Preconditioner::Ilu0 => Ilu0::new(a).map(Precond::Ilu).unwrap_or_else(jacobi),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Precond::Identity => "none",
            Precond::Jacobi(_) => "jacobi",
            Precond::Ilu(_) => "ilu0",
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Precond::Identity => z.copy_from_slice(r),
            Precond::Jacobi(d) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                    *zi = ri * di;
                }
            }
            Precond::Ilu(f) => f.solve(r, z),
        }
    }
}

/// Zero-fill incomplete LU on the sparsity pattern of `A`.
struct Ilu0 {
    lu: CsrMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    fn new(a: &CsrMatrix) -> Option<Self> {
        let mut lu = a.clone();
        let n = lu.order();
        let rp = lu.row_ptr().to_vec();
        let ci = lu.col_idx().to_vec();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in rp[i]..rp[i + 1] {
                if ci[k] == i {
                    diag_pos[i] = k;
                }
            }
            if diag_pos[i] == usize::MAX {
                return None;
            }
        }
        let mut pos = vec![usize::MAX; n];
        let mut vals = lu.values().to_vec();
        for i in 0..n {
            for k in rp[i]..rp[i + 1] {
                pos[ci[k]] = k;
            }
            for k in rp[i]..rp[i + 1] {
                let col = ci[k];
                if col >= i {
                    break;
                }
                let piv = vals[diag_pos[col]];
                if piv == 0.0 {
                    return None;
                }
                let factor = vals[k] / piv;
                vals[k] = factor;
                for kk in diag_pos[col] + 1..rp[col + 1] {
                    let p = pos[ci[kk]];
                    if p != usize::MAX {
                        vals[p] -= factor * vals[kk];
                    }
                }
            }
            for k in rp[i]..rp[i + 1] {
                pos[ci[k]] = usize::MAX;
            }
            if vals[diag_pos[i]] == 0.0 || !vals[diag_pos[i]].is_finite() {
                return None;
            }
        }
        for i in 0..n {
            let (_, row) = lu.row_mut(i);
            row.copy_from_slice(&vals[rp[i]..rp[i + 1]]);
        }
        Some(Ilu0 { lu, diag_pos })
    }

    fn solve(&self, r: &[f64], z: &mut [f64]) {
        let n = self.lu.order();
        let rp = self.lu.row_ptr();
        let ci = self.lu.col_idx();
        let v = self.lu.values();
        for i in 0..n {
            let mut s = r[i];
            for k in rp[i]..self.diag_pos[i] {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag_pos[i] + 1..rp[i + 1] {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s / v[self.diag_pos[i]];
        }
    }
}

/// Right-preconditioned restarted GMRES (modified Gram-Schmidt, Givens).
fn gmres(a: &CsrMatrix, b: &[f64], pc: &Precond, opts: &SolverOptions, bnorm: f64) -> (Vec<f64>, usize) {
    let n = a.order();
    let m = opts.restart.max(1).min(n);
    let target = opts.tol * bnorm;
    let mut x = vec![0.0; n];
    let mut total = 0;
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];

    while total < opts.max_iter {
        let ax = a.apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if !beta.is_finite() || beta <= target {
            break;
        }
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut k = 0;
        while k < m && total < opts.max_iter {
            total += 1;
            pc.apply(&v[k], &mut z);
            a.mul_vec(&z, &mut w);
            for j in 0..=k {
                let hj = dot(&w, &v[j]);
                h[(j, k)] = hj;
                for (wi, vi) in w.iter_mut().zip(&v[j]) {
                    *wi -= hj * vi;
                }
            }
            let wn = norm(&w);
            h[(k + 1, k)] = wn;
            for j in 0..k {
                let t = cs[j] * h[(j, k)] + sn[j] * h[(j + 1, k)];
                h[(j + 1, k)] = -sn[j] * h[(j, k)] + cs[j] * h[(j + 1, k)];
                h[(j, k)] = t;
            }
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            cs[k] = c;
            sn[k] = s;
            h[(k, k)] = c * h[(k, k)] + s * h[(k + 1, k)];
            h[(k + 1, k)] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            k += 1;
            if wn == 0.0 || !wn.is_finite() || g[k].abs() <= 0.5 * target {
                break;
            }
            v.push(w.iter().map(|wi| wi / wn).collect());
        }
        // back substitution
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[(i, j)] * y[j];
            }
            y[i] = if h[(i, i)] != 0.0 { s / h[(i, i)] } else { 0.0 };
        }
        let mut update = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for (u, vj) in update.iter_mut().zip(&v[j]) {
                *u += yj * vj;
            }
        }
        pc.apply(&update, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
        if h[(k - 1, k - 1)] == 0.0 {
            break;
        }
    }
    (x, total)
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}
