//! Gauss-Legendre rules on `[0, 1]` and simplex rules in barycentric form.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights mapped to `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut rule = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        rule[i] = (0.5 * (1.0 - z), 0.5 * w);
        rule[n - 1 - i] = (0.5 * (1.0 + z), 0.5 * w);
    }
    rule
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// A quadrature rule on a `dim`-simplex. Points are barycentric coordinates
/// (first `dim + 1` entries used); weights are fractions of the simplex
/// measure and sum to one.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<([f64; 4], f64)>,
}

impl SimplexRule {
    /// A rule exact for polynomials of total degree `degree` on a simplex of
    /// dimension `dim` (1, 2 or 3).
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!((1..=3).contains(&dim), "simplex dimension must be 1, 2 or 3");
        let points = match (dim, degree) {
            (_, 0 | 1) => {
                let c = 1.0 / (dim as f64 + 1.0);
                let mut bary = [0.0; 4];
                bary[..=dim].fill(c);
                vec![(bary, 1.0)]
            }
            (2, 2) => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                vec![
                    ([a, b, b, 0.0], 1.0 / 3.0),
                    ([b, a, b, 0.0], 1.0 / 3.0),
                    ([b, b, a, 0.0], 1.0 / 3.0),
                ]
            }
            (3, 2) => {
                let a = 0.585_410_196_624_968_5;
                let b = 0.138_196_601_125_010_5;
                vec![
                    ([a, b, b, b], 0.25),
                    ([b, a, b, b], 0.25),
                    ([b, b, a, b], 0.25),
                    ([b, b, b, a], 0.25),
                ]
            }
            _ => collapsed(dim, degree),
        };
        SimplexRule {
            dim,
            degree,
            points,
        }
    }
}

/// Conical product rule: Gauss-Legendre in collapsed coordinates.
fn collapsed(dim: usize, degree: usize) -> Vec<([f64; 4], f64)> {
    let n = (degree + dim) / 2 + 1;
    let g = gauss_legendre(n);
    let mut out = Vec::new();
    match dim {
        1 => {
            for &(s, w) in &g {
                out.push(([1.0 - s, s, 0.0, 0.0], w));
            }
        }
        2 => {
            for &(u, wu) in &g {
                for &(v, wv) in &g {
                    let x = u;
                    let y = v * (1.0 - u);
                    out.push(([1.0 - x - y, x, y, 0.0], 2.0 * wu * wv * (1.0 - u)));
                }
            }
        }
        _ => {
            for &(u, wu) in &g {
                for &(v, wv) in &g {
                    for &(w, ww) in &g {
                        let x = u;
                        let y = v * (1.0 - u);
                        let z = w * (1.0 - u) * (1.0 - v);
                        let jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                        out.push(([1.0 - x - y - z, x, y, z], 6.0 * wu * wv * ww * jac));
                    }
                }
            }
        }
    }
    out
}
