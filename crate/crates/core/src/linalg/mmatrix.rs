use super::CsrMatrix;

/// Dense inverse positivity is only checked up to this order.
pub const DENSE_INVERSE_LIMIT: usize = 200;

/// Outcome of [`mmatrix_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct MMatrixVerdict {
    /// All off-diagonal entries `<= 1e-13 ||A||_inf` and all diagonals `> 0`.
    pub sign_pattern: bool,
    pub max_offdiagonal: f64,
    pub min_diagonal: f64,
    /// Weak row diagonal dominance with at least one strictly dominant row.
    pub diagonally_dominant: bool,
    /// Entrywise nonnegativity of the dense inverse (`None` when skipped or
    /// the matrix is singular).
    pub inverse_nonnegative: Option<bool>,
    pub min_inverse_entry: Option<f64>,
    /// Sign pattern plus inverse positivity (or, when the inverse was not
    /// checked, diagonal dominance).
    pub is_m_matrix: bool,
}

pub fn mmatrix_check(a: &CsrMatrix) -> MMatrixVerdict {
    let n = a.order();
    let scale = a.norm_inf();
    let tol = 1e-13 * scale;
    let mut max_off = f64::NEG_INFINITY;
    let mut min_diag = f64::INFINITY;
    let mut weak = true;
    let mut strict = false;
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let mut diag = 0.0;
        let mut off_abs = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag = v;
            } else {
                max_off = max_off.max(v);
                off_abs += v.abs();
            }
        }
        min_diag = min_diag.min(diag);
        if diag < off_abs - tol {
            weak = false;
        }
        if diag > off_abs + tol {
            strict = true;
        }
    }
    if n == 0 {
        min_diag = 0.0;
    }
    let max_off = if max_off.is_finite() { max_off } else { 0.0 };
    let sign_pattern = n > 0 && max_off <= tol && min_diag > 0.0;
    let diagonally_dominant = weak && strict;

    let (inverse_nonnegative, min_inverse_entry) = if n > 0 && n <= DENSE_INVERSE_LIMIT {
        match a.to_dense().try_inverse() {
            Some(inv) if inv.iter().all(|v| v.is_finite()) => {
                let min = inv.iter().copied().fold(f64::INFINITY, f64::min);
                let amax = inv.amax();
                (Some(min >= -1e-12 * amax), Some(min))
            }
            _ => (None, None),
        }
    } else {
        (None, None)
    };
    let is_m_matrix = sign_pattern && inverse_nonnegative.unwrap_or(diagonally_dominant);
    MMatrixVerdict {
        sign_pattern,
        max_offdiagonal: max_off,
        min_diagonal: min_diag,
        diagonally_dominant,
        inverse_nonnegative,
        min_inverse_entry,
        is_m_matrix,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn csr(rows: &[&[f64]]) -> CsrMatrix {
        let n = rows.len();
        CsrMatrix::from_dense(&DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    #[test]
    fn classic_m_matrix() {
        let v = mmatrix_check(&csr(&[&[2., -1.], &[-1., 2.]]));
        assert!(v.sign_pattern && v.diagonally_dominant && v.is_m_matrix);
        assert_eq!(v.inverse_nonnegative, Some(true));
    }

    #[test]
    fn positive_offdiagonal_fails_sign_pattern() {
        let v = mmatrix_check(&csr(&[&[1., 0.5], &[0.5, 1.]]));
        assert!(!v.sign_pattern);
        assert!(!v.is_m_matrix);
    }

    #[test]
    fn inverse_positive_without_dominance() {
        let v = mmatrix_check(&csr(&[&[1., -2.], &[0., 1.]]));
        assert!(v.sign_pattern);
        assert!(!v.diagonally_dominant);
        assert_eq!(v.inverse_nonnegative, Some(true));
        assert_eq!(v.min_inverse_entry, Some(0.0));
        assert!(v.is_m_matrix);
    }

    /// Whenever the sufficient dominance condition holds on a random
    /// Z-matrix, the definitive inverse check must agree.
    #[test]
    fn dominance_implies_inverse_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..200 {
            let n = rng.gen_range(2..12);
            let mut a = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    if i != j && rng.gen_bool(0.4) {
                        a[(i, j)] = -rng.gen_range(0.0..1.0);
                        s += -a[(i, j)];
                    }
                }
                // chain coupling keeps the matrix irreducible
                if i + 1 < n {
                    a[(i, i + 1)] -= 0.1;
                    s += 0.1;
                }
                if i > 0 {
                    a[(i, i - 1)] -= 0.1;
                    s += 0.1;
                }
                a[(i, i)] = s + if rng.gen_bool(0.3) { rng.gen_range(0.0..1.0) } else { 0.0 };
            }
            a[(0, 0)] += 0.5;
            let v = mmatrix_check(&CsrMatrix::from_dense(&a));
            if v.diagonally_dominant && v.sign_pattern {
                checked += 1;
                assert_eq!(v.inverse_nonnegative, Some(true));
            }
        }
        assert!(checked > 100);
    }
}
