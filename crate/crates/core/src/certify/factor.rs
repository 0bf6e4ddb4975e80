use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::linalg::{self, Matrix, Vector};

/// Residuals of the finite factorization identities for `A = Ã Q`, with `Q`
/// the quotient map onto `R^N / N(A)` (coordinates: an orthonormal basis of
/// the row space) and `U` a complement of `N(A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub rank: usize,
    pub nullity: usize,
    pub samples: usize,
    /// `max |A x - Ã Q x|` over samples.
    pub factor_residual: f64,
    /// `max |Ã^{-1} y - Q A_U^+ y|` over samples.
    pub inverse_residual: f64,
    /// `max |Q_U^{-1} q - A_U^+ Ã q|` over samples.
    pub quotient_residual: f64,
    pub sigma_min_tilde: f64,
    /// Smallest singular value of `Q` restricted to `U`.
    pub sigma_min_q_on_u: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks `Ã^{-1} = Q A_U^+` and `Q_U^{-1} = A_U^+ Ã` on random samples.
///
/// `u_basis` holds a basis of `U` in its columns; it must have `rank(A)`
/// columns and, together with the null space, span `R^N`.
pub fn factorization_check(
    a: &Matrix,
    u_basis: &Matrix,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<FactorizationReport, CertifyError> {
    let n = a.ncols();
    if u_basis.nrows() != n {
        return Err(CertifyError::BadDimensions(format!(
            "complement basis has {} rows, the operator has {n} columns",
            u_basis.nrows()
        )));
    }
    if !(tol > 0.0) {
        return Err(CertifyError::BadDimensions(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (row, null, r) = linalg::row_and_null_space(a);
    if u_basis.ncols() != r {
        return Err(CertifyError::NotAComplement(format!(
            "dim U = {} but rank A = {r}",
            u_basis.ncols()
        )));
    }
    let mut joined = Matrix::zeros(n, null.ncols() + r);
    joined.view_mut((0, 0), (n, null.ncols())).copy_from(&null);
    joined
        .view_mut((0, null.ncols()), (n, r))
        .copy_from(u_basis);
    if linalg::rank(&joined) != n {
        return Err(CertifyError::NotAComplement(
            "U meets the null space".into(),
        ));
    }

    // Q x = V_r^T x, Ã = A V_r (m x r, injective)
    let q = row.transpose();
    let tilde = a * &row;
    let tilde_inv = linalg::pinv(&tilde);
    let au = a * u_basis;
    // A_U^+ y = U (A U)^+ y, the inverse of A restricted to U
    let au_pinv = u_basis * linalg::pinv(&au);
    let qu = &q * u_basis;
    let qu_inv = u_basis
        * qu.clone()
            .try_inverse()
            .unwrap_or_else(|| linalg::pinv(&qu));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |len: usize| Vector::from_fn(len, |_, _| StandardNormal.sample(&mut rng));
    let (mut factor_residual, mut inverse_residual, mut quotient_residual) =
        (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..samples {
        let x = gauss(n);
        factor_residual =
            factor_residual.max((a * &x - &tilde * (&q * &x)).norm() / x.norm().max(1.0));
        // y ranges over R(A)
        let y = a * &x;
        let lhs = &tilde_inv * &y;
        let rhs = &q * (&au_pinv * &y);
        inverse_residual = inverse_residual.max((lhs - rhs).norm() / y.norm().max(1.0));
        let qv = gauss(r);
        let lhs = &qu_inv * &qv;
        let rhs = &au_pinv * (&tilde * &qv);
        quotient_residual = quotient_residual.max((lhs - rhs).norm() / qv.norm().max(1.0));
    }
    let passed = factor_residual <= tol && inverse_residual <= tol && quotient_residual <= tol;
    Ok(FactorizationReport {
        rank: r,
        nullity: null.ncols(),
        samples,
        factor_residual,
        inverse_residual,
        quotient_residual,
        sigma_min_tilde: linalg::smallest_singular_value(&tilde),
        sigma_min_q_on_u: linalg::smallest_singular_value(&qu),
        tol,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_deficient_example() {
        // 4 x 5, rank 3
        let b = Matrix::from_fn(4, 3, |i, j| {
            ((i + 2 * j) % 4) as f64 - 1.0 + (i == j) as u8 as f64
        });
        let c = Matrix::from_fn(3, 5, |i, j| ((3 * i + j) % 5) as f64 - 2.0);
        let a = &b * &c;
        assert_eq!(linalg::rank(&a), 3);
        // oblique complement: row space plus a null-space tilt
        let (row, null, _) = linalg::row_and_null_space(&a);
        let tilt = Matrix::from_fn(null.ncols(), 3, |i, j| 0.3 * (i + j + 1) as f64);
        let u = &row + &null * tilt;
        let rep = factorization_check(&a, &u, 50, 1e-9, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!((rep.rank, rep.nullity), (3, 2));
    }

    #[test]
    fn rejects_non_complements() {
        let a = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let inside = Matrix::from_column_slice(2, 1, &[1.0, -1.0]);
        assert!(matches!(
            factorization_check(&a, &inside, 5, 1e-9, 0),
            Err(CertifyError::NotAComplement(_))
        ));
        let too_big = Matrix::identity(2, 2);
        assert!(matches!(
            factorization_check(&a, &too_big, 5, 1e-9, 0),
            Err(CertifyError::NotAComplement(_))
        ));
        let e1 = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        assert!(factorization_check(&a, &e1, 5, 1e-12, 0).unwrap().passed);
    }
}
