use super::lp::{lp_solve_in, LinearProgram, LpArithmetic, LpOutcome, VarBound};
use super::CertifyError;
use crate::linalg::{self, Matrix, Vector};
use crate::seqspace::FinSeq;

/// Relative residual above which data counts as outside the range.
const RANGE_TOL: f64 = 1e-9;

/// Quotient-norm distance `inf_{z in N(A)} |x - x' - z|_1` between the
/// solution sets of `A x = y` and `A x' = y'`, with `N(A)` spanned by the
/// columns of `null_basis`.
pub fn qdist(
    a: &Matrix,
    null_basis: &Matrix,
    y: &FinSeq<f64>,
    y2: &FinSeq<f64>,
) -> Result<f64, CertifyError> {
    qdist_with(a, null_basis, y, y2, LpArithmetic::Float)
}

pub fn qdist_with(
    a: &Matrix,
    null_basis: &Matrix,
    y: &FinSeq<f64>,
    y2: &FinSeq<f64>,
    arithmetic: LpArithmetic,
) -> Result<f64, CertifyError> {
    let (rows, cols) = a.shape();
    if null_basis.nrows() != cols {
        return Err(CertifyError::BadDimensions(format!(
            "null-space basis has {} rows, the section has {cols} columns",
            null_basis.nrows()
        )));
    }
    for v in [y, y2] {
        if v.max_index() > rows {
            return Err(CertifyError::BadDimensions(format!(
                "data touches coordinate {} but the section has {rows} rows",
                v.max_index()
            )));
        }
    }
    let r = linalg::rank(a);
    if linalg::rank(null_basis) != null_basis.ncols() || null_basis.ncols() != cols - r {
        return Err(CertifyError::BadNullBasis(format!(
            "need {} independent columns, got rank {} of {}",
            cols - r,
            linalg::rank(null_basis),
            null_basis.ncols()
        )));
    }
    let scale = linalg::spectral_norm(a) * linalg::spectral_norm(null_basis);
    if null_basis.ncols() > 0 && (a * null_basis).norm() > RANGE_TOL * scale.max(1.0) {
        return Err(CertifyError::BadNullBasis(
            "columns are not annihilated by the section".into(),
        ));
    }

    let pinv = linalg::pinv(a);
    let particular = |v: &FinSeq<f64>| -> Result<Vector, CertifyError> {
        let yv = Vector::from_vec(v.to_dense_f64(rows));
        let x = &pinv * &yv;
        let res = (a * &x - &yv).norm();
        if res > RANGE_TOL * yv.norm().max(1.0) {
            return Err(CertifyError::NotInRange(res));
        }
        Ok(x)
    };
    let d = particular(y)? - particular(y2)?;

    // variables: c (free, one per null vector), t >= 0 (one per coordinate)
    // min sum t  s.t.  -t <= d - Z c <= t
    let nz = null_basis.ncols();
    let mut objective = vec![0.0; nz + cols];
    objective[nz..].iter_mut().for_each(|v| *v = 1.0);
    let mut lp = LinearProgram::new(objective);
    for j in nz..nz + cols {
        lp.bounds[j] = VarBound::nonneg();
    }
    for i in 0..cols {
        let mut upper = vec![0.0; nz + cols];
        let mut lower = vec![0.0; nz + cols];
        for j in 0..nz {
            upper[j] = -null_basis[(i, j)];
            lower[j] = null_basis[(i, j)];
        }
        upper[nz + i] = -1.0;
        lower[nz + i] = -1.0;
        // d_i - (Z c)_i <= t_i  and  -(d_i - (Z c)_i) <= t_i
        lp.push_le(upper, -d[i]);
        lp.push_le(lower, d[i]);
    }
    match lp_solve_in(&lp, arithmetic)? {
        LpOutcome::Optimal { value, .. } => Ok(value.max(0.0)),
        o => unreachable!("distance LP is feasible and bounded, got {o:?}"),
    }
}
