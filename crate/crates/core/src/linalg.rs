//! Small dense helpers on top of nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Singular values in descending order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Default cutoff below which a singular value counts as zero.
pub fn rank_tolerance(a: &Matrix, sigma_max: f64) -> f64 {
    a.nrows().max(a.ncols()) as f64 * f64::EPSILON * sigma_max.max(1.0)
}

pub fn rank(a: &Matrix) -> usize {
    let s = singular_values(a);
    let Some(&top) = s.first() else { return 0 };
    let tol = rank_tolerance(a, top);
    s.iter().filter(|&&v| v > tol).count()
}

/// Full SVD pieces: `(u, sigma, v)` with `a = u diag(sigma) v^T`, `v` square.
fn full_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = a.shape();
    // pad to a square-ish shape so that V comes out n x n
    let padded = if m < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = Matrix::from_fn(n, order.len(), |r, c| v_t[(order[c], r)]);
    let u = Matrix::from_fn(u.nrows().min(m), order.len(), |r, c| u[(r, order[c])]);
    (u, sigma, v)
}

/// Orthonormal bases of the row space and the null space of `a`, and the rank.
pub fn row_and_null_space(a: &Matrix) -> (Matrix, Matrix, usize) {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return (Matrix::zeros(n, 0), Matrix::identity(n, n), 0);
    }
    let (_, sigma, v) = full_svd(a);
    let tol = rank_tolerance(a, sigma.first().copied().unwrap_or(0.0));
    let r = sigma.iter().filter(|&&s| s > tol).count();
    let row = v.columns(0, r).into_owned();
    let null = if v.ncols() == n {
        v.columns(r, n - r).into_owned()
    } else {
        // tall case with fewer singular values than columns cannot happen; keep shapes honest
        Matrix::zeros(n, 0)
    };
    (row, null, r)
}

pub fn null_space(a: &Matrix) -> Matrix {
    row_and_null_space(a).1
}

/// Moore-Penrose pseudo-inverse.
pub fn pinv(a: &Matrix) -> Matrix {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Matrix::zeros(n, m);
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = rank_tolerance(a, top);
    svd.pseudo_inverse(tol).expect("U and V were computed")
}

pub fn spectral_norm(a: &Matrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn smallest_singular_value(a: &Matrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}
