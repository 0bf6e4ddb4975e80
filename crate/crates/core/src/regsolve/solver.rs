use serde::{Deserialize, Serialize};

use super::RegError;
use crate::linalg::{self, Matrix, Vector};
use crate::riesz::RestrictedOperator;
use crate::seqspace::{FinSeq, Space};

/// Stopping rule for the proximal-gradient iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 100_000,
        }
    }
}

/// `|A x - y|_2^2 + alpha |x|_1` over the columns of `A`.
#[derive(Debug, Clone)]
pub struct TikhonovProblem {
    operator: Matrix,
    data: Vector,
    alpha: f64,
}

impl TikhonovProblem {
    pub fn new(operator: Matrix, data: &FinSeq<f64>, alpha: f64) -> Result<Self, RegError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(RegError::BadParameter(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !data.all_finite() {
            return Err(RegError::BadData("data contains non-finite entries".into()));
        }
        if data.max_index() > operator.nrows() {
            return Err(RegError::BadData(format!(
                "data touches coordinate {} but the row frame is 1..={}",
                data.max_index(),
                operator.nrows()
            )));
        }
        let data = Vector::from_vec(data.to_dense_f64(operator.nrows()));
        Ok(TikhonovProblem {
            operator,
            data,
            alpha,
        })
    }

    /// Problem on `U`: unknowns are the coefficients of `e_{k_1}, ..., e_{k_L}`.
    pub fn on_subspace(
        op: &RestrictedOperator,
        data: &FinSeq<f64>,
        alpha: f64,
    ) -> Result<Self, RegError> {
        Self::new(op.matrix().clone(), data, alpha)
    }

    pub fn operator(&self) -> &Matrix {
        &self.operator
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn data(&self) -> &Vector {
        &self.data
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        let r = &self.operator * x - &self.data;
        r.norm_squared() + self.alpha * x.lp_norm(1)
    }

    /// `2 A^T (A x - y)`
    fn gradient(&self, x: &Vector) -> Vector {
        self.operator.tr_mul(&(&self.operator * x - &self.data)) * 2.0
    }
}

/// Outcome of one Tikhonov solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationResult {
    pub minimizer: FinSeq<f64>,
    pub objective: f64,
    pub subgradient_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each iteration; non-increasing up to rounding.
    pub trace: Vec<f64>,
}

impl RegularizationResult {
    pub fn dense(&self, len: usize) -> Vec<f64> {
        self.minimizer.to_dense_f64(len)
    }
}

/// Componentwise `sign(v) max(|v| - level, 0)`.
pub fn soft_threshold(v: f64, level: f64) -> f64 {
    if v > level {
        v - level
    } else if v < -level {
        v + level
    } else {
        0.0
    }
}

/// Distance from 0 to the subdifferential of the objective at `x`, in the
/// max norm over coordinates.
pub fn subgradient_residual(p: &TikhonovProblem, x: &Vector) -> f64 {
    let g = p.gradient(x);
    x.iter()
        .zip(g.iter())
        .map(|(&xi, &gi)| {
            if xi > 0.0 {
                (gi + p.alpha).abs()
            } else if xi < 0.0 {
                (gi - p.alpha).abs()
            } else {
                (gi.abs() - p.alpha).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Accelerated proximal gradient from `x = 0`.
pub fn tikhonov_solve(
    p: &TikhonovProblem,
    tol: f64,
    max_iter: usize,
) -> Result<RegularizationResult, RegError> {
    tikhonov_solve_from(p, None, SolverOptions { tol, max_iter })
}

/// Accelerated proximal gradient with monotone restart, step `1/(2 sigma_max^2)`.
///
/// A warm start is used only if it beats the zero vector, so the returned
/// objective never exceeds `|y|^2`.
pub fn tikhonov_solve_from(
    p: &TikhonovProblem,
    start: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<RegularizationResult, RegError> {
    if !(opts.tol > 0.0) {
        return Err(RegError::BadParameter(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let n = p.operator.ncols();
    let mut x = Vector::zeros(n);
    let mut fx = p.objective(&x);
    if let Some(s) = start {
        if s.len() != n || s.iter().any(|v| !v.is_finite()) {
            return Err(RegError::BadData(format!(
                "warm start must have {n} finite entries"
            )));
        }
        let w = Vector::from_column_slice(s);
        let fw = p.objective(&w);
        if fw <= fx {
            x = w;
            fx = fw;
        }
    }

    let sigma = linalg::spectral_norm(&p.operator);
    let mut trace = Vec::new();
    if sigma == 0.0 {
        // A = 0: the penalty alone decides
        let x = Vector::zeros(n);
        let res = subgradient_residual(p, &x);
        return Ok(RegularizationResult {
            minimizer: FinSeq::new(),
            objective: p.objective(&x),
            subgradient_residual: res,
            iterations: 0,
            converged: res <= opts.tol,
            trace,
        });
    }
    let lip = 2.0 * sigma * sigma;
    let level = p.alpha / lip;

    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut residual = subgradient_residual(p, &x);
    let mut iterations = 0;
    while residual > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let g = p.gradient(&y);
        let z = (&y - g / lip).map(|v| soft_threshold(v, level));
        let fz = p.objective(&z);
        // a plain step cannot increase the objective in exact arithmetic, so
        // an increase within rounding of fx is accepted
        let rounding = 64.0 * f64::EPSILON * fx.abs().max(f64::MIN_POSITIVE);
        if fz <= fx || (t == 1.0 && fz <= fx + rounding) {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = &z + (&z - &x) * ((t - 1.0) / t_next);
            x = z;
            fx = fz;
            t = t_next;
        } else if t > 1.0 {
            // momentum overshot: restart from the current iterate
            t = 1.0;
            y = x.clone();
        } else {
            // a plain proximal step increases beyond rounding: give up
            trace.push(fx);
            break;
        }
        trace.push(fx);
        residual = subgradient_residual(p, &x);
    }
    Ok(RegularizationResult {
        minimizer: FinSeq::from_dense(x.as_slice()),
        objective: fx,
        subgradient_residual: residual,
        iterations,
        converged: residual <= opts.tol,
        trace,
    })
}

/// Least-squares data for a matrix section.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    /// `min_x |B_n x - y|_2`.
    pub residual_infimum: f64,
    /// The least-squares solution of minimal l2 norm. Any element of the
    /// null space of `B_n` can be added when `rank < n`.
    pub min_norm_solution: FinSeq<f64>,
    pub rank: usize,
}

pub fn least_squares_section(b: &Matrix, y: &FinSeq<f64>) -> Result<LeastSquares, RegError> {
    if y.max_index() > b.nrows() {
        return Err(RegError::BadData(format!(
            "data touches coordinate {} but the row frame is 1..={}",
            y.max_index(),
            b.nrows()
        )));
    }
    let yv = Vector::from_vec(y.to_dense_f64(b.nrows()));
    let x = linalg::pinv(b) * &yv;
    let residual_infimum = (b * &x - &yv).norm();
    Ok(LeastSquares {
        residual_infimum,
        min_norm_solution: FinSeq::from_dense(x.as_slice()),
        rank: linalg::rank(b),
    })
}

pub(crate) fn l1_distance(a: &FinSeq<f64>, b: &FinSeq<f64>) -> f64 {
    a.axpy(-1.0, b).norm(Space::L1)
}
