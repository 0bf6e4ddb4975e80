use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::{l1_distance, tikhonov_solve_from, SolverOptions, TikhonovProblem};
use super::RegError;
use crate::linalg::Vector;
use crate::riesz::RestrictedOperator;
use crate::seqspace::FinSeq;

/// How the regularization parameter follows the noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ParameterRule {
    /// `alpha = c * delta`
    APriori { c: f64 },
    /// Largest `alpha` with `|A x_alpha - y^delta| <= tau * delta`, by bisection.
    Discrepancy { tau: f64 },
}

impl Default for ParameterRule {
    fn default() -> Self {
        ParameterRule::APriori { c: 1.0 }
    }
}

/// One grid point of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub delta: f64,
    pub alpha: f64,
    pub error_l1: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStudy {
    /// Ground truth in l1 coordinates (supported on the selected indices).
    pub x_true: Vec<(usize, f64)>,
    pub rule: ParameterRule,
    pub seed: u64,
    pub rows: Vec<StudyRow>,
    /// Fraction of consecutive grid pairs whose error did not increase.
    pub trend: f64,
}

impl NoiseStudy {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error_l1).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error_l1 < w[0].error_l1)
    }
}

/// Unit vector in `R^rows` with standard-normal direction from a seeded ChaCha8 stream.
pub fn seeded_unit_direction(rows: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = Vector::from_fn(rows, |_, _| StandardNormal.sample(&mut rng));
        let n = v.norm();
        if n > 0.0 {
            return v / n;
        }
    }
}

struct Solved {
    alpha: f64,
    coeffs: FinSeq<f64>,
    residual: f64,
    iterations: usize,
}

fn solve_at(
    op: &RestrictedOperator,
    y: &FinSeq<f64>,
    alpha: f64,
    opts: SolverOptions,
) -> Result<Solved, RegError> {
    let p = TikhonovProblem::on_subspace(op, y, alpha)?;
    let r = tikhonov_solve_from(&p, None, opts)?;
    let x = Vector::from_vec(r.minimizer.to_dense_f64(op.levels()));
    let residual = (op.matrix() * x - p.data()).norm();
    Ok(Solved {
        alpha,
        coeffs: r.minimizer,
        residual,
        iterations: r.iterations,
    })
}

/// Discrepancy principle: bisection on `log alpha` for
/// `|A x_alpha - y| = tau * delta`, returning the largest `alpha` found with
/// residual at most `tau * delta`.
pub fn discrepancy_alpha(
    op: &RestrictedOperator,
    y: &FinSeq<f64>,
    delta: f64,
    tau: f64,
    opts: SolverOptions,
) -> Result<f64, RegError> {
    if !(delta > 0.0) || !(tau > 1.0) {
        return Err(RegError::BadParameter(format!(
            "discrepancy principle needs delta > 0 and tau > 1 (got {delta}, {tau})"
        )));
    }
    let target = tau * delta;
    let yv = Vector::from_vec(y.to_dense_f64(op.rows()));
    // above this alpha the minimizer is zero and the residual is |y|
    let alpha_max = 2.0 * op.matrix().tr_mul(&yv).amax();
    if yv.norm() <= target || alpha_max == 0.0 {
        return Ok(alpha_max.max(f64::MIN_POSITIVE));
    }
    let (mut lo, mut hi) = ((alpha_max * 1e-14).ln(), alpha_max.ln());
    if solve_at(op, y, lo.exp(), opts)?.residual > target {
        return Ok(lo.exp());
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if solve_at(op, y, mid.exp(), opts)?.residual <= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    Ok(lo.exp())
}

/// For each `delta` on a strictly descending grid, perturbs `B|_U x_true` by
/// `delta` times one fixed seeded unit direction, solves, and records the l1 error.
pub fn noise_convergence_study(
    op: &RestrictedOperator,
    x_true: &FinSeq<f64>,
    deltas: &[f64],
    rule: ParameterRule,
    seed: u64,
    opts: SolverOptions,
) -> Result<NoiseStudy, RegError> {
    if deltas.is_empty() {
        return Err(RegError::BadParameter("empty noise grid".into()));
    }
    if deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(RegError::BadParameter(
            "noise levels must be positive".into(),
        ));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(RegError::BadParameter(
            "noise grid must be strictly descending".into(),
        ));
    }
    match rule {
        ParameterRule::APriori { c } if !(c > 0.0) => {
            return Err(RegError::BadParameter(format!(
                "a-priori constant must be positive, got {c}"
            )))
        }
        ParameterRule::Discrepancy { tau } if !(tau > 1.0) => {
            return Err(RegError::BadParameter(format!(
                "discrepancy tau must exceed 1, got {tau}"
            )))
        }
        _ => {}
    }
    let truth = op.coefficients(x_true)?;
    let clean = op.apply(x_true)?;
    let noise = seeded_unit_direction(op.rows(), seed);

    let rows = deltas
        .par_iter()
        .map(|&delta| {
            let y = Vector::from_vec(clean.to_dense_f64(op.rows())) + &noise * delta;
            let y = FinSeq::from_dense(y.as_slice());
            let alpha = match rule {
                ParameterRule::APriori { c } => c * delta,
                ParameterRule::Discrepancy { tau } => discrepancy_alpha(op, &y, delta, tau, opts)?,
            };
            let s = solve_at(op, &y, alpha, opts)?;
            Ok(StudyRow {
                delta,
                alpha: s.alpha,
                error_l1: l1_distance(&s.coeffs, &truth),
                residual: s.residual,
                iterations: s.iterations,
            })
        })
        .collect::<Result<Vec<_>, RegError>>()?;

    let pairs = rows.len().saturating_sub(1);
    let trend = if pairs == 0 {
        1.0
    } else {
        rows.windows(2)
            .filter(|w| w[1].error_l1 <= w[0].error_l1)
            .count() as f64
            / pairs as f64
    };
    Ok(NoiseStudy {
        x_true: x_true.iter().map(|(i, &v)| (i, v)).collect(),
        rule,
        seed,
        rows,
        trend,
    })
}

/// Solves with fixed data `y` along a list of `alpha` values (exact-data
/// consistency checks use `y = B|_U x_true`). `delta` is reported as 0.
pub fn alpha_path(
    op: &RestrictedOperator,
    x_true: &FinSeq<f64>,
    y: &FinSeq<f64>,
    alphas: &[f64],
    opts: SolverOptions,
) -> Result<Vec<StudyRow>, RegError> {
    let truth = op.coefficients(x_true)?;
    alphas
        .iter()
        .map(|&alpha| {
            let s = solve_at(op, y, alpha, opts)?;
            Ok(StudyRow {
                delta: 0.0,
                alpha,
                error_l1: l1_distance(&s.coeffs, &truth),
                residual: s.residual,
                iterations: s.iterations,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riesz::greedy_select;
    use crate::seqspace::EnumerationMode;

    fn subspace(levels: usize) -> RestrictedOperator {
        let s = greedy_select(EnumerationMode::NoSingleton, levels, 1_000_000).unwrap();
        RestrictedOperator::from_selection(&s, s.row_frame()).unwrap()
    }

    #[test]
    fn rejects_bad_grids_and_rules() {
        let op = subspace(3);
        let x = op.lift(&FinSeq::unit(1, 1.0)).unwrap();
        let opts = SolverOptions::default();
        let r =
            noise_convergence_study(&op, &x, &[1e-2], ParameterRule::APriori { c: 0.0 }, 1, opts);
        assert!(matches!(r, Err(RegError::BadParameter(_))));
        let r = noise_convergence_study(&op, &x, &[1e-3, 1e-2], ParameterRule::default(), 1, opts);
        assert!(matches!(r, Err(RegError::BadParameter(_))));
        let r = noise_convergence_study(&op, &x, &[], ParameterRule::default(), 1, opts);
        assert!(matches!(r, Err(RegError::BadParameter(_))));
    }

    #[test]
    fn three_level_study_improves() {
        let op = subspace(5);
        let idx = op.selection().indices();
        let x = FinSeq::from_pairs([(idx[0], 2.0), (idx[2], -1.0)]).unwrap();
        let st = noise_convergence_study(
            &op,
            &x,
            &[1e-1, 1e-2, 1e-3],
            ParameterRule::default(),
            7,
            SolverOptions::default(),
        )
        .unwrap();
        assert!(st.strictly_decreasing(), "{:?}", st.errors());
        assert_eq!(st.trend, 1.0);
    }

    #[test]
    fn exact_data_consistency() {
        let op = subspace(5);
        let idx = op.selection().indices();
        let x = FinSeq::from_pairs([(idx[0], 2.0), (idx[2], -1.0)]).unwrap();
        let y = op.apply(&x).unwrap();
        let rows = alpha_path(&op, &x, &y, &[1e-2, 1e-4, 1e-6], SolverOptions::default()).unwrap();
        assert!(rows.last().unwrap().error_l1 <= 1e-4);
    }

    #[test]
    fn discrepancy_rule_meets_target() {
        let op = subspace(4);
        let idx = op.selection().indices();
        let x = FinSeq::from_pairs([(idx[1], 1.0), (idx[3], 0.5)]).unwrap();
        let st = noise_convergence_study(
            &op,
            &x,
            &[1e-1, 1e-2],
            ParameterRule::Discrepancy { tau: 1.5 },
            3,
            SolverOptions::default(),
        )
        .unwrap();
        for row in &st.rows {
            assert!(row.residual <= 1.5 * row.delta * (1.0 + 1e-6));
            assert!(row.residual >= 1.5 * row.delta * 0.9);
        }
    }

    #[test]
    fn studies_are_reproducible() {
        let op = subspace(4);
        let x = op.lift(&FinSeq::unit(2, 1.0)).unwrap();
        let a = noise_convergence_study(
            &op,
            &x,
            &[1e-1, 1e-2],
            ParameterRule::default(),
            11,
            SolverOptions::default(),
        )
        .unwrap();
        let b = noise_convergence_study(
            &op,
            &x,
            &[1e-1, 1e-2],
            ParameterRule::default(),
            11,
            SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
