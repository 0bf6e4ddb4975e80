use mazur_core::linalg::{Matrix, Vector};
use mazur_core::regsolve::{tikhonov_solve, TikhonovProblem};
use mazur_core::seqspace::FinSeq;
use proptest::prelude::*;

fn objective(a: &Matrix, y: &Vector, alpha: f64, x: &[f64]) -> f64 {
    let r = a * Vector::from_column_slice(x) - y;
    r.norm_squared() + alpha * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// Grid search over a box followed by cyclic coordinate descent with exact
/// one-dimensional minimization.
fn grid_and_polish(a: &Matrix, y: &Vector, alpha: f64) -> Vec<f64> {
    let n = a.ncols();
    let steps = 41usize;
    let radius = 2.0 * y.norm()
        / a.column_iter()
            .map(|c| c.norm())
            .fold(f64::INFINITY, f64::min)
            .max(1e-3);
    let mut best = vec![0.0; n];
    let mut best_f = objective(a, y, alpha, &best);
    let total = steps.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let k = c % steps;
                c /= steps;
                -radius + 2.0 * radius * k as f64 / (steps - 1) as f64
            })
            .collect();
        let f = objective(a, y, alpha, &x);
        if f < best_f {
            best_f = f;
            best = x;
        }
    }
    for _ in 0..200_000 {
        let mut moved = 0.0f64;
        for j in 0..n {
            let col = a.column(j);
            let sq = col.norm_squared();
            if sq == 0.0 {
                continue;
            }
            let mut partial = y.clone() * -1.0;
            for (k, &bk) in best.iter().enumerate().filter(|&(k, _)| k != j) {
                partial += a.column(k) * bk;
            }
            // minimize sq t^2 + 2 t <col, partial> + alpha |t|
            let g = -col.dot(&partial);
            let t = if g > alpha / 2.0 {
                (g - alpha / 2.0) / sq
            } else if g < -alpha / 2.0 {
                (g + alpha / 2.0) / sq
            } else {
                0.0
            };
            moved = moved.max((t - best[j]).abs());
            best[j] = t;
        }
        if moved < 1e-15 {
            break;
        }
    }
    best
}

#[test]
fn identity_section_is_soft_threshold() {
    let y = [1.3, -0.2, 0.05, -4.0, 0.0, 0.7];
    let alpha = 0.5;
    let p = TikhonovProblem::new(Matrix::identity(6, 6), &FinSeq::from_dense(&y), alpha).unwrap();
    let r = tikhonov_solve(&p, 1e-12, 10_000).unwrap();
    let x = r.dense(6);
    for (xi, yi) in x.iter().zip(y) {
        let expected = yi.signum() * (yi.abs() - alpha / 2.0).max(0.0);
        assert!((xi - expected).abs() <= 1e-12, "{xi} vs {expected}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn agrees_with_grid_and_polish(
        rows in 2usize..5,
        cols in 1usize..=3,
        seed in prop::collection::vec(-2.0f64..2.0, 15),
        ydata in prop::collection::vec(-2.0f64..2.0, 4),
        alpha in 0.01f64..1.0,
    ) {
        let a = Matrix::from_fn(rows, cols, |i, j| seed[i * 3 + j] + if i == j { 1.5 } else { 0.0 });
        let y = Vector::from_fn(rows, |i, _| ydata[i]);
        let p = TikhonovProblem::new(a.clone(), &FinSeq::from_dense(y.as_slice()), alpha).unwrap();
        let r = tikhonov_solve(&p, 1e-12, 200_000).unwrap();
        let oracle = grid_and_polish(&a, &y, alpha);
        let ours = r.dense(cols);
        let (fo, fs) = (objective(&a, &y, alpha, &oracle), objective(&a, &y, alpha, &ours));
        prop_assert!(fs <= fo + 1e-9, "solver {fs} oracle {fo}");
        for (u, v) in ours.iter().zip(&oracle) {
            prop_assert!((u - v).abs() <= 1e-6, "{ours:?} vs {oracle:?}");
        }
    }

    #[test]
    fn minimizer_satisfies_subgradient_condition(
        seed in prop::collection::vec(-1.0f64..1.0, 40),
        alpha in 0.001f64..0.5,
    ) {
        let a = Matrix::from_fn(5, 8, |i, j| seed[i * 8 + j]);
        let y = FinSeq::from_dense(&[1.0, -1.0, 0.5, 0.0, 2.0]);
        let p = TikhonovProblem::new(a.clone(), &y, alpha).unwrap();
        let r = tikhonov_solve(&p, 1e-9, 200_000).unwrap();
        prop_assert!(r.converged);
        // independent check of 0 in 2 A^T (A x - y) + alpha d|x|_1
        let x = Vector::from_vec(r.dense(8));
        let g = a.transpose() * (&a * &x - Vector::from_vec(y.to_dense_f64(5))) * 2.0;
        for j in 0..8 {
            if x[j] != 0.0 {
                prop_assert!((g[j] + alpha * x[j].signum()).abs() <= 1e-7);
            } else {
                prop_assert!(g[j].abs() <= alpha + 1e-7);
            }
        }
        prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-13)));
    }
}
