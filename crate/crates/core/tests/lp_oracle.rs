use mazur_core::certify::{
    lp_solve, minnorm_certificate, qdist, qdist_with, CertificateVerdict, LinearProgram,
    LpArithmetic, LpOutcome, Sign, VarBound,
};
use mazur_core::linalg::{self, Matrix};
use mazur_core::mazur::MazurOperator;
use mazur_core::seqspace::{EnumerationMode, FinSeq};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute force for two-variable LPs in a box: best objective over all
/// pairwise intersections of constraint lines that are feasible.
fn vertex_oracle(c: [f64; 2], rows: &[([f64; 2], f64)]) -> Option<f64> {
    let feasible = |x: [f64; 2]| {
        rows.iter()
            .all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9)
    };
    let mut best: Option<f64> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a, b) = (rows[i].0, rows[j].0);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [
                (rows[i].1 * b[1] - a[1] * rows[j].1) / det,
                (a[0] * rows[j].1 - rows[i].1 * b[0]) / det,
            ];
            if feasible(x) {
                let v = c[0] * x[0] + c[1] * x[1];
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_vertex_enumeration(
        c in prop::array::uniform2(-3.0f64..3.0),
        cons in prop::collection::vec((prop::array::uniform2(-3.0f64..3.0), -2.0f64..4.0), 0..6),
    ) {
        // box |x_i| <= 5 keeps everything bounded
        let mut rows: Vec<([f64; 2], f64)> = vec![([1.0, 0.0], 5.0), ([-1.0, 0.0], 5.0), ([0.0, 1.0], 5.0), ([0.0, -1.0], 5.0)];
        rows.extend(cons);
        let mut lp = LinearProgram::new(c.to_vec());
        for (a, b) in &rows {
            lp.push_le(a.to_vec(), *b);
        }
        let oracle = vertex_oracle(c, &rows);
        match (lp_solve(&lp).unwrap(), oracle) {
            (LpOutcome::Optimal { value, point }, Some(o)) => {
                prop_assert!((value - o).abs() < 1e-7, "{value} vs {o}");
                for (a, b) in &rows {
                    prop_assert!(a[0] * point[0] + a[1] * point[1] <= b + 1e-7);
                }
            }
            (LpOutcome::Infeasible, None) => {}
            (got, o) => prop_assert!(false, "simplex {got:?}, oracle {o:?}"),
        }
    }
}

#[test]
fn exact_and_float_agree_on_random_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let n = 4;
        let mut lp = LinearProgram::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        lp.bounds = (0..n)
            .map(|_| VarBound {
                lower: Some(-2.0),
                upper: Some(3.0),
            })
            .collect();
        for _ in 0..5 {
            let row = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            lp.push_le(row, rng.random_range(0.0..2.0));
        }
        let f = lp_solve(&lp).unwrap();
        let e = mazur_core::certify::lp_solve_in(&lp, LpArithmetic::Exact).unwrap();
        match (f, e) {
            (LpOutcome::Optimal { value: a, .. }, LpOutcome::Optimal { value: b, .. }) => {
                assert!((a - b).abs() < 1e-9)
            }
            (a, b) => panic!("{a:?} vs {b:?}"),
        }
    }
}

#[test]
fn certificate_feasibility_is_monotone_in_k() {
    let b = MazurOperator::new(EnumerationMode::Canonical, 60, 8).unwrap();
    let pairs = [
        (1, 3, Sign::Plus, Sign::Plus),
        (3, 5, Sign::Plus, Sign::Minus),
        (1, 2, Sign::Plus, Sign::Minus),
    ];
    for (m, n, sm, sn) in pairs {
        let full = minnorm_certificate(&b, m, n, (sm, sn), 60).unwrap();
        let threshold = match full.verdict {
            CertificateVerdict::InfeasibleAtK { k } => k,
            CertificateVerdict::Feasible { .. } => 61,
        };
        for k in m.max(n)..=60 {
            let c = minnorm_certificate(&b, m, n, (sm, sn), k).unwrap();
            assert_eq!(c.is_feasible(), k < threshold, "pair ({m},{n}) at K={k}");
        }
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Matrix, Matrix, FinSeq<f64>, FinSeq<f64>) {
    loop {
        let cols = rng.random_range(2..=4);
        let rank = rng.random_range(1..cols);
        let left = Matrix::from_fn(3, rank, |_, _| rng.random_range(-1.0..1.0));
        let right = Matrix::from_fn(rank, cols, |_, _| rng.random_range(-1.0..1.0));
        let a = left * right;
        if linalg::rank(&a) != rank {
            continue;
        }
        let z = linalg::null_space(&a);
        let x1 = Matrix::from_fn(cols, 1, |_, _| rng.random_range(-1.0..1.0));
        let x2 = Matrix::from_fn(cols, 1, |_, _| rng.random_range(-1.0..1.0));
        let y1 = FinSeq::from_dense((&a * x1).as_slice());
        let y2 = FinSeq::from_dense((&a * x2).as_slice());
        return (a, z, y1, y2);
    }
}

/// Grid search over the null-space coefficients followed by a local refinement.
fn qdist_grid(a: &Matrix, z: &Matrix, y1: &FinSeq<f64>, y2: &FinSeq<f64>) -> f64 {
    let p = linalg::pinv(a);
    let yv = |y: &FinSeq<f64>| mazur_core::linalg::Vector::from_vec(y.to_dense_f64(a.nrows()));
    let d = &p * yv(y1) - &p * yv(y2);
    let r = z.ncols();
    let f = |c: &[f64]| {
        let shift = z * mazur_core::linalg::Vector::from_column_slice(c);
        (&d - shift).lp_norm(1)
    };
    let mut center = vec![0.0; r];
    let mut width = 4.0 * d.lp_norm(1).max(1e-3);
    let steps = 21i64;
    let mut best = f(&center);
    for _ in 0..60 {
        let total = (steps as usize).pow(r as u32);
        let mut best_c = center.clone();
        for code in 0..total {
            let mut k = code;
            let c: Vec<f64> = (0..r)
                .map(|i| {
                    let s = (k % steps as usize) as f64;
                    k /= steps as usize;
                    center[i] + width * (s / (steps - 1) as f64 - 0.5)
                })
                .collect();
            let v = f(&c);
            if v < best {
                best = v;
                best_c = c;
            }
        }
        center = best_c;
        width *= 0.6;
    }
    best
}

/// Exact oracle: a convex piecewise-linear minimum is attained where `r`
/// independent residual terms of `d - Z c` vanish.
fn qdist_vertices(a: &Matrix, z: &Matrix, y1: &FinSeq<f64>, y2: &FinSeq<f64>) -> f64 {
    let p = linalg::pinv(a);
    let yv = |y: &FinSeq<f64>| mazur_core::linalg::Vector::from_vec(y.to_dense_f64(a.nrows()));
    let d = &p * yv(y1) - &p * yv(y2);
    let (n, r) = z.shape();
    if r == 0 {
        return d.lp_norm(1);
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != r {
            continue;
        }
        let rows: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let zs = Matrix::from_fn(r, r, |i, j| z[(rows[i], j)]);
        let ds = mazur_core::linalg::Vector::from_fn(r, |i, _| d[rows[i]]);
        if let Some(c) = zs.lu().solve(&ds) {
            best = best.min((&d - z * c).lp_norm(1));
        }
    }
    best
}

#[test]
fn qdist_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..50 {
        let (a, z, y1, y2) = random_instance(&mut rng);
        assert!(z.ncols() <= 3);
        let lp = qdist(&a, &z, &y1, &y2).unwrap();
        let grid = qdist_grid(&a, &z, &y1, &y2);
        let exact = qdist_vertices(&a, &z, &y1, &y2);
        assert!(
            (lp - exact).abs() <= 1e-9,
            "case {case}: lp {lp} vertices {exact}"
        );
        assert!(
            (lp - grid).abs() <= 1e-4,
            "case {case}: lp {lp} grid {grid}"
        );
        // symmetric: the quotient norm of -d equals that of d
        let back = qdist(&a, &z, &y2, &y1).unwrap();
        assert!((lp - back).abs() <= 1e-9);
    }
}

#[test]
fn qdist_row_vector_example_is_exact() {
    let a = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
    let z = Matrix::from_column_slice(2, 1, &[1.0, -1.0]);
    let (zero, one) = (FinSeq::new(), FinSeq::unit(1, 1.0));
    assert_eq!(qdist(&a, &z, &zero, &one).unwrap(), 1.0);
    assert_eq!(
        qdist_with(&a, &z, &zero, &one, LpArithmetic::Exact).unwrap(),
        1.0
    );
}
