use mazur_core::linalg::{self, Vector};
use mazur_core::riesz::{build_t, greedy_select, lambda_bound, lambda_bound_limit, RieszSelection};
use mazur_core::seqspace::{EnumerationMode, FinSeq, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn selection() -> &'static RieszSelection {
    static SEL: OnceLock<RieszSelection> = OnceLock::new();
    SEL.get_or_init(|| greedy_select(EnumerationMode::NoSingleton, 12, 1_000_000).unwrap())
}

#[test]
fn paley_wiener_inequality() {
    let sel = selection();
    let frame = sel.row_frame();
    let lambda: f64 = sel.defects().iter().map(|d| d * d).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..500 {
        let c: Vec<f64> = (0..sel.levels())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let mut v = vec![0.0; frame];
        for (l, (&cl, z)) in c.iter().zip(sel.zetas()).enumerate() {
            v[l] += cl;
            for (i, &zi) in z.unit().iter() {
                v[i - 1] -= cl * zi;
            }
        }
        let lhs = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cn = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(lhs <= lambda * cn + 1e-10, "{lhs} > {lambda} * {cn}");
    }
}

#[test]
fn selected_terms_are_separated() {
    let sel = selection();
    let z = sel.zetas();
    let idx = sel.indices();
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            assert_ne!(idx[a], idx[b]);
            let dist = z[a].unit().axpy(-1.0, z[b].unit()).norm(Space::L2);
            let bound = 2f64.sqrt() - 1.0 / (2.0 * (a + 1) as f64) - 1.0 / (2.0 * (b + 1) as f64);
            assert!(dist >= bound - 1e-12 && bound > 0.0);
        }
    }
}

#[test]
fn defects_respect_level_bounds() {
    let sel = selection();
    for (l, (d, z)) in sel.defects().iter().zip(sel.zetas()).enumerate() {
        assert!(*d <= 1.0 / (2.0 * (l + 1) as f64));
        let direct = z
            .unit()
            .axpy(-1.0, &FinSeq::unit(l + 1, 1.0))
            .norm(Space::L2);
        assert!((direct - d).abs() < 1e-14);
    }
    assert!(sel.lambda_data() <= sel.lambda_bound() + 1e-15);
}

#[test]
fn spectral_sandwich() {
    let sel = selection();
    let t = build_t(sel, sel.row_frame()).unwrap();
    let lam = sel.lambda_data();
    for s in linalg::singular_values(&t) {
        assert!(s >= 1.0 - lam - 1e-9 && s <= 1.0 + lam + 1e-9);
    }
    // ||T c|| against ||c|| directly
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let c = Vector::from_fn(sel.levels(), |_, _| rng.random_range(-1.0..1.0));
        let r = (&t * &c).norm() / c.norm();
        assert!(r >= 1.0 - lam - 1e-9 && r <= 1.0 + lam + 1e-9);
    }
}

#[test]
fn basel_limit() {
    // sum 1/(4 l^2) = pi^2 / 24
    let closed = (std::f64::consts::PI.powi(2) / 24.0).sqrt();
    assert!((lambda_bound_limit() - closed).abs() < 1e-15);
    assert!((lambda_bound(1_000_000) - closed).abs() < 1e-6);
    assert!(lambda_bound(5) < lambda_bound(6));
}

#[test]
fn canonical_selection_is_exact() {
    let sel = greedy_select(EnumerationMode::Canonical, 5, 1000).unwrap();
    assert!(sel.defects().iter().all(|&d| d == 0.0));
    assert_eq!(sel.lambda_data(), 0.0);
}
