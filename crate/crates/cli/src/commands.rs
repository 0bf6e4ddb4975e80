use std::fmt::Write as _;

use mazur_core::certify::{
    catalog, certificate_lp, classify, factorization_check, minnorm_certificate_with, qdist,
    FactorizationReport, Tri,
};
use mazur_core::export::{
    dense_binary, enumeration_csv, enumeration_json, matrix_csv, study_csv, to_json,
};
use mazur_core::linalg::{self, Matrix};
use mazur_core::mazur::MazurOperator;
use mazur_core::regsolve::{
    full_space_failure_probe, noise_convergence_study, seeded_unit_direction, tikhonov_solve_from,
    TikhonovProblem,
};
use mazur_core::riesz::{build_t, greedy_select, RestrictedOperator, RieszSelection};
use mazur_core::seqspace::{enumerate_sphere, FinSeq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::artifacts::Artifacts;
use crate::config::{ConfigError, ExperimentConfig, Format};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(String),
}

impl<E: std::error::Error> From<E> for RunError {
    fn from(e: E) -> Self {
        RunError::Numerical(e.to_string())
    }
}

fn config_error(message: String) -> RunError {
    RunError::Config(ConfigError {
        line: None,
        message,
    })
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, RunError> {
    to_json(value).map_err(|e| RunError::Numerical(e.to_string()))
}

pub fn enumerate(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let terms = enumerate_sphere(cfg.mode, cfg.n);
    let mut out = Artifacts::default();
    match cfg.format {
        Format::Csv => out.add("enumeration.csv", enumeration_csv(&terms)),
        Format::Json => out.add("enumeration.json", json_of(enumeration_json(&terms))?),
    }
    Ok(out)
}

fn json_of(r: serde_json::Result<String>) -> Result<String, RunError> {
    r.map_err(|e| RunError::Numerical(e.to_string()))
}

#[derive(Serialize)]
struct BuildReport {
    #[serde(flatten)]
    descriptor: mazur_core::mazur::OperatorDescriptor,
    truncated_columns: usize,
    max_truncation_defect: f64,
    rank: usize,
}

pub fn build(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let b = MazurOperator::new(cfg.mode, cfg.n, cfg.m)?;
    let section = b.finite_section(cfg.n)?;
    let report = BuildReport {
        descriptor: b.descriptor(),
        truncated_columns: b.truncated_columns(),
        max_truncation_defect: b.max_truncation_defect(),
        rank: linalg::rank(&section),
    };
    let mut out = Artifacts::default();
    out.add("descriptor.json", json(&report)?);
    out.add("section.bin", dense_binary(&section));
    if cfg.format == Format::Csv {
        out.add("section.csv", matrix_csv(&section));
    }
    Ok(out)
}

#[derive(Serialize)]
struct SelectOutput {
    #[serde(flatten)]
    report: mazur_core::riesz::SelectionReport,
    row_frame: usize,
    t_sigma_min: f64,
    t_sigma_max: f64,
}

pub fn select(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let sel = greedy_select(cfg.mode, cfg.levels, cfg.budget)?;
    let t = build_t(&sel, sel.row_frame())?;
    let out_json = SelectOutput {
        report: sel.report(),
        row_frame: sel.row_frame(),
        t_sigma_min: linalg::smallest_singular_value(&t),
        t_sigma_max: linalg::spectral_norm(&t),
    };
    let mut out = Artifacts::default();
    out.add("selection.json", json(&out_json)?);
    out.add("t_section.bin", dense_binary(&t));
    if cfg.format == Format::Csv {
        let mut csv = String::from("level,index,defect\n");
        for (l, (k, d)) in sel.indices().iter().zip(sel.defects()).enumerate() {
            let _ = writeln!(csv, "{},{},{}", l + 1, k, d);
        }
        out.add("selection.csv", csv);
    }
    Ok(out)
}

/// Selection, restricted operator and ground truth in l1 coordinates.
fn subspace_setup(
    cfg: &ExperimentConfig,
) -> Result<(RieszSelection, RestrictedOperator, FinSeq<f64>), RunError> {
    if let Some(&(l, _)) = cfg.x_true.iter().find(|(l, _)| *l > cfg.levels) {
        return Err(config_error(format!(
            "`x_true` uses level {l} but the selection depth L is {}",
            cfg.levels
        )));
    }
    let sel = greedy_select(cfg.mode, cfg.levels, cfg.budget)?;
    let op = RestrictedOperator::from_selection(&sel, sel.row_frame())?;
    let idx = sel.indices();
    let x = FinSeq::from_pairs(cfg.x_true.iter().map(|&(l, v)| (idx[l - 1], v)))?;
    Ok((sel, op, x))
}

#[derive(Serialize)]
struct TikhonovOutput {
    alpha: f64,
    delta: f64,
    objective: f64,
    subgradient_residual: f64,
    iterations: usize,
    converged: bool,
    error_l1: f64,
    /// `(level, enumeration index, value)`
    minimizer: Vec<(usize, usize, f64)>,
}

pub fn tikhonov(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let (sel, op, x) = subspace_setup(cfg)?;
    let clean = op.apply(&x)?.to_dense_f64(op.rows());
    let noise = seeded_unit_direction(op.rows(), cfg.seed);
    let y: Vec<f64> = clean
        .iter()
        .zip(noise.iter())
        .map(|(c, e)| c + cfg.delta * e)
        .collect();
    let p = TikhonovProblem::on_subspace(&op, &FinSeq::from_dense(&y), cfg.alpha)?;
    let r = tikhonov_solve_from(&p, None, cfg.solver)?;
    if !r.converged {
        return Err(RunError::Numerical(format!(
            "solver stopped after {} iterations with residual {:e}",
            r.iterations, r.subgradient_residual
        )));
    }
    let truth = op.coefficients(&x)?;
    let coeffs = r.dense(op.levels());
    let idx = sel.indices();
    let error_l1 = coeffs
        .iter()
        .enumerate()
        .map(|(l, v)| (v - truth.get(l + 1).copied().unwrap_or(0.0)).abs())
        .sum();
    let mut out = Artifacts::default();
    match cfg.format {
        Format::Csv => {
            let mut csv = String::from("level,index,value,truth\n");
            for (l, v) in coeffs.iter().enumerate() {
                let t = truth.get(l + 1).copied().unwrap_or(0.0);
                let _ = writeln!(csv, "{},{},{},{}", l + 1, idx[l], v, t);
            }
            out.add("tikhonov.csv", csv);
        }
        Format::Json => {
            let report = TikhonovOutput {
                alpha: cfg.alpha,
                delta: cfg.delta,
                objective: r.objective,
                subgradient_residual: r.subgradient_residual,
                iterations: r.iterations,
                converged: r.converged,
                error_l1,
                minimizer: r
                    .minimizer
                    .iter()
                    .map(|(l, &v)| (l, idx[l - 1], v))
                    .collect(),
            };
            out.add("tikhonov.json", json(&report)?);
        }
    }
    Ok(out)
}

pub fn study(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let (_, op, x) = subspace_setup(cfg)?;
    let st = noise_convergence_study(&op, &x, &cfg.deltas, cfg.rule, cfg.seed, cfg.solver)?;
    let mut out = Artifacts::default();
    match cfg.format {
        Format::Csv => out.add("study.csv", study_csv(&st.rows)),
        Format::Json => out.add("study.json", json(&st)?),
    }
    Ok(out)
}

pub fn probe(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let top = *cfg.n_grid.last().expect("validated nonempty");
    if top > cfg.n {
        return Err(config_error(format!(
            "`n_grid` reaches {top} but the column budget `n` is {}",
            cfg.n
        )));
    }
    if let Some(&(i, _)) = cfg.probe_target.iter().find(|(i, _)| *i > cfg.m) {
        return Err(config_error(format!(
            "`probe_target` touches coordinate {i} beyond the row truncation m = {}",
            cfg.m
        )));
    }
    let b = MazurOperator::new(cfg.mode, cfg.n, cfg.m)?;
    let mut y = vec![0.0; cfg.m];
    for &(i, v) in &cfg.probe_target {
        y[i - 1] += v;
    }
    let noise = seeded_unit_direction(cfg.m, cfg.seed);
    for (yi, e) in y.iter_mut().zip(noise.iter()) {
        *yi += cfg.delta * e;
    }
    let table = full_space_failure_probe(
        &b,
        &FinSeq::from_dense(&y),
        &cfg.n_grid,
        cfg.alpha,
        cfg.solver,
    )?;
    let mut out = Artifacts::default();
    match cfg.format {
        Format::Csv => {
            let mut csv =
                String::from("n,rank,l1_norm,objective,subgradient_residual,iterations\n");
            for r in &table.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    r.n, r.rank, r.l1_norm, r.objective, r.subgradient_residual, r.iterations
                );
            }
            out.add("probe.csv", csv);
        }
        Format::Json => out.add("probe.json", json(&table)?),
    }
    Ok(out)
}

pub fn certify(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let c = &cfg.certify;
    let b = MazurOperator::new(cfg.mode, c.k, cfg.m)?;
    let signs = (c.signs[0], c.signs[1]);
    let cert = minnorm_certificate_with(&b, c.pair[0], c.pair[1], signs, c.k, c.arithmetic)?;
    let lp = certificate_lp(&b, c.pair[0], c.pair[1], signs, cert.constraints_used)?;
    let mut out = Artifacts::default();
    out.add("certificate.json", json(&cert)?);
    out.add("certificate_lp.txt", lp.to_lp_text());
    Ok(out)
}

#[derive(Serialize)]
struct RankRow {
    n: usize,
    rank: usize,
    sigma_max: f64,
    sigma_min_nonzero: f64,
}

pub fn rank(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let top = *cfg.n_grid.last().expect("validated nonempty");
    let b = MazurOperator::new(cfg.mode, top, cfg.m)?;
    let rows: Vec<RankRow> = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let s = b.finite_section(n)?;
            let r = linalg::rank(&s);
            let sv = linalg::singular_values(&s);
            Ok(RankRow {
                n,
                rank: r,
                sigma_max: sv.first().copied().unwrap_or(0.0),
                sigma_min_nonzero: if r > 0 { sv[r - 1] } else { 0.0 },
            })
        })
        .collect::<Result<_, RunError>>()?;
    let mut out = Artifacts::default();
    match cfg.format {
        Format::Csv => {
            let mut csv = String::from("n,rank,sigma_max,sigma_min_nonzero\n");
            for r in &rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    r.n, r.rank, r.sigma_max, r.sigma_min_nonzero
                );
            }
            out.add("rank.csv", csv);
        }
        Format::Json => out.add("rank.json", json(&rows)?),
    }
    Ok(out)
}

#[derive(Serialize)]
struct QdistOutput {
    value: f64,
    rank: usize,
    null_dim: usize,
}

pub fn qdist_cmd(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let q = &cfg.qdist;
    let rows = q.a.len();
    let cols = q.a[0].len();
    let a = Matrix::from_fn(rows, cols, |i, j| q.a[i][j]);
    let z = linalg::null_space(&a);
    let value = qdist(
        &a,
        &z,
        &FinSeq::from_dense(&q.y),
        &FinSeq::from_dense(&q.y2),
    )?;
    let report = QdistOutput {
        value,
        rank: linalg::rank(&a),
        null_dim: z.ncols(),
    };
    let mut out = Artifacts::default();
    out.add("qdist.json", json(&report)?);
    Ok(out)
}

#[derive(Serialize)]
struct ClassifyRow {
    name: String,
    closed_range: Tri,
    complemented_nullspace: Tri,
    range_contains_infdim_closed_subspace: Tri,
    strictly_singular: Tri,
    compact: Tri,
    verdict: mazur_core::certify::Verdict,
}

pub fn classify_cmd(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for e in catalog() {
        let c = classify(&e.flags)?;
        rows.push(ClassifyRow {
            name: e.name.clone(),
            closed_range: e.flags.closed_range.value,
            complemented_nullspace: e.flags.complemented_nullspace.value,
            range_contains_infdim_closed_subspace: e
                .flags
                .range_contains_infdim_closed_subspace
                .value,
            strictly_singular: e.flags.strictly_singular.value,
            compact: e.flags.compact.value,
            verdict: c.verdict,
        });
        entries.push(serde_json::json!({ "entry": e, "classification": c }));
    }
    let mut out = Artifacts::default();
    match cfg.format {
        Format::Csv => {
            let word = |t: Tri| match t {
                Tri::True => "true",
                Tri::False => "false",
                Tri::Unknown => "unknown",
            };
            let mut csv = String::from("name,closed_range,complemented_nullspace,range_contains_infdim_closed_subspace,strictly_singular,compact,verdict\n");
            for r in &rows {
                let verdict = serde_json::to_value(r.verdict)?;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    r.name,
                    word(r.closed_range),
                    word(r.complemented_nullspace),
                    word(r.range_contains_infdim_closed_subspace),
                    word(r.strictly_singular),
                    word(r.compact),
                    verdict.as_str().unwrap_or_default()
                );
            }
            out.add("classify.csv", csv);
        }
        Format::Json => out.add("classify.json", json(&entries)?),
    }
    Ok(out)
}

/// Random `rows x cols` matrix of the given rank and an oblique complement
/// of its null space.
pub fn factor_instance(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    rank: usize,
) -> (Matrix, Matrix) {
    loop {
        let left = Matrix::from_fn(rows, rank, |_, _| rng.random_range(-1.0..1.0));
        let right = Matrix::from_fn(rank, cols, |_, _| rng.random_range(-1.0..1.0));
        let a = left * right;
        let (row, null, r) = linalg::row_and_null_space(&a);
        if r != rank {
            continue;
        }
        let tilt = Matrix::from_fn(null.ncols(), r, |_, _| rng.random_range(-0.5..0.5));
        return (a, row + null * tilt);
    }
}

pub fn factor(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let f = &cfg.factor;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut reports: Vec<FactorizationReport> = Vec::with_capacity(f.instances);
    for i in 0..f.instances {
        let (a, u) = factor_instance(&mut rng, f.rows, f.cols, f.rank);
        reports.push(factorization_check(
            &a,
            &u,
            f.samples,
            f.tol,
            cfg.seed.wrapping_add(i as u64),
        )?);
    }
    if let Some((i, r)) = reports.iter().enumerate().find(|(_, r)| !r.passed) {
        return Err(RunError::Numerical(format!(
            "factorization identities fail on instance {i}: residuals {:e}, {:e}, {:e}",
            r.factor_residual, r.inverse_residual, r.quotient_residual
        )));
    }
    let mut out = Artifacts::default();
    match cfg.format {
        Format::Csv => {
            let mut csv = String::from("instance,rank,nullity,factor_residual,inverse_residual,quotient_residual,sigma_min_tilde,sigma_min_q_on_u,passed\n");
            for (i, r) in reports.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{}",
                    i,
                    r.rank,
                    r.nullity,
                    r.factor_residual,
                    r.inverse_residual,
                    r.quotient_residual,
                    r.sigma_min_tilde,
                    r.sigma_min_q_on_u,
                    r.passed
                );
            }
            out.add("factor.csv", csv);
        }
        Format::Json => out.add("factor.json", json(&reports)?),
    }
    Ok(out)
}
