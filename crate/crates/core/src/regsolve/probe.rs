use serde::{Deserialize, Serialize};

use super::solver::{tikhonov_solve_from, SolverOptions, TikhonovProblem};
use super::RegError;
use crate::linalg;
use crate::mazur::MazurOperator;
use crate::seqspace::{FinSeq, Space};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub n: usize,
    pub rank: usize,
    pub l1_norm: f64,
    pub objective: f64,
    pub subgradient_residual: f64,
    pub iterations: usize,
}

/// Diagnostics of the unrestricted problem on growing sections `B_n`.
///
/// Nothing here is a pass/fail verdict: minimizers always exist on a finite
/// section, so growth of `|x|_1` with `n` is only reported as a symptom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub alpha: f64,
    pub rows: Vec<ProbeRow>,
    pub objective_nonincreasing: bool,
    /// Ratio of the last to the first minimizer l1 norm.
    pub norm_growth: f64,
}

/// Solves the full-section problem for every `n` on an ascending grid,
/// warm-starting each section from the previous minimizer so the optimal
/// objective is non-increasing in `n`.
pub fn full_space_failure_probe(
    b: &MazurOperator,
    y_delta: &FinSeq<f64>,
    n_grid: &[usize],
    alpha: f64,
    opts: SolverOptions,
) -> Result<ProbeTable, RegError> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) || n_grid[0] == 0 {
        return Err(RegError::BadParameter(
            "section grid must be positive and strictly ascending".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut previous: Vec<f64> = Vec::new();
    for &n in n_grid {
        let section = b.finite_section(n)?;
        let rank = linalg::rank(&section);
        let p = TikhonovProblem::new(section, y_delta, alpha)?;
        let mut start = previous.clone();
        start.resize(n, 0.0);
        let r = tikhonov_solve_from(&p, Some(&start), opts)?;
        previous = r.dense(n);
        rows.push(ProbeRow {
            n,
            rank,
            l1_norm: r.minimizer.norm(Space::L1),
            objective: r.objective,
            subgradient_residual: r.subgradient_residual,
            iterations: r.iterations,
        });
    }
    let objective_nonincreasing = rows.windows(2).all(|w| w[1].objective <= w[0].objective);
    let first = rows[0].l1_norm;
    let norm_growth = if first > 0.0 {
        rows.last().map_or(1.0, |r| r.l1_norm) / first
    } else {
        f64::NAN
    };
    Ok(ProbeTable {
        alpha,
        rows,
        objective_nonincreasing,
        norm_growth,
    })
}
