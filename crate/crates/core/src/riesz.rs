//! Greedy selection of a Riesz subsequence `zeta_{k_l}` close to the unit
//! vectors `e_l`, the Paley-Wiener constant, the isomorphism section `T`,
//! and the restriction of `B` to `U = span{e_{k_l}}`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::mazur::{MazurError, MazurOperator};
use crate::seqspace::{EnumerationMode, FinSeq, SphereEnumerator, SphereVector};

/// Slack allowed on the spectral sandwich `[1 - lambda, 1 + lambda]`.
pub const SPECTRAL_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RieszError {
    #[error("selection depth must be at least 1")]
    EmptySelection,
    #[error("level {level}: no unused enumeration term within 1/(2*{level}) of e_{level} among the first {budget}")]
    NotFoundWithinBudget { level: usize, budget: usize },
    #[error(transparent)]
    Frame(#[from] MazurError),
    #[error("coordinate {0} is not one of the selected indices")]
    NotInSubspace(usize),
    #[error("singular value {sigma} outside [{lo}, {hi}]")]
    SpectralBound { sigma: f64, lo: f64, hi: f64 },
}

/// Result of the greedy selection.
#[derive(Debug, Clone)]
pub struct RieszSelection {
    mode: EnumerationMode,
    zetas: Vec<SphereVector>,
    defects: Vec<f64>,
}

/// Serializable summary of a selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub mode: EnumerationMode,
    pub levels: usize,
    pub indices: Vec<usize>,
    pub defects: Vec<f64>,
    pub lambda_bound: f64,
    pub lambda_data: f64,
}

impl RieszSelection {
    pub fn mode(&self) -> EnumerationMode {
        self.mode
    }

    /// Depth `L`.
    pub fn levels(&self) -> usize {
        self.zetas.len()
    }

    /// Enumeration indices `k_1, ..., k_L`.
    pub fn indices(&self) -> Vec<usize> {
        self.zetas.iter().map(SphereVector::index).collect()
    }

    /// `d_l = |e_l - zeta_{k_l}|_2`.
    pub fn defects(&self) -> &[f64] {
        &self.defects
    }

    pub fn zetas(&self) -> &[SphereVector] {
        &self.zetas
    }

    /// A-priori constant `sqrt(sum_{l<=L} 1/(4 l^2))`.
    pub fn lambda_bound(&self) -> f64 {
        lambda_bound(self.levels())
    }

    /// Data-driven constant `sqrt(sum d_l^2)`; never exceeds [`Self::lambda_bound`].
    pub fn lambda_data(&self) -> f64 {
        self.defects.iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    /// Largest coordinate touched by any selected term.
    pub fn row_frame(&self) -> usize {
        self.zetas
            .iter()
            .map(SphereVector::max_index)
            .max()
            .unwrap_or(0)
    }

    pub fn report(&self) -> SelectionReport {
        SelectionReport {
            mode: self.mode,
            levels: self.levels(),
            indices: self.indices(),
            defects: self.defects.clone(),
            lambda_bound: self.lambda_bound(),
            lambda_data: self.lambda_data(),
        }
    }
}

/// For each level `l = 1..=L`, the smallest unused enumeration index `k_l`
/// with `|e_l - zeta_{k_l}|_2 <= 1/(2l)`, scanning at most `budget` terms.
pub fn greedy_select(
    mode: EnumerationMode,
    levels: usize,
    budget: usize,
) -> Result<RieszSelection, RieszError> {
    if levels == 0 {
        return Err(RieszError::EmptySelection);
    }
    let mut chosen: Vec<Option<(SphereVector, f64)>> = vec![None; levels];
    let mut used = BTreeSet::new();
    let mut open = levels;
    for z in SphereEnumerator::new(mode).take(budget) {
        // a term within 1/2 of e_l has its dominant coordinate at l
        let Some((l, _)) = z
            .unit()
            .iter()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        else {
            continue;
        };
        if l > levels || chosen[l - 1].is_some() || used.contains(&z.index()) {
            continue;
        }
        let defect = z.distance_to(&FinSeq::unit(l, 1.0));
        if defect <= 1.0 / (2.0 * l as f64) {
            used.insert(z.index());
            chosen[l - 1] = Some((z, defect));
            open -= 1;
            if open == 0 {
                break;
            }
        }
    }
    let mut zetas = Vec::with_capacity(levels);
    let mut defects = Vec::with_capacity(levels);
    for (l, slot) in chosen.into_iter().enumerate() {
        let (z, d) = slot.ok_or(RieszError::NotFoundWithinBudget {
            level: l + 1,
            budget,
        })?;
        zetas.push(z);
        defects.push(d);
    }
    Ok(RieszSelection {
        mode,
        zetas,
        defects,
    })
}

/// `sqrt(sum_{l=1}^{L} 1/(4 l^2))`.
pub fn lambda_bound(levels: usize) -> f64 {
    (1..=levels)
        .map(|l| 0.25 / (l as f64 * l as f64))
        .sum::<f64>()
        .sqrt()
}

/// Limit of [`lambda_bound`] as `L -> infinity`: `pi / (2 sqrt 6)`.
pub fn lambda_bound_limit() -> f64 {
    std::f64::consts::PI / (2.0 * 6f64.sqrt())
}

fn selection_matrix(zetas: &[SphereVector], rows: usize) -> Result<Matrix, RieszError> {
    let mut t = Matrix::zeros(rows, zetas.len());
    for (l, z) in zetas.iter().enumerate() {
        if z.max_index() > rows {
            return Err(MazurError::OutOfFrame {
                index: z.max_index(),
                frame: rows,
            }
            .into());
        }
        for (i, &v) in z.unit().iter() {
            t[(i - 1, l)] = v;
        }
    }
    Ok(t)
}

fn check_sandwich(t: &Matrix, lambda: f64) -> Result<(), RieszError> {
    let (lo, hi) = (1.0 - lambda - SPECTRAL_SLACK, 1.0 + lambda + SPECTRAL_SLACK);
    match linalg::singular_values(t)
        .into_iter()
        .find(|s| *s < lo || *s > hi)
    {
        Some(sigma) => Err(RieszError::SpectralBound { sigma, lo, hi }),
        None => Ok(()),
    }
}

/// Section of `T` on the first `L` unit vectors: column `l` is `zeta_{k_l}`.
///
/// Checks that all singular values lie in `[1 - lambda, 1 + lambda]` with the
/// data-driven `lambda`.
pub fn build_t(selection: &RieszSelection, rows: usize) -> Result<Matrix, RieszError> {
    let t = selection_matrix(&selection.zetas, rows)?;
    check_sandwich(&t, selection.lambda_data())?;
    Ok(t)
}

/// `B` restricted to `U = span{e_{k_1}, ..., e_{k_L}}` at truncation.
#[derive(Debug, Clone)]
pub struct RestrictedOperator {
    selection: RieszSelection,
    columns: Matrix,
    sigma_min: f64,
    sigma_max: f64,
}

/// Restricts a built operator to the span of the selected coordinates.
pub fn restrict(
    b: &MazurOperator,
    selection: &RieszSelection,
) -> Result<RestrictedOperator, RieszError> {
    let indices = selection.indices();
    if let Some(&k) = indices.iter().find(|&&k| k > b.cols()) {
        return Err(MazurError::OutOfFrame {
            index: k,
            frame: b.cols(),
        }
        .into());
    }
    let columns = b.select_columns(&indices)?;
    RestrictedOperator::with_columns(selection.clone(), columns)
}

impl RestrictedOperator {
    /// Builds the restriction straight from the selected terms, without
    /// materializing the full column budget of `B`.
    pub fn from_selection(selection: &RieszSelection, rows: usize) -> Result<Self, RieszError> {
        let columns = selection_matrix(&selection.zetas, rows)?;
        Self::with_columns(selection.clone(), columns)
    }

    fn with_columns(selection: RieszSelection, columns: Matrix) -> Result<Self, RieszError> {
        let s = linalg::singular_values(&columns);
        let sigma_max = s.first().copied().unwrap_or(0.0);
        let sigma_min = if columns.ncols() <= columns.nrows() {
            s.last().copied().unwrap_or(0.0)
        } else {
            0.0
        };
        Ok(RestrictedOperator {
            selection,
            columns,
            sigma_min,
            sigma_max,
        })
    }

    pub fn selection(&self) -> &RieszSelection {
        &self.selection
    }

    /// The `m x L` matrix of selected (truncated) columns.
    pub fn matrix(&self) -> &Matrix {
        &self.columns
    }

    pub fn rows(&self) -> usize {
        self.columns.nrows()
    }

    pub fn levels(&self) -> usize {
        self.columns.ncols()
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    /// Injectivity certificate at truncation: `sigma_min >= 1 - lambda > 0`.
    pub fn injective_on_frame(&self) -> bool {
        let lambda = self.selection.lambda_data();
        lambda < 1.0 && self.sigma_min >= 1.0 - lambda - SPECTRAL_SLACK
    }

    /// Embeds coefficients `c_l` as the l1 element `sum c_l e_{k_l}`.
    pub fn lift(&self, coeffs: &FinSeq<f64>) -> Result<FinSeq<f64>, RieszError> {
        let idx = self.selection.indices();
        if coeffs.max_index() > idx.len() {
            return Err(MazurError::OutOfFrame {
                index: coeffs.max_index(),
                frame: idx.len(),
            }
            .into());
        }
        Ok(
            FinSeq::from_pairs(coeffs.iter().map(|(l, &c)| (idx[l - 1], c)))
                .expect("indices are distinct"),
        )
    }

    /// Inverse of [`Self::lift`]; fails if `x` has mass off the selected indices.
    pub fn coefficients(&self, x: &FinSeq<f64>) -> Result<FinSeq<f64>, RieszError> {
        let idx = self.selection.indices();
        let mut pairs = Vec::with_capacity(x.support_len());
        for (k, &v) in x.iter() {
            let l = idx
                .iter()
                .position(|&kl| kl == k)
                .ok_or(RieszError::NotInSubspace(k))?;
            pairs.push((l + 1, v));
        }
        Ok(FinSeq::from_pairs(pairs).expect("selected indices are distinct"))
    }

    /// `B|_U x` for `x` supported on the selected indices.
    pub fn apply(&self, x: &FinSeq<f64>) -> Result<FinSeq<f64>, RieszError> {
        let c = self.coefficients(x)?;
        let dense = &self.columns * nalgebra::DVector::from_vec(c.to_dense_f64(self.levels()));
        Ok(FinSeq::from_dense(dense.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_bound(1), 0.5);
        assert!((lambda_bound(2) - 5f64.sqrt() / 4.0).abs() < 1e-15);
        // Basel: sum 1/l^2 = pi^2/6
        assert!((lambda_bound_limit() - 0.641_275).abs() < 1e-6);
        assert!(lambda_bound_limit() < 1.0);
        let mut last = 0.0;
        for l in 1..200 {
            let v = lambda_bound(l);
            assert!(v >= last && v <= lambda_bound_limit());
            last = v;
        }
    }

    #[test]
    fn canonical_selection_is_trivial() {
        let s = greedy_select(EnumerationMode::Canonical, 5, 1000).unwrap();
        assert!(s.defects().iter().all(|&d| d == 0.0));
        assert_eq!(s.lambda_data(), 0.0);
        let t = build_t(&s, 5).unwrap();
        assert_eq!(t, Matrix::identity(5, 5));
    }

    #[test]
    fn no_singleton_selection() {
        let s = greedy_select(EnumerationMode::NoSingleton, 3, 100_000).unwrap();
        for (l, &d) in s.defects().iter().enumerate() {
            assert!(d > 0.0 && d <= 1.0 / (2.0 * (l + 1) as f64));
        }
        let one = greedy_select(EnumerationMode::NoSingleton, 1, 100).unwrap();
        assert!(one.defects()[0] <= 0.5);
    }

    #[test]
    fn t_section_for_four_levels() {
        let s = greedy_select(EnumerationMode::NoSingleton, 4, 100_000).unwrap();
        let t = build_t(&s, s.row_frame()).unwrap();
        let lambda = s.lambda_data();
        assert!(linalg::smallest_singular_value(&t) >= 1.0 - lambda);
        assert!(1.0 - lambda > 0.3);
        let eye = Matrix::identity(t.nrows(), t.ncols());
        assert!(linalg::spectral_norm(&(t - eye)) <= lambda + 1e-12);
    }

    #[test]
    fn frame_and_budget_errors() {
        let s = greedy_select(EnumerationMode::NoSingleton, 3, 100_000).unwrap();
        assert!(matches!(build_t(&s, 1), Err(RieszError::Frame(_))));
        assert!(matches!(
            greedy_select(EnumerationMode::NoSingleton, 3, 20),
            Err(RieszError::NotFoundWithinBudget { .. })
        ));
        assert!(matches!(
            greedy_select(EnumerationMode::Canonical, 0, 10),
            Err(RieszError::EmptySelection)
        ));
    }

    #[test]
    fn canonical_restriction_is_the_embedding() {
        let s = greedy_select(EnumerationMode::Canonical, 4, 1000).unwrap();
        let b = MazurOperator::new(
            EnumerationMode::Canonical,
            *s.indices().iter().max().unwrap(),
            4,
        )
        .unwrap();
        let r = restrict(&b, &s).unwrap();
        assert_eq!(r.matrix(), &Matrix::identity(4, 4));
        assert!(r.injective_on_frame());
        let x = r
            .lift(&FinSeq::from_pairs([(2, 3.0), (4, -1.0)]).unwrap())
            .unwrap();
        assert_eq!(
            r.apply(&x).unwrap(),
            FinSeq::from_pairs([(2, 3.0), (4, -1.0)]).unwrap()
        );
        assert!(r.apply(&FinSeq::new()).unwrap().is_zero());
    }

    #[test]
    fn restriction_rejects_off_subspace_input() {
        let s = greedy_select(EnumerationMode::NoSingleton, 3, 100_000).unwrap();
        let r = RestrictedOperator::from_selection(&s, s.row_frame()).unwrap();
        let off = s.indices()[0] + 1;
        assert!(
            matches!(r.apply(&FinSeq::unit(off, 1.0)), Err(RieszError::NotInSubspace(k)) if k == off)
        );
    }
}
