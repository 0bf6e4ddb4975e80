//! Finite truncation of the Mazur-type operator `B x = sum_k x_k zeta_k`
//! from l1 into l2, its adjoint, matrix sections, and the block operator
//! `(B, C)` with `C` the coordinate embedding.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::seqspace::{EnumerationMode, FinSeq, SphereEnumerator, SphereVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MazurError {
    #[error("coordinate {index} lies outside the frame 1..={frame}")]
    OutOfFrame { index: usize, frame: usize },
    #[error("operator frames must be nonempty (got {cols} columns, {rows} rows)")]
    EmptyFrame { cols: usize, rows: usize },
    #[error("input contains non-finite entries")]
    NonFinite,
}

/// Reproducibility descriptor: enough to rebuild the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorDescriptor {
    pub mode: EnumerationMode,
    pub cols: usize,
    pub rows: usize,
}

/// `B` restricted to the first `n` columns and `m` rows.
///
/// Enumeration terms whose support exceeds the row frame are truncated but not
/// renormalized; the largest such truncation error is kept.
#[derive(Debug, Clone)]
pub struct MazurOperator {
    mode: EnumerationMode,
    rows: usize,
    zetas: Vec<SphereVector>,
    columns: Vec<FinSeq<f64>>,
    truncation_defect: f64,
    truncated: usize,
    section: OnceLock<Matrix>,
}

impl MazurOperator {
    pub fn new(mode: EnumerationMode, cols: usize, rows: usize) -> Result<Self, MazurError> {
        if cols == 0 || rows == 0 {
            return Err(MazurError::EmptyFrame { cols, rows });
        }
        let zetas = SphereEnumerator::new(mode).take(cols).collect();
        Self::from_zetas(mode, zetas, rows)
    }

    /// Wraps an explicit prefix of the enumeration.
    pub fn from_zetas(
        mode: EnumerationMode,
        zetas: Vec<SphereVector>,
        rows: usize,
    ) -> Result<Self, MazurError> {
        if zetas.is_empty() || rows == 0 {
            return Err(MazurError::EmptyFrame {
                cols: zetas.len(),
                rows,
            });
        }
        let mut truncation_defect: f64 = 0.0;
        let mut truncated = 0;
        let columns = zetas
            .iter()
            .map(|z| {
                let col = z.unit().truncated(rows);
                if z.max_index() > rows {
                    truncated += 1;
                    let kept = col.norm(crate::seqspace::Space::L2);
                    truncation_defect = truncation_defect.max((1.0 - kept * kept).max(0.0).sqrt());
                }
                col
            })
            .collect();
        Ok(MazurOperator {
            mode,
            rows,
            zetas,
            columns,
            truncation_defect,
            truncated,
            section: OnceLock::new(),
        })
    }

    pub fn mode(&self) -> EnumerationMode {
        self.mode
    }

    /// Column budget `n`.
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// Row truncation `m`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn descriptor(&self) -> OperatorDescriptor {
        OperatorDescriptor {
            mode: self.mode,
            cols: self.cols(),
            rows: self.rows,
        }
    }

    /// The untruncated enumeration term `zeta_k` (1-based).
    pub fn zeta(&self, k: usize) -> Option<&SphereVector> {
        k.checked_sub(1).and_then(|i| self.zetas.get(i))
    }

    pub fn zetas(&self) -> &[SphereVector] {
        &self.zetas
    }

    /// Column `k` as stored, i.e. truncated to the row frame.
    pub fn column(&self, k: usize) -> Option<&FinSeq<f64>> {
        k.checked_sub(1).and_then(|i| self.columns.get(i))
    }

    /// Largest l2 mass lost to row truncation over all columns.
    pub fn max_truncation_defect(&self) -> f64 {
        self.truncation_defect
    }

    /// Number of columns affected by truncation.
    pub fn truncated_columns(&self) -> usize {
        self.truncated
    }

    fn check_frame(&self, v: &FinSeq<f64>, frame: usize) -> Result<(), MazurError> {
        let top = v.max_index();
        if top > frame {
            return Err(MazurError::OutOfFrame { index: top, frame });
        }
        if !v.all_finite() {
            return Err(MazurError::NonFinite);
        }
        Ok(())
    }

    /// `B x`; satisfies `|Bx|_2 <= |x|_1`.
    pub fn apply(&self, x: &FinSeq<f64>) -> Result<FinSeq<f64>, MazurError> {
        self.check_frame(x, self.cols())?;
        let mut acc = vec![0.0; self.rows];
        for (k, &xk) in x.iter() {
            for (i, z) in self.columns[k - 1].iter() {
                acc[i - 1] += xk * z;
            }
        }
        Ok(FinSeq::from_dense(&acc))
    }

    /// `B* eta = (<eta, zeta_1>, <eta, zeta_2>, ...)`; satisfies `|B* eta|_inf <= |eta|_2`.
    pub fn apply_adjoint(&self, eta: &FinSeq<f64>) -> Result<FinSeq<f64>, MazurError> {
        self.check_frame(eta, self.rows)?;
        let out: Vec<f64> = self.columns.iter().map(|c| c.dot(eta)).collect();
        Ok(FinSeq::from_dense(&out))
    }

    fn full_section(&self) -> &Matrix {
        self.section.get_or_init(|| {
            let mut a = Matrix::zeros(self.rows, self.cols());
            for (k, col) in self.columns.iter().enumerate() {
                for (i, &v) in col.iter() {
                    a[(i - 1, k)] = v;
                }
            }
            a
        })
    }

    /// Dense `m x n` matrix whose column `k` is the truncated `zeta_k`.
    pub fn finite_section(&self, n: usize) -> Result<Matrix, MazurError> {
        if n > self.cols() {
            return Err(MazurError::OutOfFrame {
                index: n,
                frame: self.cols(),
            });
        }
        Ok(self.full_section().columns(0, n).into_owned())
    }

    /// Matrix of `B*` restricted to the frames (`n x m`).
    pub fn adjoint_section(&self) -> Matrix {
        self.full_section().transpose()
    }

    /// Columns `zeta_{k_1}, ..., zeta_{k_L}` as an `m x L` matrix.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Matrix, MazurError> {
        let mut a = Matrix::zeros(self.rows, indices.len());
        for (j, &k) in indices.iter().enumerate() {
            let col = self.column(k).ok_or(MazurError::OutOfFrame {
                index: k,
                frame: self.cols(),
            })?;
            for (i, &v) in col.iter() {
                a[(i - 1, j)] = v;
            }
        }
        Ok(a)
    }
}

/// The pair `A = (B, C)` acting on `l1 x l1`, with `C` the identity on the
/// first `min(n, m)` coordinates of the frame.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    top: MazurOperator,
    embed_dim: usize,
}

/// Builds `A = (B, C)` from `B`.
pub fn composite_hybrid(b: MazurOperator) -> BlockOperator {
    let embed_dim = b.cols().min(b.rows());
    BlockOperator { top: b, embed_dim }
}

impl BlockOperator {
    pub fn top(&self) -> &MazurOperator {
        &self.top
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    /// `(x1, x2) -> (B x1, C x2)`.
    pub fn apply(
        &self,
        x1: &FinSeq<f64>,
        x2: &FinSeq<f64>,
    ) -> Result<(FinSeq<f64>, FinSeq<f64>), MazurError> {
        let y1 = self.top.apply(x1)?;
        self.top.check_frame(x2, self.top.cols())?;
        let y2 = x2.truncated(self.embed_dim);
        Ok((y1, y2))
    }

    /// Block-diagonal `2m x 2n` section `[[B_n, 0], [0, C_n]]`.
    pub fn section(&self) -> Matrix {
        let (m, n) = (self.top.rows(), self.top.cols());
        let mut a = Matrix::zeros(2 * m, 2 * n);
        a.view_mut((0, 0), (m, n))
            .copy_from(self.top.full_section());
        for i in 0..self.embed_dim {
            a[(m + i, n + i)] = 1.0;
        }
        a
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.section())
    }
}
