//! LP-based certificates (min-norm dual elements, quotient distances),
//! the ill-posedness classifier and the factorization check.

mod classify;
mod factor;
pub mod lp;
mod minnorm;
mod qdist;

pub use classify::{
    catalog, classify, CatalogEntry, Classification, ClassificationFlags, Flag, Tri, Verdict,
};
pub use factor::{factorization_check, FactorizationReport};
pub use lp::{lp_solve, lp_solve_in, LinearProgram, LpArithmetic, LpOutcome, VarBound};
pub use minnorm::{
    certificate_lp, minnorm_certificate, minnorm_certificate_with, minnorm_trivial, Certificate,
    CertificateVerdict, Sign, TrivialMinNorm,
};
pub use qdist::{qdist, qdist_with};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("support indices must differ (got m = n = {0})")]
    BadSupport(usize),
    #[error("constraint count {k} does not cover the support indices {m} and {n}")]
    KTooSmall { k: usize, m: usize, n: usize },
    #[error("data is not in the range of the section (residual {0:e})")]
    NotInRange(f64),
    #[error("null-space basis is invalid: {0}")]
    BadNullBasis(String),
    #[error("classification needs flag `{0}`, which is unknown")]
    IndeterminateClassification(String),
    #[error("not a complement of the null space: {0}")]
    NotAComplement(String),
    #[error("no enumerated direction aligns with the data within {budget} terms")]
    NoAlignedAtom { budget: usize },
    #[error(transparent)]
    Mazur(#[from] crate::mazur::MazurError),
    #[error(transparent)]
    Seq(#[from] crate::seqspace::SeqError),
}
