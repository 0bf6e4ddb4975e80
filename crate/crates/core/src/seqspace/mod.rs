//! Finitely supported sequences, their norms, and a deterministic dense
//! enumeration of the unit sphere of l2.

mod finseq;
mod sphere;

pub use finseq::{canonical_primitive, norm, Entry, FinSeq, Rational, Space};
pub use sphere::{
    density_witness, enumerate_sphere, height, DensitySearch, EnumerationMode, SphereEnumerator,
    SphereVector, Witness,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("coordinates are 1-based; index 0 is invalid")]
    BadIndex,
    #[error("coordinate {0} given twice")]
    DuplicateIndex(usize),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("target is not a unit vector (l2 norm {0})")]
    NotUnit(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("no enumerated vector within {eps} of the target among the first {budget}")]
    NotFoundWithinBudget { eps: f64, budget: usize },
}
