//! Finite truncations of the Mazur-type operator `B: l1 -> l2`, Riesz
//! subspace selection, l1-Tikhonov regularization and LP certificates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod export;
pub mod linalg;
pub mod mazur;
pub mod regsolve;
pub mod riesz;
pub mod seqspace;
