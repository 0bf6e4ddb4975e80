//! l1-penalized Tikhonov regularization `|A x - y|_2^2 + alpha |x|_1 -> min`
//! on matrix sections, least-squares sections, noise studies and the
//! full-space probe.

mod probe;
mod solver;
mod study;

pub use probe::{full_space_failure_probe, ProbeRow, ProbeTable};
pub use solver::{
    least_squares_section, soft_threshold, subgradient_residual, tikhonov_solve,
    tikhonov_solve_from, LeastSquares, RegularizationResult, SolverOptions, TikhonovProblem,
};
pub use study::{
    alpha_path, discrepancy_alpha, noise_convergence_study, seeded_unit_direction, NoiseStudy,
    ParameterRule, StudyRow,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("bad data: {0}")]
    BadData(String),
    #[error(transparent)]
    Riesz(#[from] crate::riesz::RieszError),
    #[error(transparent)]
    Mazur(#[from] crate::mazur::MazurError),
}
