//! Numerical verification harness: finite-difference cross-checks,
//! boundary-decay measurements, barrier construction, and a stochastic
//! Dirichlet solver, all over exact group data.

pub mod barrier;
pub mod domain;
pub mod expr;
pub mod mc;
pub mod probes;
pub mod sample;

pub use barrier::barrier_check;
pub use domain::Domain;
pub use expr::{
    parse_expr, poly_to_expr, word_expr_derivative, Expr, ScalarField,
};
pub use mc::mc_dirichlet;
pub use probes::{
    characteristic_scan, check_taylor_inequality, decay_exponent, distance_comparison,
    fd_horizontal_derivative, holder_seminorm, nontangential_point, volume_ratio,
};
pub use sample::derived_rng;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("evaluation produced a non-finite value: {0}")]
    EvaluationFailure(String),
    #[error("degenerate sample pair: {0}")]
    DegenerateSample(String),
    #[error("no admissible samples found in the shell at radius {0}")]
    EmptyShell(f64),
    #[error("no exterior tangent ball: {0}")]
    NoTangentBall(String),
    #[error("start point is not interior to the domain")]
    NonInterior,
    #[error("path exceeded {0} steps without exiting")]
    StuckPath(usize),
    #[error("no admissible point found: {0}")]
    NotFound(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
    #[error(transparent)]
    Group(#[from] crate::group::GroupError),
    #[error(transparent)]
    Taylor(#[from] crate::taylor::TaylorError),
    #[error(transparent)]
    DiffOp(#[from] crate::diffop::DiffOpError),
}
