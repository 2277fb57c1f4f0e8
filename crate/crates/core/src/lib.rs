//! Mixed-binary optimization by operator splitting.
//!
//! A problem couples binary variables `x` with continuous variables `u`. The
//! ADMM engine alternates a QUBO over `x`, solved by any [`oracle::QuboOracle`],
//! with a convex QP over the relaxed copy `z` and `u`, solved by a
//! [`qp::QpSolver`].

pub mod problem;
pub mod admm;
pub mod campaign;
pub mod oracle;
pub mod qp;
pub mod splitting;
pub mod zoo;

pub use problem::{BlockMode, MboPoint, MboProblem, MboProblemBuilder, ProblemError};
