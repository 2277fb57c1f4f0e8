//! Benchmark problem families, instance I/O and reference solvers.

mod bp;
mod exact;
mod local_search;
mod misk;
mod scholl;
pub mod toy;

use thiserror::Error;

use crate::problem::ProblemError;
use crate::qp::{QpError, QpStatus};

pub use bp::{bp_to_mbo, decode_bp, encode_bp, first_fit_decreasing, gen_bp, BpAssignment, BpInstance, BpMap};
pub use exact::{exact_mbo_solve, ExactSolution, EXACT_MBO_MAX_BITS};
pub use local_search::{karmarkar_karp, kk_local_search, repair, LocalSearchOracle};
pub use misk::{gen_misk, misk_to_mbo, MiskGroup, MiskInstance, MiskMap};
pub use scholl::{format_scholl, parse_scholl, read_scholl, write_scholl, SchollFile};

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("instance is infeasible: {0}")]
    Infeasible(String),
    #[error("{what} with {n} binaries exceeds the enumeration limit of {max}")]
    TooLarge { what: &'static str, n: usize, max: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("restricted QP returned {0:?}")]
    Restriction(QpStatus),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Relative optimality gap `|v − v*| / (1e-10 + |v*|)`.
pub fn gap(v: f64, v_star: f64) -> f64 {
    (v - v_star).abs() / (1e-10 + v_star.abs())
}

#[cfg(test)]
mod tests {
    use super::gap;

    #[test]
    fn gap_formula() {
        assert_eq!(gap(2.0, 2.0), 0.0);
        assert!((gap(3.0, 2.0) - 1.0 / (2.0 + 1e-10)).abs() < 1e-15);
        assert!((gap(3.0, 2.0) - 0.5).abs() < 1e-10);
        assert!((gap(1.0, 0.0) - 1e10).abs() < 1e-3);
        assert_eq!(gap(-2.0, -4.0), 2.0 / (1e-10 + 4.0));
    }
}
