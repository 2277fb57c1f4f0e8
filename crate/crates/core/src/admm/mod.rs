//! Two- and three-block ADMM heuristics for [`MboProblem`](crate::MboProblem).

mod config;
mod diagnose;
mod engine;
mod polish;
mod trace;

use thiserror::Error;

use crate::oracle::OracleError;
use crate::problem::ProblemError;
use crate::qp::{QpError, QpStatus};

pub use config::{AdmmConfig, BetaRule, WarmStart};
pub use diagnose::{diagnose, Diagnostic, DiagnosticReport, Severity};
pub use engine::{solve, IterateState, SolveReport, TerminationReason};
pub use polish::{polish, PolishOutcome};
pub use trace::{read_trace_csv, write_trace_csv, TraceRecord, TRACE_HEADER};

#[derive(Debug, Error)]
pub enum AdmmError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("QUBO oracle failed at iteration {iteration}: {source}")]
    Oracle {
        iteration: usize,
        #[source]
        source: OracleError,
    },
    #[error("convex subproblem at iteration {iteration} reported {status:?}: {detail}")]
    Subproblem {
        iteration: usize,
        status: QpStatus,
        detail: String,
    },
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("trace I/O: {0}")]
    Trace(String),
}
