use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::AdmmError;

pub const TRACE_HEADER: &str = "k,objective,merit,r,rr,rho,beta,qubo_exact_gap,elapsed_seconds";

/// One row per outer iteration. `qubo_exact_gap` is the oracle energy minus
/// the enumerated optimum, present only when tracking is enabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub objective: f64,
    pub merit: f64,
    pub r: f64,
    pub rr: f64,
    pub rho: f64,
    pub beta: f64,
    pub qubo_exact_gap: Option<f64>,
    pub elapsed_seconds: f64,
}

pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceRecord]) -> Result<(), AdmmError> {
    let mut w = csv::Writer::from_writer(out);
    if trace.is_empty() {
        w.write_record(TRACE_HEADER.split(','))
            .map_err(|e| AdmmError::Trace(e.to_string()))?;
    }
    for rec in trace {
        w.serialize(rec).map_err(|e| AdmmError::Trace(e.to_string()))?;
    }
    w.flush().map_err(|e| AdmmError::Trace(e.to_string()))
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRecord>, AdmmError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| AdmmError::Trace(e.to_string()))
}
