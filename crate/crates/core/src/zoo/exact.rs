use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ZooError;
use crate::admm::polish;
use crate::problem::{MboPoint, MboProblem};
use crate::qp::{QpSolver, QpStatus};

pub const EXACT_MBO_MAX_BITS: usize = 22;

const ROW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub point: MboPoint,
    pub value: f64,
}

fn bits_of(code: u64, n: usize) -> Vec<u8> {
    // most significant bit first, so codes run in lexicographic order
    (0..n).map(|i| ((code >> (n - 1 - i)) & 1) as u8).collect()
}

/// Global optimum by enumerating every `x` that satisfies the equality and
/// binary inequality rows, solving the continuous restriction for each.
/// Returns `Ok(None)` when no `x` admits a feasible `u`. Ties go to the
/// lexicographically smallest `x`.
pub fn exact_mbo_solve(p: &MboProblem, qp: &dyn QpSolver) -> Result<Option<ExactSolution>, ZooError> {
    let n = p.n_bin();
    if n > EXACT_MBO_MAX_BITS {
        return Err(ZooError::TooLarge {
            what: "exact reference solve",
            n,
            max: EXACT_MBO_MAX_BITS,
        });
    }
    let candidates: Vec<Result<Option<ExactSolution>, ZooError>> = (0..(1u64 << n))
        .into_par_iter()
        .map(|code| evaluate(p, qp, bits_of(code, n)))
        .collect();
    let mut best: Option<ExactSolution> = None;
    for c in candidates {
        if let Some(sol) = c? {
            let better = match &best {
                None => true,
                Some(b) => sol.value < b.value - ROW_TOL * (1.0 + b.value.abs()),
            };
            if better {
                best = Some(sol);
            }
        }
    }
    Ok(best)
}

fn evaluate(p: &MboProblem, qp: &dyn QpSolver, x: Vec<u8>) -> Result<Option<ExactSolution>, ZooError> {
    let xv = crate::problem::bits_to_vector(&x);
    let eq = p.g_eq() * &xv - p.b_eq();
    if eq.iter().any(|v| v.abs() > ROW_TOL) {
        return Ok(None);
    }
    let gin = p.g_in() * &xv - p.h_in();
    if gin.iter().any(|&v| v > ROW_TOL) {
        return Ok(None);
    }
    if p.n_cont() == 0 {
        let joint = p.l_z() * &xv - p.h_l();
        if joint.iter().any(|&v| v > ROW_TOL) {
            return Ok(None);
        }
        let point = MboPoint { x, u: Vec::new() };
        let value = p.objective(&point)?;
        return Ok(Some(ExactSolution { point, value }));
    }
    let start = MboPoint {
        u: vec![0.0; p.n_cont()],
        x,
    };
    let out = polish(p, &start, qp).map_err(|e| ZooError::Invalid(e.to_string()))?;
    match out.status {
        Some(QpStatus::Optimal) => {
            let value = p.objective(&out.point)?;
            Ok(Some(ExactSolution { point: out.point, value }))
        }
        Some(QpStatus::Infeasible) => Ok(None),
        Some(s) => Err(ZooError::Restriction(s)),
        None => unreachable!("continuous variables are present"),
    }
}
