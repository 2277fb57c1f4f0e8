use serde::{Deserialize, Serialize};

use super::AdmmError;
use crate::problem::{check_binary, MboPoint, MboProblem};
use crate::qp::{QpInstance, QpSolver, QpStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolishOutcome {
    pub point: MboPoint,
    /// False when the restriction at the given `x` has no feasible `u`; the
    /// input point is returned unchanged in that case.
    pub restriction_feasible: bool,
    pub status: Option<QpStatus>,
}

/// Re-optimizes the continuous part with `x` held fixed:
/// `min φ(u) s.t. L_u u <= h_l − L_z x, u_lb <= u <= u_ub`.
pub fn polish(p: &MboProblem, pt: &MboPoint, qp: &dyn QpSolver) -> Result<PolishOutcome, AdmmError> {
    check_binary(&pt.x)?;
    if p.n_cont() == 0 {
        return Ok(PolishOutcome {
            point: pt.clone(),
            restriction_feasible: true,
            status: None,
        });
    }
    let sub = restriction(p, &pt.x)?;
    let sol = qp.solve(&sub)?;
    match sol.status {
        QpStatus::Optimal | QpStatus::MaxIter => Ok(PolishOutcome {
            point: MboPoint {
                x: pt.x.clone(),
                u: sol.v.iter().copied().collect(),
            },
            restriction_feasible: true,
            status: Some(sol.status),
        }),
        status => Ok(PolishOutcome {
            point: pt.clone(),
            restriction_feasible: false,
            status: Some(status),
        }),
    }
}

/// Continuous restriction at fixed binary `x`.
pub(crate) fn restriction(p: &MboProblem, x: &[u8]) -> Result<QpInstance, AdmmError> {
    let xv = crate::problem::bits_to_vector(x);
    let b = p.h_l() - p.l_z() * &xv;
    let mut sub = QpInstance::new(
        p.p_u().clone(),
        p.r_u().clone(),
        p.l_u().clone(),
        b,
        p.u_lb().clone(),
        p.u_ub().clone(),
    )?;
    sub.constant = p.c_u() + p.binary_objective(&xv);
    Ok(sub)
}
