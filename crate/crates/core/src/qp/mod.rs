//! Convex quadratic programming with KKT-certified results.
//!
//! [`InteriorPoint`] is the default backend. Every solution carries the
//! residuals computed by [`kkt_residuals`], which only looks at the instance,
//! the primal point and the multipliers.

mod ipm;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::splitting::QpInstance;
pub use ipm::InteriorPoint;

#[derive(Debug, Error)]
pub enum QpError {
    #[error("QP data is inconsistent: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

/// Multipliers for `A v <= b` and the two sides of the box. Entries for
/// infinite bounds are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QpDuals {
    pub ineq: DVector<f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl QpDuals {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            ineq: DVector::zeros(m),
            lower: DVector::zeros(n),
            upper: DVector::zeros(n),
        }
    }
}

/// Scaled KKT residuals, each normalized by `1 +` the magnitude of the terms
/// it balances.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal_inf: f64,
    pub dual_inf: f64,
    pub comp_slack: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal_inf.max(self.dual_inf).max(self.comp_slack)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub v: DVector<f64>,
    pub duals: QpDuals,
    pub status: QpStatus,
    pub kkt: KktResiduals,
    pub iterations: usize,
}

pub trait QpSolver: Send + Sync {
    fn solve(&self, qp: &QpInstance) -> Result<QpSolution, QpError>;
}

fn inf_norm<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Evaluates stationarity, primal feasibility and complementarity of
/// `(v, duals)` for `qp`. Negative multipliers count as dual infeasibility.
///
/// * `dual_inf = ‖Pv + q + Aᵀμ − μ_lb + μ_ub‖∞ / (1 + max term)`
/// * `primal_inf = max violation / (1 + max(‖Av‖∞, ‖b‖∞, ‖v‖∞))`
/// * `comp_slack = max |multiplier · slack| / (1 + max(|vᵀPv|, |qᵀv|))`
pub fn kkt_residuals(qp: &QpInstance, v: &DVector<f64>, duals: &QpDuals) -> KktResiduals {
    let pv = &qp.p * v;
    let atmu = qp.a.transpose() * &duals.ineq;
    let grad = &pv + &qp.q + &atmu - &duals.lower + &duals.upper;
    let dual_scale = 1.0
        + inf_norm(pv.iter())
            .max(inf_norm(qp.q.iter()))
            .max(inf_norm(atmu.iter()))
            .max(inf_norm(duals.lower.iter()))
            .max(inf_norm(duals.upper.iter()));
    let mut sign = 0.0f64;
    for &m in duals.ineq.iter() {
        sign = sign.max(-m);
    }
    for i in 0..v.len() {
        sign = sign.max(-duals.lower[i]).max(-duals.upper[i]);
        if qp.lb[i] == f64::NEG_INFINITY {
            sign = sign.max(duals.lower[i].abs());
        }
        if qp.ub[i] == f64::INFINITY {
            sign = sign.max(duals.upper[i].abs());
        }
    }
    let dual_inf = inf_norm(grad.iter()).max(sign) / dual_scale;

    let av = &qp.a * v;
    let mut viol = 0.0f64;
    let mut comp = 0.0f64;
    for k in 0..av.len() {
        let slack = qp.b[k] - av[k];
        viol = viol.max(-slack);
        comp = comp.max((duals.ineq[k] * slack).abs());
    }
    let mut bound_scale = 0.0f64;
    for i in 0..v.len() {
        if qp.lb[i].is_finite() {
            let slack = v[i] - qp.lb[i];
            viol = viol.max(-slack);
            comp = comp.max((duals.lower[i] * slack).abs());
            bound_scale = bound_scale.max(qp.lb[i].abs());
        }
        if qp.ub[i].is_finite() {
            let slack = qp.ub[i] - v[i];
            viol = viol.max(-slack);
            comp = comp.max((duals.upper[i] * slack).abs());
            bound_scale = bound_scale.max(qp.ub[i].abs());
        }
    }
    let primal_scale = 1.0
        + inf_norm(av.iter())
            .max(inf_norm(qp.b.iter()))
            .max(inf_norm(v.iter()))
            .max(bound_scale);
    let comp_scale = 1.0 + v.dot(&pv).abs().max(qp.q.dot(v).abs());
    KktResiduals {
        primal_inf: viol.max(0.0) / primal_scale,
        dual_inf,
        comp_slack: comp / comp_scale,
    }
}
