use std::time::Instant;

use log::{debug, warn};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{polish, AdmmConfig, BetaRule, AdmmError, PolishOutcome, TraceRecord};
use crate::oracle::{exact_solve, QuboOracle};
use crate::problem::{bits_to_vector, check_binary, residuals, BlockMode, MboPoint, MboProblem, MeritTerms};
use crate::qp::{QpSolver, QpStatus};
use crate::splitting::{build_qp, build_qubo, update_dual, update_y};

/// Largest QUBO checked against enumeration when tracking optimality.
pub const TRACK_MAX_BITS: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    MaxIter,
    Tolerance,
    TimeLimit,
}

/// Full iterate after some outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub k: usize,
    pub x: Vec<u8>,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
    pub rho: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Minimum-merit iterate; the earliest one on ties.
    pub best_point: MboPoint,
    pub best_iteration: usize,
    pub best_merit: f64,
    pub best_objective: f64,
    pub best_state: IterateState,
    pub final_state: IterateState,
    pub iterations: usize,
    pub converged: bool,
    pub termination_reason: TerminationReason,
    pub trace: Vec<TraceRecord>,
    pub polished: Option<PolishOutcome>,
}

impl SolveReport {
    /// Share of tracked iterations whose oracle answer was optimal within
    /// `1e-9·(1 + |E|)`. `None` when nothing was tracked.
    pub fn qubo_optimal_fraction(&self) -> Option<f64> {
        let gaps: Vec<f64> = self.trace.iter().filter_map(|t| t.qubo_exact_gap).collect();
        if gaps.is_empty() {
            return None;
        }
        let hits = gaps.iter().filter(|&&g| g <= 1e-9).count();
        Some(hits as f64 / gaps.len() as f64)
    }
}

fn state(
    k: usize,
    x: &[u8],
    z: &DVector<f64>,
    u: &DVector<f64>,
    y: &DVector<f64>,
    lambda: &DVector<f64>,
    rho: f64,
    beta: f64,
) -> IterateState {
    IterateState {
        k,
        x: x.to_vec(),
        z: z.iter().copied().collect(),
        u: u.iter().copied().collect(),
        y: y.iter().copied().collect(),
        lambda: lambda.iter().copied().collect(),
        rho,
        beta,
    }
}

/// Runs the ADMM loop: QUBO over `x`, QP over `[z; u]`, closed-form `y`
/// (three-block only) and the dual step, recording the merit of every
/// iterate. Stops once `r <= eps`, at `max_iter`, or past the time limit.
pub fn solve(
    p: &MboProblem,
    cfg: &AdmmConfig,
    oracle: &dyn QuboOracle,
    qp: &dyn QpSolver,
) -> Result<SolveReport, AdmmError> {
    cfg.validate()?;
    let start = Instant::now();
    let n = p.n_bin();
    let terms = MeritTerms {
        equality: cfg.merit_equality,
    };
    let three = cfg.mode == BlockMode::ThreeBlock;
    let [mut z, mut u, mut y, mut lambda] = cfg.initial(p)?;
    let mut rho = cfg.rho_init;
    let mut beta = cfg.beta_init;
    let watched = |z: &DVector<f64>, u: &DVector<f64>, y: &DVector<f64>| match cfg.beta_rule {
        BetaRule::Relaxed => stacked_norm(z, u),
        BetaRule::Slack => y.norm(),
    };
    let mut prev_norm = watched(&z, &u, &y);
    let mut raise_beta = false;
    let mut x = vec![0u8; n];

    let mut trace = Vec::new();
    let mut best: Option<(usize, MboPoint, f64, f64, IterateState)> = None;
    let mut reason = TerminationReason::MaxIter;
    let mut converged = false;
    let mut k = 0;

    while k < cfg.max_iter {
        k += 1;
        if k > 1 {
            if !cfg.rho_fixed {
                rho = (rho * cfg.rho_growth).min(cfg.rho_cap);
            }
            if three && !cfg.beta_fixed && raise_beta {
                beta *= cfg.beta_gamma;
            }
        }
        let qubo = build_qubo(p, &z, &y, &lambda, rho, cfg.c)?;
        let sol = oracle
            .solve(&qubo, k, cfg.seed)
            .map_err(|source| AdmmError::Oracle { iteration: k, source })?;
        if sol.bits.len() != n || check_binary(&sol.bits).is_err() {
            return Err(AdmmError::Oracle {
                iteration: k,
                source: crate::oracle::OracleError::Failed(format!(
                    "{} returned a malformed bitstring of length {}",
                    oracle.name(),
                    sol.bits.len()
                )),
            });
        }
        let gap = if cfg.track_qubo_optimality && n <= TRACK_MAX_BITS {
            let exact = exact_solve(&qubo).map_err(|source| AdmmError::Oracle { iteration: k, source })?;
            let tol = 1e-9 * (1.0 + exact.energy.abs());
            let g = sol.energy - exact.energy;
            Some(if g <= tol { 0.0 } else { g })
        } else {
            None
        };
        x = sol.bits;
        let xv = bits_to_vector(&x);

        let sub = build_qp(p, &xv, &y, &lambda, rho)?;
        let qs = qp.solve(&sub)?;
        match qs.status {
            QpStatus::Optimal => {}
            QpStatus::MaxIter => warn!(
                "iteration {k}: convex subproblem stopped at its iteration limit (kkt {:.2e})",
                qs.kkt.max()
            ),
            status => {
                return Err(AdmmError::Subproblem {
                    iteration: k,
                    status,
                    detail: format!(
                        "{} variables, {} rows, rho = {rho:e}; check the joint and binary inequality rows",
                        sub.dim(),
                        sub.a.nrows()
                    ),
                })
            }
        }
        z = qs.v.rows(0, n).into_owned();
        u = qs.v.rows(n, p.n_cont()).into_owned();
        if three {
            y = update_y(&xv, &z, &lambda, rho, beta)?;
        }
        lambda = update_dual(&lambda, &xv, &z, &y, rho)?;

        let res = residuals(&xv, &z, &y, cfg.mode)?;
        let pt = MboPoint {
            x: x.clone(),
            u: u.iter().copied().collect(),
        };
        let objective = p.objective(&pt)?;
        let merit = p.merit_with(&pt, cfg.mu, terms)?;
        let elapsed = start.elapsed().as_secs_f64();
        trace.push(TraceRecord {
            k,
            objective,
            merit,
            r: res.r,
            rr: res.rr,
            rho,
            beta,
            qubo_exact_gap: gap,
            elapsed_seconds: elapsed,
        });
        debug!("k={k} merit={merit:.6} r={:.3e} rr={:.3e}", res.r, res.rr);
        if best.as_ref().map_or(true, |b| merit < b.2) {
            best = Some((k, pt, merit, objective, state(k, &x, &z, &u, &y, &lambda, rho, beta)));
        }

        if res.r <= cfg.eps {
            converged = true;
            reason = TerminationReason::Tolerance;
            break;
        }
        if elapsed >= cfg.time_limit {
            reason = TerminationReason::TimeLimit;
            break;
        }
        let norm = watched(&z, &u, &y);
        raise_beta = match cfg.beta_rule {
            BetaRule::Relaxed => norm <= cfg.beta_omega * prev_norm,
            BetaRule::Slack => norm > cfg.beta_omega * prev_norm,
        };
        prev_norm = norm;
    }

    let (best_iteration, best_point, best_merit, best_objective, best_state) =
        best.expect("at least one iteration runs");
    let polished = if cfg.polish {
        Some(polish(p, &best_point, qp)?)
    } else {
        None
    };
    Ok(SolveReport {
        best_point,
        best_iteration,
        best_merit,
        best_objective,
        best_state,
        final_state: state(k, &x, &z, &u, &y, &lambda, rho, beta),
        iterations: k,
        converged,
        termination_reason: reason,
        trace,
        polished,
    })
}

/// Euclidean norm of `[z; u]`.
fn stacked_norm(z: &DVector<f64>, u: &DVector<f64>) -> f64 {
    (z.norm_squared() + u.norm_squared()).sqrt()
}
