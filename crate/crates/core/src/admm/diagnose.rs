use serde::{Deserialize, Serialize};

use super::AdmmConfig;
use crate::problem::MboProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Three-block convergence needs `rho > max(beta, c)`.
    PenaltyCondition {
        holds: bool,
        rho: f64,
        bound: f64,
        /// Whether the schedule reaches a value above the bound.
        holds_at_cap: Option<bool>,
    },
    /// `c >= rho`: equalities are enforced ahead of residual convergence.
    EqualityPriority { c: f64, rho: f64 },
    /// Equalities only enter through the `c/2‖Gx − b‖²` penalty.
    EqualitiesSoftened { count: usize },
    /// Continuous variables void the guarantee unless the joint rows are
    /// never active (with strictly convex `φ`) or always active.
    ContinuousVariables { count: usize, strictly_convex: bool },
}

impl Diagnostic {
    pub fn severity(&self) -> Severity {
        match self {
            Diagnostic::PenaltyCondition { holds: false, .. } | Diagnostic::EqualityPriority { .. } => {
                Severity::Warning
            }
            Diagnostic::ContinuousVariables { .. } => Severity::Warning,
            _ => Severity::Info,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Diagnostic::PenaltyCondition { holds: true, rho, bound, .. } => {
                format!("penalty condition holds: rho = {rho} > max(beta, c) = {bound}")
            }
            Diagnostic::PenaltyCondition {
                holds: false,
                rho,
                bound,
                holds_at_cap,
            } => {
                let later = match holds_at_cap {
                    Some(true) => "; the rho schedule exceeds it later",
                    _ => "",
                };
                format!("penalty condition fails: rho = {rho} <= max(beta, c) = {bound}{later}; the run is a heuristic")
            }
            Diagnostic::EqualityPriority { c, rho } => format!(
                "c = {c} >= rho = {rho}: equalities take priority and residual convergence is not guaranteed"
            ),
            Diagnostic::EqualitiesSoftened { count } => {
                format!("{count} equality rows are softened into the QUBO and may be violated at convergence")
            }
            Diagnostic::ContinuousVariables { count, strictly_convex } => format!(
                "{count} continuous variables: convergence needs the joint rows never active{} or always active with a Lipschitz inverse",
                if *strictly_convex { "" } else { " (phi is not strictly convex)" }
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub items: Vec<Diagnostic>,
}

impl DiagnosticReport {
    pub fn penalty_condition_holds(&self) -> bool {
        self.items
            .iter()
            .any(|d| matches!(d, Diagnostic::PenaltyCondition { holds: true, .. }))
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.items.iter().filter(|d| d.severity() == Severity::Warning)
    }
}

/// Checks the penalty parameters against the sufficient conditions for
/// three-block convergence and notes structural caveats of `p`.
pub fn diagnose(p: &MboProblem, cfg: &AdmmConfig) -> DiagnosticReport {
    let mut items = Vec::new();
    let bound = cfg.beta_init.max(cfg.c);
    let holds_at_cap = (!cfg.rho_fixed).then(|| cfg.rho_cap > bound);
    items.push(Diagnostic::PenaltyCondition {
        holds: cfg.rho_init > bound,
        rho: cfg.rho_init,
        bound,
        holds_at_cap,
    });
    if p.n_eq() > 0 {
        items.push(Diagnostic::EqualitiesSoftened { count: p.n_eq() });
        if cfg.c >= cfg.rho_init {
            items.push(Diagnostic::EqualityPriority {
                c: cfg.c,
                rho: cfg.rho_init,
            });
        }
    }
    if p.n_cont() > 0 {
        let strictly_convex = p.p_u().clone().symmetric_eigenvalues().min() > 0.0;
        items.push(Diagnostic::ContinuousVariables {
            count: p.n_cont(),
            strictly_convex,
        });
    }
    DiagnosticReport { items }
}
