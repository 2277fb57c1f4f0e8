use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::AdmmError;
use crate::problem::{BlockMode, MboProblem};

/// Initial iterates. Missing vectors default to zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    pub z: Option<Vec<f64>>,
    pub u: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
}

/// When `beta` is multiplied by `beta_gamma`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    /// After an iteration with `‖[z; u]‖ <= omega · ‖[z; u]‖` of the one before.
    #[default]
    Relaxed,
    /// After an iteration with `‖y‖ > omega · ‖y‖` of the one before, that
    /// is, whenever the slack fails to shrink fast enough.
    Slack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmConfig {
    pub mode: BlockMode,
    pub rho_init: f64,
    pub rho_growth: f64,
    pub rho_cap: f64,
    pub rho_fixed: bool,
    pub beta_init: f64,
    pub beta_gamma: f64,
    pub beta_omega: f64,
    pub beta_fixed: bool,
    pub beta_rule: BetaRule,
    /// Weight of the squared equality residual in the QUBO.
    pub c: f64,
    /// Weight of the inequality violation in the merit.
    pub mu: f64,
    pub eps: f64,
    pub max_iter: usize,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    pub seed: u64,
    pub polish: bool,
    /// Adds the L1 equality residual to the merit.
    pub merit_equality: bool,
    /// Records the energy gap of every oracle answer against enumeration.
    pub track_qubo_optimality: bool,
    pub start: WarmStart,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            mode: BlockMode::ThreeBlock,
            rho_init: 1e4,
            rho_growth: 1.1,
            rho_cap: 1e7,
            rho_fixed: false,
            beta_init: 1e3,
            beta_gamma: 2.0,
            beta_omega: 0.5,
            beta_fixed: false,
            beta_rule: BetaRule::Relaxed,
            c: 1e5,
            mu: 1e3,
            eps: 1e-4,
            max_iter: 500,
            time_limit: 3600.0,
            seed: 0,
            polish: false,
            merit_equality: false,
            track_qubo_optimality: false,
            start: WarmStart::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), AdmmError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AdmmError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl AdmmConfig {
    /// Constant penalties, as used on the small worked problems.
    pub fn fixed(mode: BlockMode, rho: f64, beta: f64, c: f64) -> Self {
        Self {
            mode,
            rho_init: rho,
            rho_fixed: true,
            beta_init: beta,
            beta_fixed: true,
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AdmmError> {
        positive("rho_init", self.rho_init)?;
        positive("beta_init", self.beta_init)?;
        positive("mu", self.mu)?;
        if !(self.time_limit > 0.0) {
            return Err(AdmmError::Config(format!("time_limit must be positive, got {}", self.time_limit)));
        }
        if !self.rho_fixed {
            if !(self.rho_growth >= 1.0 && self.rho_growth.is_finite()) {
                return Err(AdmmError::Config(format!("rho_growth must be >= 1, got {}", self.rho_growth)));
            }
            if !(self.rho_cap >= self.rho_init) {
                return Err(AdmmError::Config(format!(
                    "rho_cap {} is below rho_init {}",
                    self.rho_cap, self.rho_init
                )));
            }
        }
        if !(self.beta_gamma >= 1.0 && self.beta_gamma.is_finite()) {
            return Err(AdmmError::Config(format!("beta_gamma must be >= 1, got {}", self.beta_gamma)));
        }
        if !(self.beta_omega > 0.0 && self.beta_omega < 1.0) {
            return Err(AdmmError::Config(format!("beta_omega must lie in (0, 1), got {}", self.beta_omega)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(AdmmError::Config(format!("c must be nonnegative, got {}", self.c)));
        }
        if !(self.eps >= 0.0) {
            return Err(AdmmError::Config(format!("eps must be nonnegative, got {}", self.eps)));
        }
        if self.max_iter == 0 {
            return Err(AdmmError::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn initial(&self, p: &MboProblem) -> Result<[DVector<f64>; 4], AdmmError> {
        let n = p.n_bin();
        let pick = |name: &str, v: &Option<Vec<f64>>, len: usize| match v {
            None => Ok(DVector::zeros(len)),
            Some(v) if v.len() == len && v.iter().all(|x| x.is_finite()) => Ok(DVector::from_column_slice(v)),
            Some(v) => Err(AdmmError::Config(format!(
                "warm start {name} has {} finite entries, expected {len}",
                v.len()
            ))),
        };
        let z = pick("z", &self.start.z, n)?;
        let u = pick("u", &self.start.u, p.n_cont())?;
        let y = match self.mode {
            BlockMode::TwoBlock => DVector::zeros(n),
            BlockMode::ThreeBlock => pick("y", &self.start.y, n)?,
        };
        let lambda = pick("lambda", &self.start.lambda, n)?;
        Ok([z, u, y, lambda])
    }
}
