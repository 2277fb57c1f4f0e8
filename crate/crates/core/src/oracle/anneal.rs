use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{stream_seed, Couplings, OracleError, QuboOracle, QuboSolution};
use crate::splitting::QuboInstance;

/// Simulated annealing schedule. Unset temperatures are derived from the
/// instance: the largest flip cost is accepted with probability ½ at the
/// start and the smallest with probability 1/100 at the end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaParams {
    pub sweeps: usize,
    pub restarts: usize,
    pub t_init: Option<f64>,
    pub t_final: Option<f64>,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            sweeps: 1000,
            restarts: 8,
            t_init: None,
            t_final: None,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(OracleError::InvalidParams("sweeps and restarts must be positive".into()));
        }
        for t in [self.t_init, self.t_final].into_iter().flatten() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(OracleError::InvalidParams(format!("temperature {t} is not positive")));
            }
        }
        if let (Some(a), Some(b)) = (self.t_init, self.t_final) {
            if b > a {
                return Err(OracleError::InvalidParams(format!("t_final {b} exceeds t_init {a}")));
            }
        }
        Ok(())
    }

    fn temperatures(&self, c: &Couplings) -> (f64, f64) {
        let mut max_delta = 0.0f64;
        let mut min_delta = f64::INFINITY;
        for (i, nb) in c.neighbors.iter().enumerate() {
            let span = c.h[i].abs() + nb.iter().map(|(_, w)| w.abs()).sum::<f64>();
            max_delta = max_delta.max(span);
            for v in std::iter::once(c.h[i]).chain(nb.iter().map(|(_, w)| *w)) {
                if v != 0.0 {
                    min_delta = min_delta.min(v.abs());
                }
            }
        }
        if max_delta == 0.0 {
            return (1.0, 1.0);
        }
        let t0 = self.t_init.unwrap_or(max_delta / std::f64::consts::LN_2);
        let t1 = self.t_final.unwrap_or(min_delta / 100f64.ln()).min(t0);
        (t0, t1)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SaOracle {
    pub params: SaParams,
}

impl SaOracle {
    pub fn new(params: SaParams) -> Result<Self, OracleError> {
        params.validate()?;
        Ok(Self { params })
    }
}

const SALT: u64 = 0x5a5a_0001;

/// Best bitstring over all restarts; deterministic for a given seed.
pub fn sa_solve(q: &QuboInstance, params: &SaParams, seed: u64) -> Result<QuboSolution, OracleError> {
    params.validate()?;
    let n = q.len();
    if n == 0 {
        return Ok(QuboSolution::evaluate(q, Vec::new()));
    }
    let c = Couplings::new(q);
    let (t0, t1) = params.temperatures(&c);
    let ratio = if params.sweeps > 1 {
        (t1 / t0).powf(1.0 / (params.sweeps - 1) as f64)
    } else {
        1.0
    };
    let mut best: Option<QuboSolution> = None;
    for r in 0..params.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let mut bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
        let mut fields = c.fields(&bits);
        let mut t = t0;
        for _ in 0..params.sweeps {
            for i in 0..n {
                let d = Couplings::delta(&bits, &fields, i);
                if d <= 0.0 || rng.gen::<f64>() < (-d / t).exp() {
                    c.flip(&mut bits, &mut fields, i);
                }
            }
            t *= ratio;
        }
        c.descend(&mut bits, &mut fields);
        let cand = QuboSolution::evaluate(q, bits);
        if best.as_ref().map_or(true, |b| cand.energy < b.energy) {
            best = Some(cand);
        }
    }
    Ok(best.expect("at least one restart"))
}

impl QuboOracle for SaOracle {
    fn name(&self) -> &str {
        "sa"
    }

    fn solve(&self, q: &QuboInstance, iteration: usize, seed: u64) -> Result<QuboSolution, OracleError> {
        sa_solve(q, &self.params, stream_seed(seed, iteration, SALT))
    }
}
