use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{stream_seed, OracleError, QuboOracle, QuboSolution};
use crate::splitting::QuboInstance;

/// Bit-flip probability `p_k = min(½, p0 / k)` at outer iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSchedule {
    pub p0: f64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self { p0: 0.5 }
    }
}

impl NoiseSchedule {
    pub fn probability(&self, k: usize) -> f64 {
        (self.p0 / k.max(1) as f64).clamp(0.0, 0.5)
    }
}

/// Wraps an oracle and flips each returned bit independently with the
/// scheduled probability.
#[derive(Debug, Clone)]
pub struct NoisyOracle<O> {
    pub base: O,
    pub schedule: NoiseSchedule,
    name: String,
}

impl<O: QuboOracle> NoisyOracle<O> {
    pub fn new(base: O, schedule: NoiseSchedule) -> Result<Self, OracleError> {
        if !(schedule.p0 >= 0.0 && schedule.p0.is_finite()) {
            return Err(OracleError::InvalidParams(format!("noise p0 = {}", schedule.p0)));
        }
        let name = format!("noisy-{}", base.name());
        Ok(Self { base, schedule, name })
    }
}

const SALT: u64 = 0x0f11_9000;

impl<O: QuboOracle> QuboOracle for NoisyOracle<O> {
    fn name(&self) -> &str {
        &self.name
    }

    fn solve(&self, q: &QuboInstance, iteration: usize, seed: u64) -> Result<QuboSolution, OracleError> {
        let clean = self.base.solve(q, iteration, seed)?;
        let p = self.schedule.probability(iteration);
        if p == 0.0 {
            return Ok(clean);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, iteration, SALT));
        let mut bits = clean.bits;
        for b in bits.iter_mut() {
            if rng.gen_bool(p) {
                *b ^= 1;
            }
        }
        Ok(QuboSolution::evaluate(q, bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ExactOracle;
    use nalgebra::{DMatrix, DVector};

    fn instance() -> QuboInstance {
        QuboInstance::new(DMatrix::identity(12, 12), -DVector::from_element(12, 3.0), 0.0).unwrap()
    }

    #[test]
    fn schedule_values() {
        let s = NoiseSchedule::default();
        assert_eq!(s.probability(1), 0.5);
        assert_eq!(s.probability(2), 0.25);
        assert_eq!(s.probability(10), 0.05);
        assert_eq!(NoiseSchedule { p0: 4.0 }.probability(2), 0.5);
        assert!(s.probability(1_000_000) < 1e-6);
    }

    #[test]
    fn zero_noise_is_identity() {
        let q = instance();
        let noisy = NoisyOracle::new(ExactOracle, NoiseSchedule { p0: 0.0 }).unwrap();
        for k in 1..20 {
            assert_eq!(noisy.solve(&q, k, 3).unwrap(), ExactOracle.solve(&q, k, 3).unwrap());
        }
    }

    #[test]
    fn flips_are_reported_with_their_energy() {
        let q = instance();
        let noisy = NoisyOracle::new(ExactOracle, NoiseSchedule::default()).unwrap();
        let sol = noisy.solve(&q, 1, 42).unwrap();
        assert_eq!(sol.energy, q.energy(&sol.bits));
        assert_ne!(sol.bits, vec![1; 12]);
        assert_eq!(sol, noisy.solve(&q, 1, 42).unwrap());
    }

    #[test]
    fn late_iterations_converge_to_base() {
        let q = instance();
        let noisy = NoisyOracle::new(ExactOracle, NoiseSchedule::default()).unwrap();
        let base = ExactOracle.solve(&q, 0, 0).unwrap();
        let agree = (1_000_000..1_000_050).filter(|&k| noisy.solve(&q, k, 1).unwrap() == base).count();
        assert_eq!(agree, 50);
    }
}
