//! QUBO minimization backends.
//!
//! Every oracle returns a bitstring with its energy recomputed from the
//! instance, so callers can rely on `q.energy(&sol.bits) == sol.energy`.

mod anneal;
mod exact;
mod noisy;

use thiserror::Error;

use crate::splitting::QuboInstance;

pub use anneal::{sa_solve, SaOracle, SaParams};
pub use exact::{exact_solve, ExactOracle, EXACT_MAX_BITS};
pub use noisy::{NoiseSchedule, NoisyOracle};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("QUBO with {n} variables exceeds the enumeration limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("invalid oracle parameters: {0}")]
    InvalidParams(String),
    #[error("oracle failed: {0}")]
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboSolution {
    pub bits: Vec<u8>,
    pub energy: f64,
}

impl QuboSolution {
    pub fn evaluate(q: &QuboInstance, bits: Vec<u8>) -> Self {
        let energy = q.energy(&bits);
        Self { bits, energy }
    }
}

/// A QUBO solver. `iteration` is the outer ADMM counter and `seed` the run
/// seed; stochastic oracles derive their stream from both.
pub trait QuboOracle: Send + Sync {
    fn name(&self) -> &str;

    fn solve(&self, q: &QuboInstance, iteration: usize, seed: u64) -> Result<QuboSolution, OracleError>;
}

impl<T: QuboOracle + ?Sized> QuboOracle for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn solve(&self, q: &QuboInstance, iteration: usize, seed: u64) -> Result<QuboSolution, OracleError> {
        (**self).solve(q, iteration, seed)
    }
}

impl<T: QuboOracle + ?Sized> QuboOracle for &T {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn solve(&self, q: &QuboInstance, iteration: usize, seed: u64) -> Result<QuboSolution, OracleError> {
        (**self).solve(q, iteration, seed)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the stream used at `iteration` of a run seeded with `seed`.
pub fn stream_seed(seed: u64, iteration: usize, salt: u64) -> u64 {
    splitmix(splitmix(seed ^ salt) ^ iteration as u64)
}

/// Couplings in the form used by single-flip searches: flipping bit `i`
/// changes the energy by `(1 − 2sᵢ)(hᵢ + Σⱼ Jᵢⱼ sⱼ)`.
#[derive(Debug, Clone)]
pub(crate) struct Couplings {
    pub h: Vec<f64>,
    pub neighbors: Vec<Vec<(usize, f64)>>,
}

impl Couplings {
    pub fn new(q: &QuboInstance) -> Self {
        let n = q.len();
        let m = q.matrix();
        let h = (0..n).map(|i| q.linear()[i] + m[(i, i)]).collect();
        let neighbors = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && m[(i, j)] != 0.0)
                    .map(|j| (j, 2.0 * m[(i, j)]))
                    .collect()
            })
            .collect();
        Self { h, neighbors }
    }

    pub fn fields(&self, bits: &[u8]) -> Vec<f64> {
        (0..self.h.len())
            .map(|i| {
                self.h[i]
                    + self.neighbors[i]
                        .iter()
                        .filter(|(j, _)| bits[*j] != 0)
                        .map(|(_, w)| w)
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn flip(&self, bits: &mut [u8], fields: &mut [f64], i: usize) {
        let sign = if bits[i] == 0 { 1.0 } else { -1.0 };
        bits[i] ^= 1;
        for &(j, w) in &self.neighbors[i] {
            fields[j] += sign * w;
        }
    }

    pub fn delta(bits: &[u8], fields: &[f64], i: usize) -> f64 {
        if bits[i] == 0 {
            fields[i]
        } else {
            -fields[i]
        }
    }

    /// Flips improving bits until none is left.
    pub fn descend(&self, bits: &mut [u8], fields: &mut [f64]) {
        loop {
            let mut improved = false;
            for i in 0..bits.len() {
                if Self::delta(bits, fields, i) < -1e-12 * (1.0 + fields[i].abs()) {
                    self.flip(bits, fields, i);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
}
