use super::{Couplings, OracleError, QuboOracle, QuboSolution};
use crate::splitting::QuboInstance;

pub const EXACT_MAX_BITS: usize = 24;

const RECOMPUTE_EVERY: u64 = 1024;

/// Global minimizer by Gray-code enumeration. Energies within
/// `1e-9·(1 + |E|)` are treated as ties and resolved towards the
/// lexicographically smallest bitstring.
pub fn exact_solve(q: &QuboInstance) -> Result<QuboSolution, OracleError> {
    let n = q.len();
    if n > EXACT_MAX_BITS {
        return Err(OracleError::TooLarge { n, max: EXACT_MAX_BITS });
    }
    let c = Couplings::new(q);
    let mut bits = vec![0u8; n];
    let mut fields = c.fields(&bits);
    let mut energy = q.offset();
    let mut best = bits.clone();
    let mut best_e = energy;
    for t in 1u64..(1u64 << n) {
        let i = t.trailing_zeros() as usize;
        energy += Couplings::delta(&bits, &fields, i);
        c.flip(&mut bits, &mut fields, i);
        if t % RECOMPUTE_EVERY == 0 {
            energy = q.energy(&bits);
            fields = c.fields(&bits);
        }
        let tol = 1e-9 * (1.0 + best_e.abs());
        if energy < best_e - tol || (energy <= best_e + tol && bits < best) {
            best.copy_from_slice(&bits);
            best_e = energy;
        }
    }
    Ok(QuboSolution::evaluate(q, best))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactOracle;

impl QuboOracle for ExactOracle {
    fn name(&self) -> &str {
        "exact"
    }

    fn solve(&self, q: &QuboInstance, _iteration: usize, _seed: u64) -> Result<QuboSolution, OracleError> {
        exact_solve(q)
    }
}
