//! Multi-family knapsack with setup costs: opening family `k` costs `S_k`
//! and allows fractions `ξ_kt ∈ [0, χ_k]` of its items, each worth `C_kt`
//! and consuming `D_kt` of a shared capacity.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ZooError;
use crate::problem::MboProblem;

pub const MISK_UTILIZATION: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiskGroup {
    /// Setup costs in `[40, 60]`, values tied to consumptions.
    One,
    /// Setup costs in `[0, 1]`, values in `[−60, −40]`.
    Two,
}

impl TryFrom<u8> for MiskGroup {
    type Error = ZooError;

    fn try_from(g: u8) -> Result<Self, ZooError> {
        match g {
            1 => Ok(MiskGroup::One),
            2 => Ok(MiskGroup::Two),
            _ => Err(ZooError::Invalid(format!("group must be 1 or 2, got {g}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiskInstance {
    pub k: usize,
    pub t: usize,
    pub p_cap: f64,
    pub s: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

impl MiskInstance {
    pub fn validate(&self) -> Result<(), ZooError> {
        if self.k == 0 || self.t == 0 {
            return Err(ZooError::Invalid(format!("K = {}, T = {}", self.k, self.t)));
        }
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == self.k && m.iter().all(|r| r.len() == self.t);
        if self.s.len() != self.k || !rows_ok(&self.c) || !rows_ok(&self.d) {
            return Err(ZooError::Invalid("S, C and D must be K, KxT and KxT".into()));
        }
        let all = self.s.iter().chain(self.c.iter().flatten()).chain(self.d.iter().flatten());
        if !self.p_cap.is_finite() || all.into_iter().any(|v| !v.is_finite()) {
            return Err(ZooError::Invalid("non-finite data".into()));
        }
        Ok(())
    }

    pub fn total_consumption(&self) -> f64 {
        self.d.iter().flatten().sum()
    }

    pub fn utilization(&self) -> f64 {
        self.total_consumption() / self.p_cap
    }
}

/// Consumptions are integers on `[1, 10]` drawn from one stream, so both
/// groups share `D` and `P_cap` for a given seed; costs come from a second
/// stream. `P_cap = ΣD / 2.5`.
pub fn gen_misk(k: usize, t: usize, group: MiskGroup, seed: u64) -> Result<MiskInstance, ZooError> {
    if k == 0 || t == 0 {
        return Err(ZooError::Invalid(format!("need K, T >= 1, got K = {k}, T = {t}")));
    }
    let mut rd = ChaCha8Rng::seed_from_u64(seed);
    rd.set_stream(1);
    let d: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..t).map(|_| f64::from(rd.gen_range(1u32..=10))).collect())
        .collect();
    let mut rc = ChaCha8Rng::seed_from_u64(seed);
    rc.set_stream(2);
    let (s, c) = match group {
        MiskGroup::One => {
            let c = d
                .iter()
                .map(|row| row.iter().map(|&dk| -rc.gen_range(dk - 2.0..=dk + 2.0)).collect())
                .collect();
            let s = (0..k).map(|_| rc.gen_range(40.0..=60.0)).collect();
            (s, c)
        }
        MiskGroup::Two => {
            let c = (0..k)
                .map(|_| (0..t).map(|_| rc.gen_range(-60.0..=-40.0)).collect())
                .collect();
            let s = (0..k).map(|_| rc.gen_range(0.0..=1.0)).collect();
            (s, c)
        }
    };
    let total: f64 = d.iter().flatten().sum();
    Ok(MiskInstance {
        k,
        t,
        p_cap: total / MISK_UTILIZATION,
        s,
        c,
        d,
    })
}

/// `χ_k` are the binaries, `ξ_kt` the continuous variables at `k·T + t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiskMap {
    pub k: usize,
    pub t: usize,
}

impl MiskMap {
    pub fn xi(&self, k: usize, t: usize) -> usize {
        k * self.t + t
    }
}

pub fn misk_to_mbo(inst: &MiskInstance) -> Result<(MboProblem, MiskMap), ZooError> {
    inst.validate()?;
    let map = MiskMap { k: inst.k, t: inst.t };
    let nc = inst.k * inst.t;
    let mut r_u = DVector::zeros(nc);
    let mut lu_cap = vec![0.0; nc];
    for k in 0..inst.k {
        for t in 0..inst.t {
            r_u[map.xi(k, t)] = inst.c[k][t];
            lu_cap[map.xi(k, t)] = inst.d[k][t];
        }
    }
    let mut b = MboProblem::builder(inst.k, nc)
        .binary_linear(DVector::from_column_slice(&inst.s))
        .continuous_quadratic(DMatrix::zeros(nc, nc))
        .continuous_linear(r_u)
        .bounds(DVector::zeros(nc), DVector::from_element(nc, 1.0))
        .joint_inequality(&vec![0.0; inst.k], &lu_cap, inst.p_cap);
    for k in 0..inst.k {
        for t in 0..inst.t {
            let mut lz = vec![0.0; inst.k];
            lz[k] = -1.0;
            let mut lu = vec![0.0; nc];
            lu[map.xi(k, t)] = 1.0;
            b = b.joint_inequality(&lz, &lu, 0.0);
        }
    }
    Ok((b.build()?, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::MboPoint;

    #[test]
    fn single_family_toy() {
        let inst = MiskInstance {
            k: 1,
            t: 1,
            p_cap: 5.0,
            s: vec![1.0],
            c: vec![vec![-10.0]],
            d: vec![vec![5.0]],
        };
        let (p, _) = misk_to_mbo(&inst).unwrap();
        let open = MboPoint::new(vec![1], vec![1.0]).unwrap();
        assert!(p.is_feasible(&open, 1e-9));
        assert_eq!(p.objective(&open).unwrap(), -9.0);
        // a fraction without opening the family is infeasible
        assert!(!p.is_feasible(&MboPoint::new(vec![0], vec![0.5]).unwrap(), 1e-9));
    }

    #[test]
    fn empty_knapsack_is_feasible_with_zero_objective() {
        for group in [MiskGroup::One, MiskGroup::Two] {
            let inst = gen_misk(5, 10, group, 3).unwrap();
            let (p, _) = misk_to_mbo(&inst).unwrap();
            let zero = MboPoint::zeros(5, 50);
            assert!(p.is_feasible(&zero, 0.0));
            assert_eq!(p.objective(&zero).unwrap(), 0.0);
        }
    }

    #[test]
    fn group_one_recipe() {
        for seed in 0..10 {
            let inst = gen_misk(8, 10, MiskGroup::One, seed).unwrap();
            assert!((inst.utilization() - 2.5).abs() < 1e-12);
            for k in 0..8 {
                assert!((40.0..=60.0).contains(&inst.s[k]));
                for t in 0..10 {
                    let d = inst.d[k][t];
                    assert!((1.0..=10.0).contains(&d) && d.fract() == 0.0);
                    assert!(inst.c[k][t] >= -(d + 2.0) && inst.c[k][t] <= -(d - 2.0));
                }
            }
        }
    }

    #[test]
    fn group_two_recipe_shares_consumptions() {
        let g1 = gen_misk(5, 10, MiskGroup::One, 17).unwrap();
        let g2 = gen_misk(5, 10, MiskGroup::Two, 17).unwrap();
        assert_eq!(g1.d, g2.d);
        assert_eq!(g1.p_cap, g2.p_cap);
        assert!(g2.s.iter().all(|s| (0.0..=1.0).contains(s)));
        assert!(g2.c.iter().flatten().all(|c| (-60.0..=-40.0).contains(c)));
        assert_eq!(g1, gen_misk(5, 10, MiskGroup::One, 17).unwrap());
    }

    #[test]
    fn layout() {
        let inst = gen_misk(3, 4, MiskGroup::Two, 0).unwrap();
        let (p, map) = misk_to_mbo(&inst).unwrap();
        assert_eq!(p.n_bin(), 3);
        assert_eq!(p.n_cont(), 12);
        assert_eq!(p.n_joint(), 1 + 12);
        assert_eq!(p.n_eq(), 0);
        assert_eq!(p.r_u()[map.xi(2, 1)], inst.c[2][1]);
        assert!(MiskGroup::try_from(3).is_err());
    }
}
