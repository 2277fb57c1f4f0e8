//! Bin packing with item 1 pinned to bin 1 and the first `l` bins forced
//! open, `l = ⌈Σw / cap⌉`.
//!
//! Binary layout: `ξ[i][j]` for items `j = 1..n`, one block per bin with
//! bins in descending order, followed by `χ[i]` for bins `i = m-1` down to
//! `l`. Item 0 and the opening of bins `0..l` are folded into constants.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ZooError;
use crate::problem::MboProblem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpInstance {
    pub n: usize,
    pub m: usize,
    pub cap: u64,
    pub w: Vec<u64>,
}

impl BpInstance {
    /// One bin per item.
    pub fn new(cap: u64, w: Vec<u64>) -> Result<Self, ZooError> {
        let inst = Self {
            n: w.len(),
            m: w.len(),
            cap,
            w,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ZooError> {
        if self.n == 0 || self.w.len() != self.n {
            return Err(ZooError::Invalid(format!("{} weights for {} items", self.w.len(), self.n)));
        }
        if self.cap == 0 {
            return Err(ZooError::Invalid("capacity must be positive".into()));
        }
        if let Some(j) = self.w.iter().position(|&w| w == 0 || w > self.cap) {
            return Err(ZooError::Invalid(format!(
                "weight {} of item {j} is outside [1, {}]",
                self.w[j], self.cap
            )));
        }
        if self.m < self.lower_bound() {
            return Err(ZooError::Infeasible(format!(
                "{} bins cannot hold total weight {} at capacity {}",
                self.m,
                self.total_weight(),
                self.cap
            )));
        }
        Ok(())
    }

    pub fn total_weight(&self) -> u64 {
        self.w.iter().sum()
    }

    /// Continuous relaxation bound `⌈Σw / cap⌉`.
    pub fn lower_bound(&self) -> usize {
        self.total_weight().div_ceil(self.cap) as usize
    }
}

/// Uniform integer weights on `[1, cap]`, one bin per item.
pub fn gen_bp(n: usize, cap: u64, seed: u64) -> Result<BpInstance, ZooError> {
    if n == 0 || cap == 0 {
        return Err(ZooError::Invalid(format!("need n >= 1 and cap >= 1, got n = {n}, cap = {cap}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = (0..n).map(|_| rng.gen_range(1..=cap)).collect();
    BpInstance::new(cap, w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpMap {
    pub n: usize,
    pub m: usize,
    pub l: usize,
}

impl BpMap {
    pub fn n_bin(&self) -> usize {
        self.m * (self.n - 1) + (self.m - self.l)
    }

    /// Index of `ξ[bin][item]`, `None` for the pinned item 0.
    pub fn xi(&self, bin: usize, item: usize) -> Option<usize> {
        (item > 0).then(|| (self.m - 1 - bin) * (self.n - 1) + item - 1)
    }

    /// Index of `χ[bin]`, `None` for bins forced open.
    pub fn chi(&self, bin: usize) -> Option<usize> {
        (bin >= self.l).then(|| self.m * (self.n - 1) + self.m - 1 - bin)
    }
}

pub fn bp_to_mbo(inst: &BpInstance) -> Result<(MboProblem, BpMap), ZooError> {
    inst.validate()?;
    let map = BpMap {
        n: inst.n,
        m: inst.m,
        l: inst.lower_bound(),
    };
    let nb = map.n_bin();
    let mut a = DVector::zeros(nb);
    for i in map.l..map.m {
        a[map.chi(i).unwrap()] = 1.0;
    }
    let mut b = MboProblem::builder(nb, 0).binary_linear(a).constant(map.l as f64);
    for j in 1..inst.n {
        let mut row = vec![0.0; nb];
        for i in 0..inst.m {
            row[map.xi(i, j).unwrap()] = 1.0;
        }
        b = b.equality(&row, 1.0);
    }
    let cap = inst.cap as f64;
    for i in 0..inst.m {
        let mut row = vec![0.0; nb];
        for j in 1..inst.n {
            row[map.xi(i, j).unwrap()] = inst.w[j] as f64;
        }
        let pinned = if i == 0 { inst.w[0] as f64 } else { 0.0 };
        let rhs = match map.chi(i) {
            Some(c) => {
                row[c] = -cap;
                -pinned
            }
            None => cap - pinned,
        };
        b = b.binary_inequality(&row, rhs);
    }
    Ok((b.build()?, map))
}

/// Item-to-bin view of a bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpAssignment {
    /// Bins holding each item; item 0 is always in bin 0.
    pub bins_of_item: Vec<Vec<usize>>,
    /// Open bins, `χ = 1` or forced.
    pub open: Vec<bool>,
}

impl BpAssignment {
    pub fn loads(&self, inst: &BpInstance) -> Vec<u64> {
        let mut loads = vec![0; inst.m];
        for (j, bins) in self.bins_of_item.iter().enumerate() {
            for &i in bins {
                loads[i] += inst.w[j];
            }
        }
        loads
    }

    /// Every item in exactly one open bin and no bin over capacity.
    pub fn is_valid_packing(&self, inst: &BpInstance) -> bool {
        self.bins_of_item
            .iter()
            .all(|b| b.len() == 1 && self.open[b[0]])
            && self.loads(inst).iter().all(|&l| l <= inst.cap)
    }

    pub fn open_bins(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }
}

pub fn decode_bp(map: &BpMap, bits: &[u8]) -> BpAssignment {
    let mut bins_of_item = vec![Vec::new(); map.n];
    bins_of_item[0].push(0);
    for (j, bins) in bins_of_item.iter_mut().enumerate().skip(1) {
        for i in 0..map.m {
            if bits[map.xi(i, j).unwrap()] != 0 {
                bins.push(i);
            }
        }
    }
    let open = (0..map.m).map(|i| map.chi(i).map_or(true, |c| bits[c] != 0)).collect();
    BpAssignment { bins_of_item, open }
}

/// Inverse of [`decode_bp`]; item 0 must sit in bin 0.
pub fn encode_bp(map: &BpMap, asg: &BpAssignment) -> Vec<u8> {
    let mut bits = vec![0u8; map.n_bin()];
    for (j, bins) in asg.bins_of_item.iter().enumerate().skip(1) {
        for &i in bins {
            bits[map.xi(i, j).unwrap()] = 1;
        }
    }
    for i in map.l..map.m {
        bits[map.chi(i).unwrap()] = u8::from(asg.open[i]);
    }
    bits
}

/// Bin count of first-fit decreasing.
pub fn first_fit_decreasing(inst: &BpInstance) -> usize {
    let mut w = inst.w.clone();
    w.sort_unstable_by(|a, b| b.cmp(a));
    let mut loads: Vec<u64> = Vec::new();
    for wi in w {
        match loads.iter_mut().find(|l| **l + wi <= inst.cap) {
            Some(l) => *l += wi,
            None => loads.push(wi),
        }
    }
    loads.len()
}
