//! Assignment repair and pairwise Karmarkar–Karp rebalancing for bin
//! packing bitstrings.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::bp::{decode_bp, encode_bp, BpAssignment, BpInstance, BpMap};
use crate::oracle::{OracleError, QuboOracle, QuboSolution};
use crate::problem::{MboPoint, MboProblem};
use crate::splitting::QuboInstance;

/// Gives every item exactly one bin. Items in several bins keep the lowest
/// index; unassigned items go to the first bin with room, else to the least
/// loaded one. Open flags are copied from the bitstring.
pub fn repair(inst: &BpInstance, map: &BpMap, bits: &[u8]) -> BpAssignment {
    let mut asg = decode_bp(map, bits);
    for bins in asg.bins_of_item.iter_mut() {
        bins.truncate(1);
    }
    let mut loads = asg.loads(inst);
    for j in 0..inst.n {
        if !asg.bins_of_item[j].is_empty() {
            continue;
        }
        let w = inst.w[j];
        let bin = (0..inst.m).find(|&i| loads[i] + w <= inst.cap).unwrap_or_else(|| {
            (0..inst.m)
                .min_by_key(|&i| (loads[i], i))
                .expect("at least one bin")
        });
        asg.bins_of_item[j].push(bin);
        loads[bin] += w;
    }
    asg
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    diff: u64,
    order: Reverse<usize>,
    big: Vec<usize>,
    small: Vec<usize>,
}

/// Two-way Karmarkar–Karp differencing over `(id, weight)` pairs. Returns the
/// two sets of ids.
pub fn karmarkar_karp(items: &[(usize, u64)]) -> (Vec<usize>, Vec<usize>) {
    let mut heap: BinaryHeap<Node> = items
        .iter()
        .enumerate()
        .map(|(k, &(id, w))| Node {
            diff: w,
            order: Reverse(k),
            big: vec![id],
            small: Vec::new(),
        })
        .collect();
    let mut seq = items.len();
    while heap.len() > 1 {
        let a = heap.pop().unwrap();
        let b = heap.pop().unwrap();
        let mut big = a.big;
        big.extend(b.small);
        let mut small = a.small;
        small.extend(b.big);
        heap.push(Node {
            diff: a.diff - b.diff,
            order: Reverse(seq),
            big,
            small,
        });
        seq += 1;
    }
    match heap.pop() {
        Some(n) => (n.big, n.small),
        None => (Vec::new(), Vec::new()),
    }
}

fn aligned(inst: &BpInstance, map: &BpMap, asg: &BpAssignment) -> BpAssignment {
    let used: Vec<bool> = asg
        .bins_of_item
        .iter()
        .fold(vec![false; inst.m], |mut u, b| {
            for &i in b {
                u[i] = true;
            }
            u
        });
    BpAssignment {
        bins_of_item: asg.bins_of_item.clone(),
        open: (0..inst.m).map(|i| i < map.l || used[i]).collect(),
    }
}

fn score(p: &MboProblem, map: &BpMap, asg: &BpAssignment, mu: f64) -> (f64, f64) {
    let pt = MboPoint {
        x: encode_bp(map, asg),
        u: Vec::new(),
    };
    let v = p.violation(&pt).expect("encoded point matches the problem");
    let m = p.merit(&pt, mu).expect("mu is positive");
    (v, m)
}

/// Repairs `bits`, then re-splits every pair of used bins `(i, i')`, `i < i'`,
/// by differencing. A re-split is kept if it lowers the capacity violation,
/// or keeps it and lowers the merit. Bin openings are aligned with usage
/// when that does not raise the merit. The result never has a higher merit
/// than the repaired input.
pub fn kk_local_search(inst: &BpInstance, map: &BpMap, p: &MboProblem, mu: f64, bits: &[u8]) -> Vec<u8> {
    let repaired = repair(inst, map, bits);
    let mut cur = aligned(inst, map, &repaired);
    let mut cur_score = score(p, map, &cur, mu);
    for i in 0..inst.m {
        for i2 in (i + 1)..inst.m {
            let pool: Vec<(usize, u64)> = (0..inst.n)
                .filter(|&j| cur.bins_of_item[j][0] == i || cur.bins_of_item[j][0] == i2)
                .map(|j| (j, inst.w[j]))
                .collect();
            let in_i = pool.iter().filter(|(j, _)| cur.bins_of_item[*j][0] == i).count();
            if in_i == 0 || in_i == pool.len() {
                continue;
            }
            let (mut s1, mut s2) = karmarkar_karp(&pool);
            if s2.iter().min() < s1.iter().min() {
                std::mem::swap(&mut s1, &mut s2);
            }
            let mut cand = cur.clone();
            for &j in &s1 {
                cand.bins_of_item[j] = vec![i];
            }
            for &j in &s2 {
                cand.bins_of_item[j] = vec![i2];
            }
            let cand = aligned(inst, map, &cand);
            let s = score(p, map, &cand, mu);
            if s.0 < cur_score.0 || (s.0 == cur_score.0 && s.1 < cur_score.1) {
                cur = cand;
                cur_score = s;
            }
        }
    }
    let unaligned = BpAssignment {
        bins_of_item: cur.bins_of_item.clone(),
        open: repaired.open.clone(),
    };
    [cur, unaligned, repaired]
        .into_iter()
        .map(|a| {
            let m = score(p, map, &a, mu).1;
            (a, m)
        })
        .fold(None::<(BpAssignment, f64)>, |best, (a, m)| match best {
            Some((b, bm)) if bm <= m => Some((b, bm)),
            _ => Some((a, m)),
        })
        .map(|(a, _)| encode_bp(map, &a))
        .expect("three candidates")
}

/// Runs a base oracle and post-processes its bitstring with
/// [`kk_local_search`]. The reported energy is that of the improved string.
#[derive(Debug, Clone)]
pub struct LocalSearchOracle<O> {
    pub base: O,
    inst: BpInstance,
    map: BpMap,
    problem: MboProblem,
    mu: f64,
    name: String,
}

impl<O: QuboOracle> LocalSearchOracle<O> {
    pub fn new(base: O, inst: BpInstance, map: BpMap, problem: MboProblem, mu: f64) -> Self {
        let name = format!("{}+kk", base.name());
        Self {
            base,
            inst,
            map,
            problem,
            mu,
            name,
        }
    }
}

impl<O: QuboOracle> QuboOracle for LocalSearchOracle<O> {
    fn name(&self) -> &str {
        &self.name
    }

    fn solve(&self, q: &QuboInstance, iteration: usize, seed: u64) -> Result<QuboSolution, OracleError> {
        let raw = self.base.solve(q, iteration, seed)?;
        if raw.bits.len() != self.map.n_bin() {
            return Err(OracleError::Failed(format!(
                "local search expects {} bits, got {}",
                self.map.n_bin(),
                raw.bits.len()
            )));
        }
        let bits = kk_local_search(&self.inst, &self.map, &self.problem, self.mu, &raw.bits);
        Ok(QuboSolution::evaluate(q, bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{bp_to_mbo, gen_bp};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(cap: u64, w: Vec<u64>) -> (BpInstance, BpMap, MboProblem) {
        let inst = BpInstance::new(cap, w).unwrap();
        let (p, map) = bp_to_mbo(&inst).unwrap();
        (inst, map, p)
    }

    fn merit(p: &MboProblem, bits: &[u8]) -> f64 {
        p.merit(&MboPoint { x: bits.to_vec(), u: vec![] }, 1e3).unwrap()
    }

    #[test]
    fn differencing_on_hand_weights() {
        let (a, b) = karmarkar_karp(&[(0, 39), (1, 1), (2, 39)]);
        let sum = |s: &[usize]| s.iter().map(|&j| [39, 1, 39][j]).sum::<u64>();
        assert_eq!(sum(&a).abs_diff(sum(&b)), 1);
        assert_eq!(a.len() + b.len(), 3);
        let (a, b) = karmarkar_karp(&[(0, 8), (1, 7), (2, 6), (3, 5), (4, 4)]);
        let w = [8, 7, 6, 5, 4];
        let s = |v: &[usize]| v.iter().map(|&j| w[j]).sum::<u64>();
        assert_eq!(s(&a).abs_diff(s(&b)), 2);
    }

    #[test]
    fn rebalances_overfull_pair() {
        // weights 39, 1, 39 with cap 40: bins {39} then {1, 39}
        let (inst, map, p) = setup(40, vec![39, 1, 39]);
        let asg = BpAssignment {
            bins_of_item: vec![vec![0], vec![1], vec![1]],
            open: vec![true, true, true],
        };
        let out = kk_local_search(&inst, &map, &p, 1e3, &encode_bp(&map, &asg));
        let dec = decode_bp(&map, &out);
        assert!(dec.is_valid_packing(&inst));
        assert_eq!(p.violation(&MboPoint { x: out.clone(), u: vec![] }).unwrap(), 0.0);
        let mut loads = dec.loads(&inst);
        loads.sort_unstable();
        assert_eq!(loads, vec![0, 39, 40]);
    }

    #[test]
    fn fixes_real_overflow() {
        let (inst, map, p) = setup(40, vec![39, 39, 1]);
        // {39, 39} overflows bin 0, {1} in bin 1
        let asg = BpAssignment {
            bins_of_item: vec![vec![0], vec![0], vec![1]],
            open: vec![true, true, false],
        };
        let bits = encode_bp(&map, &asg);
        let out = kk_local_search(&inst, &map, &p, 1e3, &bits);
        let dec = decode_bp(&map, &out);
        assert!(dec.is_valid_packing(&inst), "{dec:?}");
        assert!(merit(&p, &out) < merit(&p, &bits));
    }

    #[test]
    fn balanced_pair_is_unchanged() {
        let (inst, map, p) = setup(40, vec![20, 20, 20, 20]);
        let asg = BpAssignment {
            bins_of_item: vec![vec![0], vec![0], vec![1], vec![1]],
            open: vec![true, true, false, false],
        };
        let bits = encode_bp(&map, &asg);
        assert_eq!(kk_local_search(&inst, &map, &p, 1e3, &bits), bits);
    }

    #[test]
    fn repair_rules() {
        let (inst, map, _) = setup(40, vec![30, 20, 15]);
        let mut bits = vec![0u8; map.n_bin()];
        // item 1 in bins 1 and 2, item 2 nowhere
        bits[map.xi(1, 1).unwrap()] = 1;
        bits[map.xi(2, 1).unwrap()] = 1;
        let asg = repair(&inst, &map, &bits);
        assert_eq!(asg.bins_of_item, vec![vec![0], vec![1], vec![1]]);
        // nothing fits: least loaded bin
        let (inst, map, _) = setup(10, vec![10, 10, 10]);
        let mut bits = vec![0u8; map.n_bin()];
        bits[map.xi(1, 1).unwrap()] = 1;
        bits[map.xi(2, 1).unwrap()] = 1;
        let asg = repair(&inst, &map, &bits);
        assert_eq!(asg.bins_of_item, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn never_raises_merit_and_keeps_single_assignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..200 {
            let n = rng.gen_range(2..=6);
            let inst = gen_bp(n, 40, seed).unwrap();
            let (p, map) = bp_to_mbo(&inst).unwrap();
            let bits: Vec<u8> = (0..map.n_bin()).map(|_| rng.gen_range(0..=1)).collect();
            let repaired = encode_bp(&map, &repair(&inst, &map, &bits));
            let out = kk_local_search(&inst, &map, &p, 1e3, &bits);
            assert!(merit(&p, &out) <= merit(&p, &repaired));
            let dec = decode_bp(&map, &out);
            assert!(dec.bins_of_item.iter().all(|b| b.len() == 1));
            assert_eq!(dec.bins_of_item[0], vec![0]);
        }
    }
}
