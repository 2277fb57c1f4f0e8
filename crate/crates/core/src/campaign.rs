//! Benchmark campaigns: batches of generated or loaded instances solved with
//! one configuration, scored against exact references where those are cheap.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::admm::{self, AdmmConfig, AdmmError, SolveReport};
use crate::oracle::{stream_seed, ExactOracle, NoiseSchedule, NoisyOracle, OracleError, QuboOracle, SaOracle, SaParams};
use crate::problem::{MboPoint, MboProblem};
use crate::qp::QpSolver;
use crate::zoo::{
    bp_to_mbo, exact_mbo_solve, gap, gen_bp, gen_misk, misk_to_mbo, BpInstance, BpMap, LocalSearchOracle, MiskGroup,
    ZooError, EXACT_MBO_MAX_BITS,
};

pub const CSV_HEADER: &str = "instance,n_bin,IT,gap,feasible,optimal,qubo_frac,runtime_s";

/// Feasibility tolerance and optimality gap threshold for the row flags.
pub const FEAS_TOL: f64 = 1e-6;
pub const OPT_GAP: f64 = 1e-6;

const BP_SALT: u64 = 0xb1_0000;
const MISK_SALT: u64 = 0x315c_0000;
const RUN_SALT: u64 = 0x7e57_0000;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("instance {id}: {source}")]
    Solve { id: String, source: AdmmError },
    #[error("instance {id}: {source}")]
    Reference { id: String, source: ZooError },
    #[error("instance {id}: {source}")]
    Oracle { id: String, source: OracleError },
    #[error(transparent)]
    Zoo(#[from] ZooError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Exact,
    Sa,
    /// Exact answers with scheduled bit flips.
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: OracleKind,
    pub sa: SaParams,
    pub noise: NoiseSchedule,
    /// Bin packing only: rebalance every oracle answer with pairwise
    /// Karmarkar-Karp differencing.
    pub local_search: bool,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self::new(OracleKind::Exact)
    }
}

impl OracleSpec {
    pub fn new(kind: OracleKind) -> Self {
        Self {
            kind,
            sa: SaParams::default(),
            noise: NoiseSchedule::default(),
            local_search: false,
        }
    }

    pub fn build(&self) -> Result<Box<dyn QuboOracle>, OracleError> {
        Ok(match self.kind {
            OracleKind::Exact => Box::new(ExactOracle),
            OracleKind::Sa => Box::new(SaOracle::new(self.sa)?),
            OracleKind::Noisy => Box::new(NoisyOracle::new(ExactOracle, self.noise)?),
        })
    }

    /// Oracle for one instance, wrapped with local search when requested and
    /// the instance is a bin packing one.
    pub fn build_for(&self, inst: &CampaignInstance, mu: f64) -> Result<Box<dyn QuboOracle>, OracleError> {
        let base = self.build()?;
        match (&inst.kind, self.local_search) {
            (InstanceKind::Bp { inst: bp, map }, true) => Ok(Box::new(LocalSearchOracle::new(
                base,
                bp.clone(),
                map.clone(),
                inst.problem.clone(),
                mu,
            ))),
            _ => Ok(base),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceKind {
    Bp { inst: BpInstance, map: BpMap },
    Misk,
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignInstance {
    pub id: String,
    pub kind: InstanceKind,
    pub problem: MboProblem,
}

impl CampaignInstance {
    pub fn from_bp(id: impl Into<String>, inst: BpInstance) -> Result<Self, ZooError> {
        let (problem, map) = bp_to_mbo(&inst)?;
        Ok(Self {
            id: id.into(),
            kind: InstanceKind::Bp { inst, map },
            problem,
        })
    }
}

/// `per_size` bin packing instances for every item count, with `m = n`.
/// Instance `j` of the flattened list draws its weights from
/// `stream_seed(master, j)`.
pub fn bp_campaign(sizes: &[usize], cap: u64, per_size: usize, master: u64) -> Result<Vec<CampaignInstance>, ZooError> {
    let mut out = Vec::with_capacity(sizes.len() * per_size);
    for &n in sizes {
        for j in 0..per_size {
            let idx = out.len();
            let inst = gen_bp(n, cap, stream_seed(master, idx, BP_SALT))?;
            out.push(CampaignInstance::from_bp(format!("bp-n{n}-q{cap}-{j:02}"), inst)?);
        }
    }
    Ok(out)
}

pub fn misk_campaign(
    ks: &[usize],
    t: usize,
    group: MiskGroup,
    per_k: usize,
    master: u64,
) -> Result<Vec<CampaignInstance>, ZooError> {
    let g = match group {
        MiskGroup::One => 1,
        MiskGroup::Two => 2,
    };
    let mut out = Vec::with_capacity(ks.len() * per_k);
    for &k in ks {
        for j in 0..per_k {
            let idx = out.len();
            let inst = gen_misk(k, t, group, stream_seed(master, idx, MISK_SALT))?;
            let (problem, _) = misk_to_mbo(&inst)?;
            out.push(CampaignInstance {
                id: format!("misk-g{g}-k{k}-t{t}-{j:02}"),
                kind: InstanceKind::Misk,
                problem,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub instance: String,
    pub n_bin: usize,
    #[serde(rename = "IT")]
    pub it: usize,
    pub gap: Option<f64>,
    pub feasible: bool,
    pub optimal: Option<bool>,
    pub qubo_frac: Option<f64>,
    pub runtime_s: f64,
}

/// Column means over the rows. Percentages are in `[0, 100]`; optional
/// columns average only the rows that carry a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub mean_it: Option<f64>,
    pub mean_gap: Option<f64>,
    pub feas_pct: Option<f64>,
    pub opt_pct: Option<f64>,
    pub mean_qubo_pct: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl Aggregate {
    pub fn of(rows: &[CampaignRow]) -> Self {
        let pct = |b: bool| if b { 100.0 } else { 0.0 };
        Self {
            instances: rows.len(),
            mean_it: mean(rows.iter().map(|r| r.it as f64)),
            mean_gap: mean(rows.iter().filter_map(|r| r.gap)),
            feas_pct: mean(rows.iter().map(|r| pct(r.feasible))),
            opt_pct: mean(rows.iter().filter_map(|r| r.optimal.map(pct))),
            mean_qubo_pct: mean(rows.iter().filter_map(|r| r.qubo_frac.map(|f| 100.0 * f))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub rows: Vec<CampaignRow>,
    pub aggregate: Aggregate,
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl CampaignResult {
    pub fn new(rows: Vec<CampaignRow>) -> Self {
        let aggregate = Aggregate::of(&rows);
        Self { rows, aggregate }
    }

    /// Rows followed by an `aggregate` row holding the means, with Feas% and
    /// Opt% in the `feasible` and `optimal` columns.
    pub fn to_csv(&self) -> Result<String, CampaignError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(','))?;
        for r in &self.rows {
            w.write_record([
                r.instance.clone(),
                r.n_bin.to_string(),
                r.it.to_string(),
                opt_cell(r.gap),
                r.feasible.to_string(),
                opt_cell(r.optimal),
                opt_cell(r.qubo_frac),
                r.runtime_s.to_string(),
            ])?;
        }
        let a = &self.aggregate;
        let n_bin = mean(self.rows.iter().map(|r| r.n_bin as f64));
        let runtime = mean(self.rows.iter().map(|r| r.runtime_s));
        w.write_record([
            "aggregate".to_string(),
            opt_cell(n_bin),
            opt_cell(a.mean_it),
            opt_cell(a.mean_gap),
            opt_cell(a.feas_pct),
            opt_cell(a.opt_pct),
            opt_cell(a.mean_qubo_pct.map(|p| p / 100.0)),
            opt_cell(runtime),
        ])?;
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Plain-text table for terminals and logs.
    pub fn table(&self) -> String {
        let cell = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |v| format!("{v:.prec$}"));
        let mut s = format!(
            "{:<24} {:>5} {:>4} {:>10} {:>5} {:>5} {:>6} {:>9}\n",
            "instance", "n_bin", "IT", "gap", "feas", "opt", "qubo", "time_s"
        );
        for r in &self.rows {
            s += &format!(
                "{:<24} {:>5} {:>4} {:>10} {:>5} {:>5} {:>6} {:>9.3}\n",
                r.instance,
                r.n_bin,
                r.it,
                cell(r.gap, 4),
                r.feasible,
                r.optimal.map_or("-".to_string(), |o| o.to_string()),
                cell(r.qubo_frac, 3),
                r.runtime_s
            );
        }
        let a = &self.aggregate;
        s += &format!(
            "{} instances: IT {} | gap {} | Feas% {} | Opt% {} | QUBO% {}\n",
            a.instances,
            cell(a.mean_it, 1),
            cell(a.mean_gap, 4),
            cell(a.feas_pct, 2),
            cell(a.opt_pct, 2),
            cell(a.mean_qubo_pct, 2)
        );
        s
    }
}

/// One solved instance with everything needed to audit its row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub row: CampaignRow,
    pub seed: u64,
    pub v_star: Option<f64>,
    pub point: MboPoint,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub result: CampaignResult,
    pub instances: Vec<InstanceOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignSpec {
    pub config: AdmmConfig,
    pub oracle: OracleSpec,
    pub master_seed: u64,
    /// Compute `v*` by enumeration for instances within the size limit.
    pub reference: bool,
}

impl CampaignSpec {
    /// First 8 hex digits of the SHA-256 of the JSON-encoded spec.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(&Sha256::digest(&json)[..4])
    }
}

/// Solves every instance, in parallel, with the run seed of instance `i`
/// derived from `(master_seed, i)`. Rows come back in instance order.
pub fn run_campaign(
    instances: &[CampaignInstance],
    spec: &CampaignSpec,
    qp: &dyn QpSolver,
) -> Result<CampaignOutcome, CampaignError> {
    let outcomes = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| run_one(i, inst, spec, qp))
        .collect::<Result<Vec<_>, _>>()?;
    let result = CampaignResult::new(outcomes.iter().map(|o| o.row.clone()).collect());
    Ok(CampaignOutcome {
        result,
        instances: outcomes,
    })
}

fn run_one(
    index: usize,
    inst: &CampaignInstance,
    spec: &CampaignSpec,
    qp: &dyn QpSolver,
) -> Result<InstanceOutcome, CampaignError> {
    let p = &inst.problem;
    let seed = stream_seed(spec.master_seed, index, RUN_SALT);
    let mut cfg = spec.config.clone();
    cfg.seed = seed;
    let oracle = spec.oracle.build_for(inst, cfg.mu).map_err(|source| CampaignError::Oracle {
        id: inst.id.clone(),
        source,
    })?;
    let start = Instant::now();
    let report = admm::solve(p, &cfg, oracle.as_ref(), qp).map_err(|source| CampaignError::Solve {
        id: inst.id.clone(),
        source,
    })?;
    let runtime_s = start.elapsed().as_secs_f64();

    let v_star = if spec.reference && p.n_bin() <= EXACT_MBO_MAX_BITS {
        exact_mbo_solve(p, qp)
            .map_err(|source| CampaignError::Reference {
                id: inst.id.clone(),
                source,
            })?
            .map(|s| s.value)
    } else {
        None
    };

    let point = match &report.polished {
        Some(out) => out.point.clone(),
        None => report.best_point.clone(),
    };
    let value = p.objective(&point).map_err(|e| CampaignError::Zoo(e.into()))?;
    let feasible = p.is_feasible(&point, FEAS_TOL);
    let g = v_star.map(|vs| gap(value, vs));
    let row = CampaignRow {
        instance: inst.id.clone(),
        n_bin: p.n_bin(),
        it: report.iterations,
        gap: g,
        feasible,
        optimal: g.map(|g| feasible && g <= OPT_GAP),
        qubo_frac: report.qubo_optimal_fraction(),
        runtime_s,
    };
    info!(
        "{}: IT {} feasible {} gap {:?} ({:.2} s)",
        row.instance, row.it, row.feasible, row.gap, row.runtime_s
    );
    Ok(InstanceOutcome {
        row,
        seed,
        v_star,
        point,
        report,
    })
}

/// Files written by [`write_campaign`].
#[derive(Debug, Clone)]
pub struct CampaignFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub instances: Vec<PathBuf>,
}

/// Writes `<name>-s<seed>-<hash>.csv`, a `.summary.json` next to it, and one
/// JSON per instance under a directory of the same stem.
pub fn write_campaign(
    dir: impl AsRef<Path>,
    name: &str,
    spec: &CampaignSpec,
    outcome: &CampaignOutcome,
) -> Result<CampaignFiles, CampaignError> {
    let dir = dir.as_ref();
    let stem = format!("{name}-s{}-{}", spec.master_seed, spec.hash());
    let per_instance = dir.join(&stem);
    fs::create_dir_all(&per_instance)?;
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, outcome.result.to_csv()?)?;
    let summary = dir.join(format!("{stem}.summary.json"));
    let body = serde_json::json!({
        "name": name,
        "spec": spec,
        "config_hash": spec.hash(),
        "aggregate": outcome.result.aggregate,
        "rows": outcome.result.rows,
    });
    fs::write(&summary, serde_json::to_string_pretty(&body)?)?;
    let mut instances = Vec::with_capacity(outcome.instances.len());
    for o in &outcome.instances {
        let path = per_instance.join(format!("{}.json", o.row.instance));
        fs::write(&path, serde_json::to_string_pretty(o)?)?;
        instances.push(path);
    }
    Ok(CampaignFiles { csv, summary, instances })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, it: usize, gap: Option<f64>, feasible: bool, q: Option<f64>) -> CampaignRow {
        CampaignRow {
            instance: id.into(),
            n_bin: 3,
            it,
            gap,
            feasible,
            optimal: gap.map(|g| feasible && g <= OPT_GAP),
            qubo_frac: q,
            runtime_s: 0.5,
        }
    }

    #[test]
    fn aggregate_means() {
        let rows = vec![
            row("a", 10, Some(0.0), true, Some(1.0)),
            row("b", 20, Some(0.5), true, Some(0.5)),
            row("c", 30, None, false, None),
        ];
        let a = Aggregate::of(&rows);
        assert_eq!(a.instances, 3);
        assert_eq!(a.mean_it, Some(20.0));
        assert_eq!(a.mean_gap, Some(0.25));
        assert!((a.feas_pct.unwrap() - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.opt_pct, Some(50.0));
        assert_eq!(a.mean_qubo_pct, Some(75.0));
    }

    #[test]
    fn empty_campaign() {
        let r = CampaignResult::new(Vec::new());
        assert_eq!(r.aggregate.instances, 0);
        assert_eq!(r.aggregate.feas_pct, None);
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn csv_layout() {
        let r = CampaignResult::new(vec![row("a", 10, Some(0.0), true, None)]);
        let csv = r.to_csv().unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[1], "a,3,10,0,true,true,,0.5");
        assert_eq!(lines[2], "aggregate,3,10,0,100,100,,0.5");
    }

    #[test]
    fn builders_are_seeded() {
        let a = bp_campaign(&[2, 3], 40, 4, 7).unwrap();
        let b = bp_campaign(&[2, 3], 40, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert_ne!(a[0].problem, a[1].problem);
        let m = misk_campaign(&[2], 3, MiskGroup::Two, 3, 1).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].problem.n_bin(), 2);
    }

    #[test]
    fn hash_tracks_the_spec() {
        let mut spec = CampaignSpec {
            config: AdmmConfig::default(),
            oracle: OracleSpec::default(),
            master_seed: 1,
            reference: true,
        };
        let h = spec.hash();
        assert_eq!(h.len(), 8);
        assert_eq!(h, spec.hash());
        spec.config.mu = 10.0;
        assert_ne!(h, spec.hash());
    }
}
