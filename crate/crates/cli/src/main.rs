use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use mbo_admm::admm::{self, diagnose, write_trace_csv, AdmmConfig, BetaRule};
use mbo_admm::campaign::{
    bp_campaign, misk_campaign, run_campaign, write_campaign, CampaignInstance, CampaignSpec, OracleKind, OracleSpec,
};
use mbo_admm::oracle::{NoiseSchedule, SaParams, EXACT_MAX_BITS};
use mbo_admm::problem::{read_problem, write_problem};
use mbo_admm::qp::InteriorPoint;
use mbo_admm::zoo::{self, gen_bp, gen_misk, read_scholl, write_scholl, MiskGroup};
use mbo_admm::BlockMode;

#[derive(Parser)]
#[command(name = "mbo-admm", version, about = "ADMM heuristics for mixed-binary optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance given as problem JSON.
    Solve(SolveArgs),
    /// Write a generated or built-in instance.
    Gen(GenArgs),
    /// Bin packing campaign on generated or Scholl-format instances.
    BenchBp(BenchBpArgs),
    /// Setup knapsack campaign on generated instances.
    BenchMisk(BenchMiskArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Exact,
    Sa,
    Noisy,
}

impl From<OracleArg> for OracleKind {
    fn from(o: OracleArg) -> Self {
        match o {
            OracleArg::Exact => OracleKind::Exact,
            OracleArg::Sa => OracleKind::Sa,
            OracleArg::Noisy => OracleKind::Noisy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BetaRuleArg {
    Relaxed,
    Slack,
}

fn parse_blocks(s: &str) -> Result<BlockMode, String> {
    match s {
        "2" => Ok(BlockMode::TwoBlock),
        "3" => Ok(BlockMode::ThreeBlock),
        _ => Err(format!("blocks must be 2 or 3, got {s}")),
    }
}

fn parse_group(s: &str) -> Result<MiskGroup, String> {
    let g: u8 = s.parse().map_err(|_| format!("group must be 1 or 2, got {s}"))?;
    MiskGroup::try_from(g).map_err(|e| e.to_string())
}

#[derive(Args, Clone)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "exact")]
    oracle: OracleArg,
    /// Initial bit-flip probability of the noisy oracle.
    #[arg(long, default_value_t = 0.5)]
    noise_p0: f64,
    #[arg(long, default_value_t = 1000)]
    sa_sweeps: usize,
    #[arg(long, default_value_t = 8)]
    sa_restarts: usize,
}

impl OracleArgs {
    fn spec(&self) -> OracleSpec {
        OracleSpec {
            kind: self.oracle.into(),
            sa: SaParams {
                sweeps: self.sa_sweeps,
                restarts: self.sa_restarts,
                ..SaParams::default()
            },
            noise: NoiseSchedule { p0: self.noise_p0 },
            local_search: false,
        }
    }
}

#[derive(Args, Clone)]
struct AdmmArgs {
    #[arg(long, default_value_t = 1e4)]
    rho_init: f64,
    #[arg(long, default_value_t = 1.1)]
    rho_growth: f64,
    #[arg(long, default_value_t = 1e7)]
    rho_cap: f64,
    /// Keep rho at its initial value.
    #[arg(long)]
    rho_fixed: bool,
    #[arg(long, default_value_t = 1e3)]
    beta: f64,
    /// Keep beta at its initial value.
    #[arg(long)]
    beta_fixed: bool,
    #[arg(long, value_enum, default_value = "relaxed")]
    beta_rule: BetaRuleArg,
    #[arg(long, default_value_t = 1e5)]
    c: f64,
    #[arg(long, default_value_t = 1e3)]
    mu: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Re-solve the continuous part with the returned binaries fixed.
    #[arg(long)]
    polish: bool,
    /// Record how often the oracle answer is an exact QUBO minimizer.
    #[arg(long)]
    track_qubo: bool,
}

impl AdmmArgs {
    fn config(&self, mode: BlockMode) -> AdmmConfig {
        AdmmConfig {
            mode,
            rho_init: self.rho_init,
            rho_growth: self.rho_growth,
            rho_cap: self.rho_cap,
            rho_fixed: self.rho_fixed,
            beta_init: self.beta,
            beta_fixed: self.beta_fixed,
            beta_rule: match self.beta_rule {
                BetaRuleArg::Relaxed => BetaRule::Relaxed,
                BetaRuleArg::Slack => BetaRule::Slack,
            },
            c: self.c,
            mu: self.mu,
            eps: self.eps,
            max_iter: self.max_iter,
            time_limit: self.time_limit,
            seed: self.seed,
            polish: self.polish,
            track_qubo_optimality: self.track_qubo,
            ..AdmmConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Problem JSON file.
    instance: PathBuf,
    #[arg(long, default_value = "3", value_parser = parse_blocks)]
    blocks: BlockMode,
    #[command(flatten)]
    oracle: OracleArgs,
    #[command(flatten)]
    admm: AdmmArgs,
    /// Per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum BpFormat {
    /// Problem JSON, ready for `solve`.
    Problem,
    /// Instance fields as JSON.
    Instance,
    Scholl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    LinearVsSquare,
    LinearVsSquareBounded,
    TwoBitCover,
    ThreeBitCover,
    ThreeBitCoverB2,
    ThreeBitCoverEq,
    MixedCover,
}

#[derive(Subcommand)]
enum GenKind {
    Bp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 40)]
        cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "problem")]
        format: BpFormat,
        #[arg(long)]
        out: PathBuf,
    },
    Misk {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        t: usize,
        #[arg(long, value_parser = parse_group)]
        group: MiskGroup,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the instance fields instead of the problem JSON.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Small built-in problems.
    Builtin {
        #[arg(value_enum)]
        name: Builtin,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BenchCommon {
    /// Comma-separated block counts to run.
    #[arg(long, default_value = "3", value_delimiter = ',', value_parser = parse_blocks)]
    blocks: Vec<BlockMode>,
    #[command(flatten)]
    oracle: OracleArgs,
    #[command(flatten)]
    admm: AdmmArgs,
    /// Skip exact reference values.
    #[arg(long)]
    no_reference: bool,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchBpArgs {
    /// Item counts of generated instances.
    #[arg(long, default_value = "2,3,4", value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 40)]
    cap: u64,
    /// Generated instances per item count.
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// Scholl-format files; replaces generation when given.
    #[arg(long = "scholl")]
    scholl: Vec<PathBuf>,
    /// Rebalance each oracle answer with pairwise differencing.
    #[arg(long)]
    local_search: bool,
    #[command(flatten)]
    common: BenchCommon,
}

#[derive(Args)]
struct BenchMiskArgs {
    #[arg(long, default_value = "5,8,11,14", value_delimiter = ',')]
    ks: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    t: usize,
    #[arg(long, value_parser = parse_group)]
    group: MiskGroup,
    /// Instances per family count.
    #[arg(long, default_value_t = 3)]
    instances: usize,
    #[command(flatten)]
    common: BenchCommon,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Gen(a) => generate(a),
        Command::BenchBp(a) => bench_bp(a),
        Command::BenchMisk(a) => bench_misk(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn solve(a: SolveArgs) -> Result<()> {
    let p = read_problem(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
    let cfg = a.admm.config(a.blocks);
    let spec = a.oracle.spec();
    if spec.kind != OracleKind::Sa && p.n_bin() > EXACT_MAX_BITS {
        bail!(
            "{} binaries exceed the exact oracle limit of {EXACT_MAX_BITS}; use --oracle sa",
            p.n_bin()
        );
    }
    for d in diagnose(&p, &cfg).warnings() {
        warn!("{}", d.message());
    }
    let oracle = spec.build()?;
    let report = admm::solve(&p, &cfg, oracle.as_ref(), &InteriorPoint::default())?;
    if let Some(path) = &a.trace {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace_csv(BufWriter::new(f), &report.trace)?;
    }
    if let Some(path) = &a.out {
        fs::write(path, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let feasible = p.is_feasible(&report.best_point, mbo_admm::campaign::FEAS_TOL);
    println!(
        "best x = {:?} u = {:?} objective {} merit {} (iteration {} of {}, {:?}, feasible {feasible})",
        report.best_point.x,
        report.best_point.u,
        report.best_objective,
        report.best_merit,
        report.best_iteration,
        report.iterations,
        report.termination_reason
    );
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

fn generate(a: GenArgs) -> Result<()> {
    match a.kind {
        GenKind::Bp {
            n,
            cap,
            seed,
            format,
            out,
        } => {
            let inst = gen_bp(n, cap, seed)?;
            match format {
                BpFormat::Problem => write_problem(&out, &zoo::bp_to_mbo(&inst)?.0)?,
                BpFormat::Instance => write_json(&out, &inst)?,
                BpFormat::Scholl => write_scholl(&out, &inst)?,
            }
        }
        GenKind::Misk {
            k,
            t,
            group,
            seed,
            raw,
            out,
        } => {
            let inst = gen_misk(k, t, group, seed)?;
            if raw {
                write_json(&out, &inst)?;
            } else {
                write_problem(&out, &zoo::misk_to_mbo(&inst)?.0)?;
            }
        }
        GenKind::Builtin { name, out } => {
            use zoo::toy;
            let p = match name {
                Builtin::LinearVsSquare => toy::linear_vs_square(None),
                Builtin::LinearVsSquareBounded => toy::linear_vs_square(Some(0.5)),
                Builtin::TwoBitCover => toy::two_bit_cover(),
                Builtin::ThreeBitCover => toy::three_bit_cover(1.0),
                Builtin::ThreeBitCoverB2 => toy::three_bit_cover(2.0),
                Builtin::ThreeBitCoverEq => toy::three_bit_cover_with_equality(),
                Builtin::MixedCover => toy::mixed_cover(),
            };
            write_problem(&out, &p)?;
        }
    }
    Ok(())
}

fn mode_tag(mode: BlockMode) -> &'static str {
    match mode {
        BlockMode::TwoBlock => "2block",
        BlockMode::ThreeBlock => "3block",
    }
}

fn run_bench(name: &str, instances: &[CampaignInstance], oracle: OracleSpec, common: &BenchCommon) -> Result<()> {
    if oracle.kind != OracleKind::Sa {
        if let Some(big) = instances.iter().find(|i| i.problem.n_bin() > EXACT_MAX_BITS) {
            bail!(
                "{} has {} binaries, above the exact oracle limit of {EXACT_MAX_BITS}; use --oracle sa",
                big.id,
                big.problem.n_bin()
            );
        }
    }
    fs::create_dir_all(&common.out_dir).with_context(|| format!("creating {}", common.out_dir.display()))?;
    let qp = InteriorPoint::default();
    for &mode in &common.blocks {
        let spec = CampaignSpec {
            config: common.admm.config(mode),
            oracle,
            master_seed: common.admm.seed,
            reference: !common.no_reference,
        };
        let label = format!("{name}-{}", mode_tag(mode));
        info!("{label}: {} instances", instances.len());
        let outcome = run_campaign(instances, &spec, &qp)?;
        let files = write_campaign(&common.out_dir, &label, &spec, &outcome)?;
        println!("{label}");
        print!("{}", outcome.result.table());
        println!("wrote {}", files.csv.display());
    }
    Ok(())
}

fn bench_bp(a: BenchBpArgs) -> Result<()> {
    let instances = if a.scholl.is_empty() {
        bp_campaign(&a.sizes, a.cap, a.instances, a.common.admm.seed)?
    } else {
        let mut v = Vec::with_capacity(a.scholl.len());
        for path in &a.scholl {
            let file = read_scholl(path).with_context(|| format!("reading {}", path.display()))?;
            for w in &file.warnings {
                warn!("{}: {w}", path.display());
            }
            let id = path.file_stem().map_or_else(|| "scholl".into(), |s| s.to_string_lossy().into_owned());
            v.push(CampaignInstance::from_bp(id, file.instance)?);
        }
        v
    };
    let mut oracle = a.common.oracle.spec();
    oracle.local_search = a.local_search;
    run_bench("bp", &instances, oracle, &a.common)
}

fn bench_misk(a: BenchMiskArgs) -> Result<()> {
    let instances = misk_campaign(&a.ks, a.t, a.group, a.instances, a.common.admm.seed)?;
    let g = match a.group {
        MiskGroup::One => 1,
        MiskGroup::Two => 2,
    };
    run_bench(&format!("misk-g{g}"), &instances, a.common.oracle.spec(), &a.common)
}
