//! Command-line front end for the experiment pipeline: dataset
//! preprocessing, full experiment runs, and standalone checks of
//! serialized trust systems.

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use palisade::bits::Bitset;
use palisade::config::{Condition, ExperimentConfig, SweepPoint};
use palisade::experiment::{self, Summary};
use palisade::fbas::{self, Fbas, ThresholdMode};
use palisade::{Error, Result};

#[derive(Parser)]
#[command(
    name = "palisade",
    version,
    about = "Stake-weighted Sybil inference and quorum safety experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or reuse the cached walk-graph snapshot for a configuration.
    Preprocess(PreprocessArgs),
    /// Run the configured experiment or sweep and write its reports.
    Run(RunArgs),
    /// Safety and liveness verdicts for a serialized trust system.
    CheckFbas(CheckFbasArgs),
    /// Brute-force cross-check of the fixpoint verdicts on a small system.
    Oracle(OracleArgs),
}

/// Configuration source plus one override flag per config key. Values use
/// the same syntax as the file, so `--l-n 10,20,40` sets a sweep axis.
#[derive(Args)]
struct ConfigArgs {
    /// Configuration file of `key = value` lines; defaults apply without
    /// one, and flags override the file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge-list path or `synthetic:nodes=N,cycles=C`.
    #[arg(long)]
    dataset: Option<String>,
    /// Node sample taken before pruning; 0 keeps the whole graph.
    #[arg(long)]
    subsample: Option<String>,
    /// Minimum degree kept by the iterated core pruning.
    #[arg(long)]
    core_degree: Option<String>,
    /// Balance minted for every account of the base ledger.
    #[arg(long)]
    genesis_balance: Option<String>,
    /// benign, byzantine, or custom.
    #[arg(long)]
    condition: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// How many verifiers get a detailed per-verifier report row.
    #[arg(long)]
    verifier_sample: Option<String>,
    /// Walk-length multiplier in `ceil(m ln N)` steps.
    #[arg(long)]
    m: Option<String>,
    /// Logistic steepness multiplier in `k * N`.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    y_min: Option<String>,
    #[arg(long)]
    y_max: Option<String>,
    #[arg(long)]
    y_step: Option<String>,
    /// recompute or preserve.
    #[arg(long)]
    delete_mode: Option<String>,
    /// Fail the run when the post-deletion system is unsafe.
    #[arg(long)]
    require_safety: Option<String>,
    /// Fail the run when the residual honest set is no quorum.
    #[arg(long)]
    require_liveness: Option<String>,
    /// Custom-condition axis: Sybil node counts.
    #[arg(long)]
    n_s: Option<String>,
    /// Custom-condition axis: Sybil-internal stake budgets.
    #[arg(long)]
    l_s: Option<String>,
    /// Custom-condition axis: honest-to-Sybil stake budgets.
    #[arg(long)]
    l_n: Option<String>,
    /// Custom-condition axis: naive fractions.
    #[arg(long)]
    f_n: Option<String>,
    #[arg(long)]
    stake_per_link: Option<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("dataset", &self.dataset),
            ("subsample", &self.subsample),
            ("core_degree", &self.core_degree),
            ("genesis_balance", &self.genesis_balance),
            ("condition", &self.condition),
            ("repeats", &self.repeats),
            ("seed", &self.seed),
            ("verifier_sample", &self.verifier_sample),
            ("m", &self.m),
            ("k", &self.k),
            ("y_min", &self.y_min),
            ("y_max", &self.y_max),
            ("y_step", &self.y_step),
            ("delete_mode", &self.delete_mode),
            ("require_safety", &self.require_safety),
            ("require_liveness", &self.require_liveness),
            ("n_s", &self.n_s),
            ("l_s", &self.l_s),
            ("l_n", &self.l_n),
            ("f_n", &self.f_n),
            ("stake_per_link", &self.stake_per_link),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                cfg.set(key, value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct PreprocessArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory holding content-addressed walk snapshots.
    #[arg(long, default_value = "cache")]
    cache: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory holding content-addressed walk snapshots.
    #[arg(long, default_value = "cache")]
    cache: PathBuf,
    /// Directory the report files are written into.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
}

#[derive(Args)]
struct CheckFbasArgs {
    /// Trust-system file in the `fbas v1` text format.
    fbas: PathBuf,
    /// Comma-separated ill-behaved node ids; triggers the befouling
    /// cascade and deletes the resulting set before the safety check.
    #[arg(long)]
    bad: Option<String>,
    /// Threshold handling for the deletion: recompute or preserve.
    #[arg(long, default_value = "recompute")]
    delete_mode: String,
    /// Exit nonzero unless the checked system is safe.
    #[arg(long)]
    require_safe: bool,
    /// Exit nonzero unless the residual nodes form a quorum.
    #[arg(long)]
    require_live: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Trust-system file in the `fbas v1` text format; at most 16 nodes.
    fbas: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Preprocess(args) => preprocess(args),
        Command::Run(args) => run(args),
        Command::CheckFbas(args) => check_fbas(args),
        Command::Oracle(args) => oracle(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn preprocess(args: &PreprocessArgs) -> Result<ExitCode> {
    let cfg = args.config.load()?;
    let (walk, stats) = experiment::preprocess(&cfg, Some(&args.cache))?;
    println!("source: {}", stats.source);
    println!(
        "loaded {} nodes / {} arcs ({} self-loops, {} duplicates dropped)",
        stats.loaded_nodes, stats.loaded_arcs, stats.self_loops_dropped, stats.duplicates_dropped
    );
    println!(
        "mirrored {} arcs, subsampled to {} nodes, core kept {} nodes / {} arcs",
        stats.mirrored_arcs, stats.subsampled_nodes, stats.core_nodes, stats.core_arcs
    );
    println!(
        "walk graph: {} nodes / {} arcs, total stake {}",
        walk.node_count(),
        stats.walk_arcs,
        walk.grand_total()
    );
    println!("fingerprint: {}", stats.fingerprint);
    println!("cache hit: {}", stats.cache_hit);
    println!("snapshot: {}", args.cache.join(format!("{}.walk", stats.fingerprint)).display());
    Ok(ExitCode::SUCCESS)
}

fn describe(prefix: &str, s: &Summary) {
    println!(
        "{prefix}{}/{} repeats ok, cut-off mean {:.4} in [{:.2}, {:.2}], \
         all honest classified {}, worst Sybil share {:.4}, \
         live {}, safe {}, min quorum bound {}",
        s.completed,
        s.completed + s.failed,
        s.cutoff_mean,
        s.cutoff_min,
        s.cutoff_max,
        s.all_honest_classified,
        s.max_sybil_share,
        s.all_residual_live,
        s.all_safe,
        s.min_quorum_bound
    );
}

fn point_label(point: &Option<SweepPoint>) -> String {
    match point {
        Some(p) => format!("n_s={} l_s={} l_n={} f_n={}: ", p.n_s, p.l_s, p.l_n, p.f_n),
        None => String::new(),
    }
}

fn run(args: &RunArgs) -> Result<ExitCode> {
    let cfg = args.config.load()?;
    fs::create_dir_all(&args.out)?;
    let sweep_grid = cfg.condition == Condition::Custom && cfg.sweep_points().len() > 1;
    let mut failures = Vec::new();
    if sweep_grid {
        let sweep = experiment::run_sweep(&cfg, Some(&args.cache))?;
        for cell in &sweep.cells {
            describe(&point_label(&cell.point), &cell.summary);
            for f in experiment::requirement_failures(&cfg, &cell.summary) {
                failures.push(format!("{}{f}", point_label(&cell.point)));
            }
        }
        let json = args.out.join("sweep.json");
        fs::write(&json, experiment::report_json(&sweep)?)?;
        println!("wrote {}", json.display());
        let mut table = Vec::new();
        experiment::write_sweep_table(&sweep, &mut table)?;
        let tsv = args.out.join("sweep.tsv");
        fs::write(&tsv, table)?;
        println!("wrote {}", tsv.display());
    } else {
        let report = experiment::run_experiment(&cfg, Some(&args.cache))?;
        describe(&format!("condition {}: ", cfg.condition), &report.summary);
        failures = experiment::requirement_failures(&cfg, &report.summary);
        let json = args.out.join("report.json");
        fs::write(&json, experiment::report_json(&report)?)?;
        println!("wrote {}", json.display());
        let mut table = Vec::new();
        experiment::write_report_table(&report, &mut table)?;
        let tsv = args.out.join("report.tsv");
        fs::write(&tsv, table)?;
        println!("wrote {}", tsv.display());
    }
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &failures {
            eprintln!("requirement failed: {f}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn parse_mode(text: &str) -> Result<ThresholdMode> {
    match text {
        "recompute" => Ok(ThresholdMode::Recompute),
        "preserve" => Ok(ThresholdMode::Preserve),
        other => Err(Error::InvalidArgument(format!("delete_mode must be recompute or preserve, got {other:?}"))),
    }
}

fn parse_ids(text: &str, n: usize) -> Result<Bitset> {
    let mut set = Bitset::new(n);
    for part in text.split(',') {
        let id: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad node id {part:?}")))?;
        if id >= n {
            return Err(Error::InvalidArgument(format!("node id {id} outside the {n}-node system")));
        }
        set.insert(id);
    }
    Ok(set)
}

fn check_fbas(args: &CheckFbasArgs) -> Result<ExitCode> {
    let file = fs::File::open(&args.fbas)?;
    let fbas = Fbas::read_text(BufReader::new(file))?;
    let n = fbas.node_count();
    println!("system: {n} nodes");
    let mode = parse_mode(&args.delete_mode)?;
    let mut live = true;
    let checked = match &args.bad {
        Some(text) => {
            let bad = parse_ids(text, n)?;
            let result = fbas::determine_dset(&fbas, &bad);
            live = result.residual_live;
            println!(
                "dispensable set: {} of {n} nodes ({} befouled beyond the {} ill-behaved)",
                result.dset.count(),
                result.dset.count() - bad.count(),
                bad.count()
            );
            println!("residual liveness: {live}");
            fbas::delete_nodes(&fbas, &result.dset, mode).fbas
        }
        None => fbas,
    };
    let cert = fbas::determine_safety(&checked);
    println!(
        "safety: {} (min quorum bound {} of {} nodes, {} rounds)",
        cert.safe,
        cert.bounds.iter().min().copied().unwrap_or(0),
        checked.node_count(),
        cert.rounds
    );
    let failed = (args.require_safe && !cert.safe) || (args.require_live && !live);
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn oracle(args: &OracleArgs) -> Result<ExitCode> {
    let file = fs::File::open(&args.fbas)?;
    let fbas = Fbas::read_text(BufReader::new(file))?;
    let n = fbas.node_count();
    let cert = fbas::determine_safety(&fbas);
    let mut violations = 0;
    for v in 0..n as u32 {
        let bound = cert.bounds[v as usize];
        match fbas::brute_force_min_quorum(&fbas, v)? {
            Some(q) => {
                let ok = bound <= q.count();
                if !ok {
                    violations += 1;
                }
                println!(
                    "node {v}: bound {bound} vs minimal quorum {} -> {}",
                    q.count(),
                    if ok { "sound" } else { "VIOLATION" }
                );
            }
            None => println!("node {v}: bound {bound}, no quorum contains the node"),
        }
    }
    let brute_safe = fbas::brute_force_quorum_intersection(&fbas)?;
    let false_safe = cert.safe && !brute_safe;
    if false_safe {
        violations += 1;
    }
    println!(
        "quorum intersection: fixpoint {} vs brute force {} -> {}",
        cert.safe,
        brute_safe,
        if false_safe { "VIOLATION" } else { "consistent" }
    );
    if violations == 0 {
        println!("oracle agrees on all {n} nodes");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{violations} violations");
        Ok(ExitCode::FAILURE)
    }
}
