//! The experiment harness: preprocessing with a content-addressed cache,
//! repeated attack/inference/analysis rounds, sweep grids, and reports.
//!
//! Every run is reproducible from its config: repeat `i` derives its seed
//! as `seed + 1 + i` (wrapping) and preprocessing subsamples with `seed`
//! itself. Reports compare byte-for-byte across identical runs once their
//! wall-clock timings are zeroed through [`canonical_json`].

use std::fs;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::attack::{self, AttackParams};
use crate::bits::Bitset;
use crate::config::{Condition, DatasetSpec, ExperimentConfig, SweepPoint};
use crate::error::{Error, Result};
use crate::fbas::{delete_nodes, determine_dset, determine_safety, Fbas};
use crate::graph::{self, DirectedGraph, LoadStats, NodeId};
use crate::ledger::SecurityState;
use crate::walk::{honesty_scores_batch, select_cutoff, WalkGraph};

/// Verifiers whose walks are propagated through one shared arc sweep.
const INFERENCE_BATCH: usize = 8;

/// Human-readable statement of the seed derivation, echoed into reports.
pub const SEED_RULE: &str =
    "repeat i uses seed + 1 + i (wrapping); preprocessing subsamples with seed";

/// Seed for repeat `index` of a run configured with `base`.
pub fn repeat_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64).wrapping_add(1)
}

/// Counters describing what preprocessing did to the raw dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessStats {
    pub source: String,
    /// Content hash of everything that determines the walk graph; the
    /// cache file name.
    pub fingerprint: String,
    pub loaded_nodes: usize,
    pub loaded_arcs: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
    /// Reverse arcs added to make every link mutual.
    pub mirrored_arcs: usize,
    pub subsampled_nodes: usize,
    pub core_nodes: usize,
    pub core_arcs: usize,
    pub walk_nodes: usize,
    pub walk_arcs: usize,
    pub cache_hit: bool,
}

fn fingerprint(cfg: &ExperimentConfig) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "preprocess v1\ndataset = {}\nsubsample = {}\ncore_degree = {}\nseed = {}\n",
        cfg.dataset, cfg.subsample, cfg.core_degree, cfg.seed
    ));
    let digest = h.finalize();
    let mut out = String::with_capacity(digest.len() * 2);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn cache_paths(dir: &Path, fp: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{fp}.walk")), dir.join(format!("{fp}.stats.json")))
}

fn read_cache(dir: &Path, fp: &str) -> Option<(WalkGraph, PreprocessStats)> {
    let (walk_path, stats_path) = cache_paths(dir, fp);
    let file = fs::File::open(walk_path).ok()?;
    let walk = WalkGraph::read_snapshot(BufReader::new(file)).ok()?;
    let stats: PreprocessStats =
        serde_json::from_str(&fs::read_to_string(stats_path).ok()?).ok()?;
    Some((walk, PreprocessStats { cache_hit: true, ..stats }))
}

/// Adds the reverse of every arc that lacks one, carrying the forward
/// stake over, so that the whole graph survives reciprocity pruning.
fn mirror_arcs(g: &DirectedGraph) -> (DirectedGraph, usize) {
    let mut out = g.clone();
    let mut added = 0;
    for tail in g.nodes() {
        for &(head, stake) in g.out(tail) {
            if out.insert_arc(head, tail, stake) {
                added += 1;
            }
        }
    }
    (out, added)
}

/// Turns the configured dataset into the walk graph the experiment runs
/// on: load or synthesize, mirror into mutual links, optionally subsample,
/// keep the core of minimum degree `core_degree`, commit unit stakes, and
/// project out the walk graph. With a cache directory, the result is
/// reused whenever the config fields feeding this pipeline are unchanged.
pub fn preprocess(
    cfg: &ExperimentConfig,
    cache_dir: Option<&Path>,
) -> Result<(WalkGraph, PreprocessStats)> {
    let fp = fingerprint(cfg);
    if let Some(dir) = cache_dir {
        if let Some(hit) = read_cache(dir, &fp) {
            return Ok(hit);
        }
    }

    let (loaded, load) = match &cfg.dataset {
        DatasetSpec::Path(path) => {
            let file = fs::File::open(path)?;
            graph::load_edge_list(BufReader::new(file), 1)?
        }
        DatasetSpec::Synthetic { nodes, cycles } => {
            let g = graph::synthetic_social_graph(*nodes, *cycles, cfg.seed)?;
            let stats = LoadStats {
                nodes: g.node_count(),
                arcs: g.arc_count(),
                ..LoadStats::default()
            };
            (g, stats)
        }
    };

    let (mirrored, added) = mirror_arcs(&loaded);
    let sampled = if cfg.subsample > 0 && cfg.subsample < mirrored.node_count() {
        mirrored.subsample_nodes(cfg.subsample, cfg.seed)?
    } else {
        mirrored
    };
    let core = sampled.k_core_prune(cfg.core_degree);
    if core.node_count() == 0 {
        return Err(Error::arg(format!(
            "no nodes of degree {} or more survive core pruning",
            cfg.core_degree
        )));
    }
    let state = SecurityState::from_graph(&core, cfg.genesis_balance)?;
    let walk = state.to_walk_graph();
    if walk.node_count() == 0 {
        return Err(Error::arg("no mutual links survive preprocessing"));
    }

    let stats = PreprocessStats {
        source: cfg.dataset.to_string(),
        fingerprint: fp.clone(),
        loaded_nodes: load.nodes,
        loaded_arcs: load.arcs,
        self_loops_dropped: load.self_loops_dropped,
        duplicates_dropped: load.duplicates_dropped,
        mirrored_arcs: added,
        subsampled_nodes: sampled.node_count(),
        core_nodes: core.node_count(),
        core_arcs: core.arc_count(),
        walk_nodes: walk.node_count(),
        walk_arcs: (0..walk.node_count()).map(|i| walk.out(i as u32).len()).sum(),
        cache_hit: false,
    };

    if let Some(dir) = cache_dir {
        fs::create_dir_all(dir)?;
        let (walk_path, stats_path) = cache_paths(dir, &fp);
        let mut buf = Vec::new();
        walk.write_snapshot(&mut buf)?;
        fs::write(walk_path, buf)?;
        fs::write(stats_path, to_json(&stats)?)?;
    }
    Ok((walk, stats))
}

/// Rebuilds a ledger whose accounts are the walk nodes themselves, with
/// every walk link committed as a mutual stake link. Walk ids become
/// account ids; the original dataset labels survive only in the
/// preprocessing stats.
pub fn state_from_walk(walk: &WalkGraph, genesis_balance: u64) -> Result<SecurityState> {
    let n = walk.node_count();
    let mut arcs = Vec::new();
    for tail in 0..n as u32 {
        for &(head, stake) in walk.out(tail) {
            arcs.push((NodeId(tail), NodeId(head), stake));
        }
    }
    let g = DirectedGraph::from_arcs(n, arcs)?;
    SecurityState::from_graph(&g, genesis_balance)
}

/// Wall-clock milliseconds per pipeline stage of one repeat.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTimings {
    pub inject_ms: u64,
    pub walk_ms: u64,
    pub inference_ms: u64,
    pub analysis_ms: u64,
    pub total_ms: u64,
}

/// Detailed numbers for one sampled verifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierRow {
    /// Node id in the walk graph of this repeat.
    pub verifier: u32,
    /// The verifier's account id in the ledger.
    pub account: u32,
    pub cutoff: f64,
    pub honest_set_size: usize,
    /// Ground-truth honest nodes the verifier accepted.
    pub honest_accepted: usize,
    /// Ground-truth Sybils the verifier accepted.
    pub sybils_accepted: usize,
    /// Sybil fraction of the accepted set.
    pub sybil_share: f64,
}

/// Everything measured in one attack/inference/analysis round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatReport {
    pub index: usize,
    pub seed: u64,
    pub attack: AttackParams,
    pub walk_nodes: usize,
    pub walk_arcs: usize,
    /// Injected identities that made it into the walk graph.
    pub sybils_in_walk: usize,
    pub minted: u64,
    /// Cut-off statistics over every honest verifier, not just the sample.
    pub cutoff_min: f64,
    pub cutoff_max: f64,
    pub cutoff_mean: f64,
    /// Whether every honest verifier accepted every honest node.
    pub all_honest_classified: bool,
    /// Worst Sybil fraction any honest verifier accepted.
    pub max_sybil_share: f64,
    pub dset_size: usize,
    /// Honest nodes dragged into the dispensable set beyond the Sybils.
    pub extra_befouled: usize,
    /// Whether the nodes outside the dispensable set still form a quorum.
    pub residual_live: bool,
    /// Whether the post-deletion system has pairwise intersecting quorums.
    pub safe: bool,
    /// Smallest certified quorum-size bound after deletion.
    pub min_quorum_bound: usize,
    pub safety_rounds: u32,
    pub verifiers: Vec<VerifierRow>,
    pub timings: StageTimings,
}

/// One repeat either completes with a report or records why it failed;
/// later repeats run regardless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepeatOutcome {
    Completed(Box<RepeatReport>),
    Failed { index: usize, error: String },
}

/// Aggregates over the completed repeats of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub completed: usize,
    pub failed: usize,
    pub cutoff_mean: f64,
    pub cutoff_min: f64,
    pub cutoff_max: f64,
    pub all_honest_classified: bool,
    pub max_sybil_share: f64,
    pub all_residual_live: bool,
    pub all_safe: bool,
    pub min_quorum_bound: usize,
    pub max_repeat_ms: u64,
}

/// Full record of one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Canonical echo of the config that produced this report.
    pub config: String,
    pub seed_rule: String,
    pub preprocess: PreprocessStats,
    pub repeats: Vec<RepeatOutcome>,
    pub summary: Summary,
}

/// One cell of a sweep: the grid point and the run executed at it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    /// The grid point, absent under preset conditions.
    pub point: Option<SweepPoint>,
    pub repeats: Vec<RepeatOutcome>,
    pub summary: Summary,
}

/// Full record of a sweep over the custom-attack grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: String,
    pub seed_rule: String,
    pub preprocess: PreprocessStats,
    pub cells: Vec<SweepCell>,
}

struct VerifierInference {
    verifier: u32,
    cutoff: f64,
    size: usize,
    honest_accepted: usize,
    sybils_accepted: usize,
    row: Bitset,
}

fn millis(since: Instant) -> u64 {
    since.elapsed().as_millis() as u64
}

fn attack_params_for(
    cfg: &ExperimentConfig,
    base: &SecurityState,
    point: Option<&SweepPoint>,
    seed: u64,
) -> Result<AttackParams> {
    Ok(match cfg.condition {
        Condition::Benign => attack::benign_params(seed),
        Condition::Byzantine => attack::byzantine_params(base, seed),
        Condition::Custom => {
            let p = point.ok_or_else(|| Error::arg("custom condition needs a grid point"))?;
            AttackParams {
                n_s: p.n_s,
                l_s: p.l_s,
                l_n: p.l_n,
                f_n: p.f_n,
                stake_per_link: cfg.stake_per_link,
                seed,
            }
        }
    })
}

fn run_one_repeat(
    cfg: &ExperimentConfig,
    base: &SecurityState,
    point: Option<&SweepPoint>,
    index: usize,
) -> Result<RepeatReport> {
    let started = Instant::now();
    let seed = repeat_seed(cfg.seed, index);
    let params = attack_params_for(cfg, base, point, seed)?;

    let stage = Instant::now();
    let out = attack::inject_attack(base, &params)?;
    let inject_ms = millis(stage);

    let stage = Instant::now();
    let walk = out.state.to_walk_graph();
    let tm = walk.transition_matrix();
    let walk_ms = millis(stage);

    let n_w = walk.node_count();
    let pre_nodes = base.node_count() as u32;
    let mut sybil_mask = Bitset::new(n_w);
    for v in 0..n_w {
        if walk.origin_of(v as u32).0 >= pre_nodes {
            sybil_mask.insert(v);
        }
    }
    let honest_mask = sybil_mask.complement();
    let honest_total = honest_mask.count();
    if honest_total == 0 {
        return Err(Error::arg("no honest nodes survive in the walk graph"));
    }
    let honest_ids: Vec<u32> = honest_mask.iter().map(|i| i as u32).collect();

    let stage = Instant::now();
    let cutoff_params = cfg.cutoff();
    let per: Vec<VerifierInference> = honest_ids
        .par_chunks(INFERENCE_BATCH)
        .map(|chunk| -> Result<Vec<VerifierInference>> {
            honesty_scores_batch(&walk, &tm, chunk, &cutoff_params)?
                .into_iter()
                .map(|scores| {
                    let cutoff = select_cutoff(&walk, &scores, &cutoff_params)?;
                    let mut row = Bitset::new(n_w);
                    for (j, &s) in scores.scores.iter().enumerate() {
                        if s >= cutoff {
                            row.insert(j);
                        }
                    }
                    Ok(VerifierInference {
                        verifier: scores.verifier,
                        cutoff,
                        size: row.count(),
                        honest_accepted: row.intersection_count(&honest_mask),
                        sybils_accepted: row.intersection_count(&sybil_mask),
                        row,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let inference_ms = millis(stage);

    let mut cutoff_min = f64::INFINITY;
    let mut cutoff_max = f64::NEG_INFINITY;
    let mut cutoff_sum = 0.0;
    let mut all_honest_classified = true;
    let mut max_sybil_share = 0.0f64;
    for v in &per {
        cutoff_min = cutoff_min.min(v.cutoff);
        cutoff_max = cutoff_max.max(v.cutoff);
        cutoff_sum += v.cutoff;
        all_honest_classified &= v.honest_accepted == honest_total;
        max_sybil_share = max_sybil_share.max(v.sybils_accepted as f64 / v.size as f64);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut pool: Vec<usize> = (0..per.len()).collect();
    let sample = cfg.verifier_sample.min(per.len());
    let (chosen, _) = pool.partial_shuffle(&mut rng, sample);
    let mut chosen = chosen.to_vec();
    chosen.sort_unstable();
    let verifiers: Vec<VerifierRow> = chosen
        .into_iter()
        .map(|idx| {
            let v = &per[idx];
            VerifierRow {
                verifier: v.verifier,
                account: walk.origin_of(v.verifier).0,
                cutoff: v.cutoff,
                honest_set_size: v.size,
                honest_accepted: v.honest_accepted,
                sybils_accepted: v.sybils_accepted,
                sybil_share: v.sybils_accepted as f64 / v.size as f64,
            }
        })
        .collect();

    let inferred = per.len();
    let stage = Instant::now();
    let mut trust: Vec<Bitset> = vec![Bitset::new(n_w); n_w];
    for i in sybil_mask.iter() {
        trust[i] = sybil_mask.clone();
    }
    for v in per {
        trust[v.verifier as usize] = v.row;
    }
    let fbas = Fbas::from_trust(trust)?;
    let ds = determine_dset(&fbas, &sybil_mask);
    let deleted = delete_nodes(&fbas, &ds.dset, cfg.delete_mode);
    let cert = determine_safety(&deleted.fbas);
    let analysis_ms = millis(stage);

    Ok(RepeatReport {
        index,
        seed,
        attack: params,
        walk_nodes: n_w,
        walk_arcs: (0..n_w).map(|i| walk.out(i as u32).len()).sum(),
        sybils_in_walk: sybil_mask.count(),
        minted: out.minted,
        cutoff_min,
        cutoff_max,
        cutoff_mean: cutoff_sum / inferred as f64,
        all_honest_classified,
        max_sybil_share,
        dset_size: ds.dset.count(),
        extra_befouled: ds.dset.count() - sybil_mask.count(),
        residual_live: ds.residual_live,
        safe: cert.safe,
        min_quorum_bound: cert.bounds.iter().copied().min().unwrap_or(0),
        safety_rounds: cert.rounds,
        verifiers,
        timings: StageTimings {
            inject_ms,
            walk_ms,
            inference_ms,
            analysis_ms,
            total_ms: millis(started),
        },
    })
}

fn run_repeats(
    cfg: &ExperimentConfig,
    base: &SecurityState,
    point: Option<&SweepPoint>,
) -> (Vec<RepeatOutcome>, Summary) {
    let outcomes: Vec<RepeatOutcome> = (0..cfg.repeats)
        .map(|index| match run_one_repeat(cfg, base, point, index) {
            Ok(report) => RepeatOutcome::Completed(Box::new(report)),
            Err(e) => RepeatOutcome::Failed { index, error: e.to_string() },
        })
        .collect();
    let summary = summarize(&outcomes);
    (outcomes, summary)
}

fn summarize(outcomes: &[RepeatOutcome]) -> Summary {
    let mut s = Summary {
        completed: 0,
        failed: 0,
        cutoff_mean: 0.0,
        cutoff_min: 0.0,
        cutoff_max: 0.0,
        all_honest_classified: true,
        max_sybil_share: 0.0,
        all_residual_live: true,
        all_safe: true,
        min_quorum_bound: 0,
        max_repeat_ms: 0,
    };
    let mut mean_sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut bound = usize::MAX;
    for outcome in outcomes {
        match outcome {
            RepeatOutcome::Completed(r) => {
                s.completed += 1;
                mean_sum += r.cutoff_mean;
                min = min.min(r.cutoff_min);
                max = max.max(r.cutoff_max);
                s.all_honest_classified &= r.all_honest_classified;
                s.max_sybil_share = s.max_sybil_share.max(r.max_sybil_share);
                s.all_residual_live &= r.residual_live;
                s.all_safe &= r.safe;
                bound = bound.min(r.min_quorum_bound);
                s.max_repeat_ms = s.max_repeat_ms.max(r.timings.total_ms);
            }
            RepeatOutcome::Failed { .. } => s.failed += 1,
        }
    }
    if s.completed > 0 {
        s.cutoff_mean = mean_sum / s.completed as f64;
        s.cutoff_min = min;
        s.cutoff_max = max;
        s.min_quorum_bound = bound;
    }
    s
}

/// Runs the configured experiment at a single grid point. Custom configs
/// whose axes span more than one point belong to [`run_sweep`].
pub fn run_experiment(
    cfg: &ExperimentConfig,
    cache_dir: Option<&Path>,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let point = match cfg.condition {
        Condition::Custom => {
            let points = cfg.sweep_points();
            if points.len() != 1 {
                return Err(Error::arg(format!(
                    "config spans {} grid points; run it as a sweep",
                    points.len()
                )));
            }
            Some(points[0])
        }
        _ => None,
    };
    let (walk, preprocess_stats) = preprocess(cfg, cache_dir)?;
    let base = state_from_walk(&walk, cfg.genesis_balance)?;
    let (repeats, summary) = run_repeats(cfg, &base, point.as_ref());
    Ok(ExperimentReport {
        config: cfg.to_text(),
        seed_rule: SEED_RULE.to_string(),
        preprocess: preprocess_stats,
        repeats,
        summary,
    })
}

/// Runs the experiment once per point of the custom-attack grid, sharing
/// one preprocessed base. Preset conditions produce a single cell.
pub fn run_sweep(cfg: &ExperimentConfig, cache_dir: Option<&Path>) -> Result<SweepReport> {
    cfg.validate()?;
    let (walk, preprocess_stats) = preprocess(cfg, cache_dir)?;
    let base = state_from_walk(&walk, cfg.genesis_balance)?;
    let cells = match cfg.condition {
        Condition::Custom => cfg
            .sweep_points()
            .into_iter()
            .map(|point| {
                let (repeats, summary) = run_repeats(cfg, &base, Some(&point));
                SweepCell { point: Some(point), repeats, summary }
            })
            .collect(),
        _ => {
            let (repeats, summary) = run_repeats(cfg, &base, None);
            vec![SweepCell { point: None, repeats, summary }]
        }
    };
    Ok(SweepReport {
        config: cfg.to_text(),
        seed_rule: SEED_RULE.to_string(),
        preprocess: preprocess_stats,
        cells,
    })
}

/// Requirement violations that should fail the run, per the config's
/// `require_safety` and `require_liveness` switches. Empty means pass.
pub fn requirement_failures(cfg: &ExperimentConfig, summary: &Summary) -> Vec<String> {
    let mut failures = Vec::new();
    if summary.failed > 0 {
        failures.push(format!("{} of {} repeats failed", summary.failed, cfg.repeats));
    }
    if cfg.require_liveness && !summary.all_residual_live {
        failures.push("residual honest set fails to form a quorum".to_string());
    }
    if cfg.require_safety && !summary.all_safe {
        failures.push("post-deletion system is not certifiably safe".to_string());
    }
    failures
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::arg(format!("report serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Pretty JSON for any report type.
pub fn report_json<T: Serialize>(value: &T) -> Result<String> {
    to_json(value)
}

/// Pretty JSON with every wall-clock field zeroed, so identical runs
/// produce byte-identical text.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)
        .map_err(|e| Error::arg(format!("report serialization failed: {e}")))?;
    scrub_timings(&mut v);
    let mut text = serde_json::to_string_pretty(&v)
        .map_err(|e| Error::arg(format!("report serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn scrub_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (key, val) in map.iter_mut() {
                if key == "timings" {
                    if let Value::Object(fields) = val {
                        for field in fields.values_mut() {
                            *field = Value::from(0u64);
                        }
                    }
                } else if key == "max_repeat_ms" {
                    *val = Value::from(0u64);
                } else {
                    scrub_timings(val);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(scrub_timings),
        _ => {}
    }
}

const TABLE_HEADER: &str = "repeat\tseed\tverifier\taccount\tcutoff\thonest_set\t\
honest_accepted\tsybils_accepted\tsybil_share\tdset\tresidual_live\tsafe\tmin_quorum_bound";

fn write_repeat_rows<W: io::Write>(
    prefix: &str,
    repeats: &[RepeatOutcome],
    w: &mut W,
) -> io::Result<()> {
    for outcome in repeats {
        let RepeatOutcome::Completed(r) = outcome else { continue };
        for row in &r.verifiers {
            writeln!(
                w,
                "{prefix}{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.index,
                r.seed,
                row.verifier,
                row.account,
                row.cutoff,
                row.honest_set_size,
                row.honest_accepted,
                row.sybils_accepted,
                row.sybil_share,
                r.dset_size,
                r.residual_live,
                r.safe,
                r.min_quorum_bound,
            )?;
        }
    }
    Ok(())
}

/// Tab-separated table of the sampled verifiers, one row per repeat and
/// verifier.
pub fn write_report_table<W: io::Write>(
    report: &ExperimentReport,
    w: &mut W,
) -> io::Result<()> {
    writeln!(w, "{TABLE_HEADER}")?;
    write_repeat_rows("", &report.repeats, w)
}

/// Tab-separated table of a sweep, with the grid point leading each row.
pub fn write_sweep_table<W: io::Write>(sweep: &SweepReport, w: &mut W) -> io::Result<()> {
    writeln!(w, "n_s\tl_s\tl_n\tf_n\t{TABLE_HEADER}")?;
    for cell in &sweep.cells {
        let prefix = match &cell.point {
            Some(p) => format!("{}\t{}\t{}\t{}\t", p.n_s, p.l_s, p.l_n, p.f_n),
            None => "-\t-\t-\t-\t".to_string(),
        };
        write_repeat_rows(&prefix, &cell.repeats, w)?;
    }
    Ok(())
}
