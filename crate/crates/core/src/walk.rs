//! Random-walk honesty inference over reciprocal stake graphs.
//!
//! The walk moves along mutual stake links with probability proportional to
//! the *smaller* of the two committed stakes, which makes the chain
//! reversible with stationary distribution proportional to per-node
//! committed stake. A short walk started at a verifier therefore
//! concentrates close to stationary inside the verifier's well-connected
//! region while starving regions behind sparse cuts; comparing the walk
//! mass against the stationary target yields a per-node honesty score, and
//! a cut-off sweep over the scores extracts the verifier's honest set.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{parse_snapshot_header, NodeId};

use std::io::{BufRead, Write};

/// A reciprocal stake graph prepared for walking.
///
/// Node ids are dense walk-local indices; `origin` maps them back to the
/// account ids of the state the graph was projected from. Every arc has a
/// reverse arc, each side carrying the stake its tail committed, and every
/// node has at least one arc.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkGraph {
    origin: Vec<NodeId>,
    out: Vec<Vec<(u32, u64)>>,
    total: Vec<u64>,
    grand_total: u64,
}

impl WalkGraph {
    /// Builds a walk graph whose node `i` is labeled `origin[i]`. Arcs must
    /// be reciprocal, self-loop free, duplicate free, positively staked,
    /// and must touch every node.
    pub fn from_labeled_arcs(origin: Vec<NodeId>, arcs: Vec<(u32, u32, u64)>) -> Result<WalkGraph> {
        let n = origin.len();
        let mut out: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];
        for &(t, h, stake) in &arcs {
            if t as usize >= n {
                return Err(Error::UnknownNode(NodeId(t)));
            }
            if h as usize >= n {
                return Err(Error::UnknownNode(NodeId(h)));
            }
            if t == h {
                return Err(Error::arg(format!("self-loop at walk node {t}")));
            }
            if stake == 0 {
                return Err(Error::arg(format!("zero-stake arc {t} -> {h}")));
            }
            out[t as usize].push((h, stake));
        }
        for (t, row) in out.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(h, _)| h);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::arg(format!("duplicate arc out of walk node {t}")));
            }
        }
        for (t, row) in out.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::arg(format!("walk node {t} has no arcs")));
            }
            for &(h, _) in row {
                let back = &out[h as usize];
                if back.binary_search_by_key(&(t as u32), |&(x, _)| x).is_err() {
                    return Err(Error::arg(format!("arc {t} -> {h} is not reciprocal")));
                }
            }
        }
        let total: Vec<u64> = out.iter().map(|row| row.iter().map(|&(_, s)| s).sum()).collect();
        let grand_total = total.iter().sum();
        Ok(WalkGraph { origin, out, total, grand_total })
    }

    /// Convenience constructor where walk ids coincide with account ids.
    pub fn from_arcs(n: usize, arcs: Vec<(u32, u32, u64)>) -> Result<WalkGraph> {
        WalkGraph::from_labeled_arcs((0..n as u32).map(NodeId).collect(), arcs)
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    /// Account ids behind the walk-local node ids.
    pub fn origin(&self) -> &[NodeId] {
        &self.origin
    }

    pub fn origin_of(&self, walk_id: u32) -> NodeId {
        self.origin[walk_id as usize]
    }

    /// Out-arcs of a walk node as `(head, committed stake)`, sorted by head.
    pub fn out(&self, walk_id: u32) -> &[(u32, u64)] {
        &self.out[walk_id as usize]
    }

    /// Total stake committed by one node.
    pub fn total_stake(&self, walk_id: u32) -> u64 {
        self.total[walk_id as usize]
    }

    /// Total stake committed by all nodes.
    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    /// Stake committed on the arc `tail -> head`, if present.
    pub fn stake(&self, tail: u32, head: u32) -> Option<u64> {
        let row = &self.out[tail as usize];
        row.binary_search_by_key(&head, |&(h, _)| h).ok().map(|i| row[i].1)
    }

    /// The walk's stationary distribution: each node's share of the total
    /// committed stake.
    pub fn stationary(&self) -> Vec<f64> {
        let grand = self.grand_total as f64;
        self.total.iter().map(|&t| t as f64 / grand).collect()
    }

    /// Probability of stepping from `i` to `j`. For `i != j` this is
    /// `min(stake(i,j), stake(j,i)) / total_stake(i)`; the remaining
    /// probability mass stays on `i` itself.
    pub fn transition_probability(&self, i: u32, j: u32) -> f64 {
        if i == j {
            let moved: f64 = self.out[i as usize]
                .iter()
                .map(|&(h, s)| s.min(self.stake(h, i).unwrap_or(0)) as f64)
                .sum();
            return (1.0 - moved / self.total[i as usize] as f64).max(0.0);
        }
        match self.stake(i, j) {
            Some(s_ij) => {
                let s_ji = self.stake(j, i).unwrap_or(0);
                s_ij.min(s_ji) as f64 / self.total[i as usize] as f64
            }
            None => 0.0,
        }
    }

    /// Precomputes all transition probabilities for repeated propagation.
    pub fn transition_matrix(&self) -> TransitionMatrix {
        let mut rows = Vec::with_capacity(self.out.len());
        let mut self_p = Vec::with_capacity(self.out.len());
        for (i, row) in self.out.iter().enumerate() {
            let total = self.total[i] as f64;
            let mut probs = Vec::with_capacity(row.len());
            let mut moved = 0.0;
            for &(h, s) in row {
                let p = s.min(self.stake(h, i as u32).unwrap_or(0)) as f64 / total;
                moved += p;
                probs.push((h, p));
            }
            rows.push(probs);
            self_p.push((1.0 - moved).max(0.0));
        }
        TransitionMatrix { rows, self_p }
    }

    /// Writes the versioned snapshot format read by [`WalkGraph::read_snapshot`].
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        let arcs: usize = self.out.iter().map(Vec::len).sum();
        writeln!(w, "stake-walk v1 nodes={} arcs={}", self.node_count(), arcs)?;
        for &o in &self.origin {
            writeln!(w, "o {o}")?;
        }
        for (t, row) in self.out.iter().enumerate() {
            for &(h, stake) in row {
                writeln!(w, "{t} {h} {stake}")?;
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<WalkGraph> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "empty snapshot"))??;
        let (nodes, arc_count) = parse_snapshot_header(&header, "stake-walk v1")?;
        let mut origin = Vec::with_capacity(nodes);
        let mut arcs = Vec::with_capacity(arc_count);
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            if let Some(rest) = line.strip_prefix("o ") {
                let id: u32 = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line_no, "bad origin id"))?;
                origin.push(NodeId(id));
                continue;
            }
            let mut it = line.split_ascii_whitespace();
            let (t, h, s) = match (it.next(), it.next(), it.next(), it.next()) {
                (Some(t), Some(h), Some(s), None) => (t, h, s),
                _ => return Err(Error::parse(line_no, "expected `tail head stake`")),
            };
            let tail: u32 = t.parse().map_err(|_| Error::parse(line_no, "bad tail id"))?;
            let head: u32 = h.parse().map_err(|_| Error::parse(line_no, "bad head id"))?;
            let stake: u64 = s.parse().map_err(|_| Error::parse(line_no, "bad stake"))?;
            arcs.push((tail, head, stake));
        }
        if origin.len() != nodes || arcs.len() != arc_count {
            return Err(Error::arg("snapshot header does not match contents".to_string()));
        }
        WalkGraph::from_labeled_arcs(origin, arcs)
    }
}

/// Dense-row transition probabilities of a [`WalkGraph`].
pub struct TransitionMatrix {
    rows: Vec<Vec<(u32, f64)>>,
    self_p: Vec<f64>,
}

impl TransitionMatrix {
    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// Probability of staying put at `i` for one step.
    pub fn self_probability(&self, i: u32) -> f64 {
        self.self_p[i as usize]
    }

    /// Neighbor transition probabilities out of `i`.
    pub fn row(&self, i: u32) -> &[(u32, f64)] {
        &self.rows[i as usize]
    }

    /// One exact propagation step: `next = cur * P`.
    pub fn step(&self, cur: &[f64], next: &mut [f64]) {
        next.fill(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let mass = cur[i];
            if mass == 0.0 {
                continue;
            }
            next[i] += mass * self.self_p[i];
            for &(j, p) in row {
                next[j as usize] += mass * p;
            }
        }
    }

    /// One propagation step for `width` walks at once. `cur` and `next`
    /// hold one distribution per walk, interleaved in node-major blocks of
    /// `width` entries, so a single pass over the arcs advances every walk.
    /// Each walk's values are bit-identical to what [`step`] produces.
    pub fn step_batch(&self, width: usize, cur: &[f64], next: &mut [f64]) {
        next.fill(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let block = &cur[i * width..(i + 1) * width];
            if block.iter().all(|&m| m == 0.0) {
                continue;
            }
            let self_p = self.self_p[i];
            for (b, &mass) in block.iter().enumerate() {
                next[i * width + b] += mass * self_p;
            }
            for &(j, p) in row {
                let out = &mut next[j as usize * width..(j as usize + 1) * width];
                for (b, &mass) in block.iter().enumerate() {
                    out[b] += mass * p;
                }
            }
        }
    }
}

/// Probability mass over walk nodes after a fixed number of steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkDistribution {
    pub source: u32,
    pub length: u32,
    pub mass: Vec<f64>,
}

/// Exact distribution of a `length`-step walk started at `source`,
/// computed by repeated sparse propagation.
pub fn walk_distribution(g: &WalkGraph, source: u32, length: u32) -> Result<WalkDistribution> {
    let tm = g.transition_matrix();
    walk_distribution_with(g, &tm, source, length)
}

/// [`walk_distribution`] against a precomputed matrix, for callers that
/// propagate from many sources.
pub fn walk_distribution_with(
    g: &WalkGraph,
    tm: &TransitionMatrix,
    source: u32,
    length: u32,
) -> Result<WalkDistribution> {
    let n = g.node_count();
    if source as usize >= n {
        return Err(Error::UnknownNode(NodeId(source)));
    }
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    cur[source as usize] = 1.0;
    for _ in 0..length {
        tm.step(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(WalkDistribution { source, length, mass: cur })
}

/// Monte Carlo estimate of [`walk_distribution`]: `samples` independent
/// walks of exactly `length` steps, endpoint counts normalized to mass.
pub fn walk_distribution_monte_carlo(
    g: &WalkGraph,
    source: u32,
    length: u32,
    samples: u64,
    seed: u64,
) -> Result<WalkDistribution> {
    let n = g.node_count();
    if source as usize >= n {
        return Err(Error::UnknownNode(NodeId(source)));
    }
    if samples == 0 {
        return Err(Error::arg("need at least one walk sample"));
    }
    let tm = g.transition_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n];
    for _ in 0..samples {
        let mut pos = source;
        for _ in 0..length {
            // falling through every neighbor is the self-transition
            let mut r: f64 = rng.gen();
            for &(j, p) in tm.row(pos) {
                if r < p {
                    pos = j;
                    break;
                }
                r -= p;
            }
        }
        counts[pos as usize] += 1;
    }
    let mass = counts.iter().map(|&c| c as f64 / samples as f64).collect();
    Ok(WalkDistribution { source, length, mass })
}

/// The logistic curve `1 / (1 + exp(-steepness * (x - midpoint)))`.
pub fn logistic(x: f64, midpoint: f64, steepness: f64) -> f64 {
    1.0 / (1.0 + (-steepness * (x - midpoint)).exp())
}

/// Parameters of score computation and cut-off selection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffParams {
    /// Lowest cut-off the sweep may select.
    pub y_min: f64,
    /// Highest cut-off the sweep may select.
    pub y_max: f64,
    /// Grid step of the sweep.
    pub y_step: f64,
    /// Walk length multiplier: walks run for `ceil(m * ln(nodes))` steps.
    pub m: f64,
    /// Logistic steepness multiplier; the effective steepness is `k * nodes`
    /// so that a deviation of one average stationary mass saturates the
    /// score in either direction.
    pub k: f64,
}

impl Default for CutoffParams {
    fn default() -> Self {
        CutoffParams { y_min: 0.45, y_max: 0.55, y_step: 0.01, m: 3.0, k: 10.0 }
    }
}

impl CutoffParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.y_min > 0.0
            && self.y_min <= self.y_max
            && self.y_max < 1.0
            && self.y_step > 0.0
            && self.m > 0.0
            && self.k > 0.0
            && [self.y_min, self.y_max, self.y_step, self.m, self.k]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::arg(format!("invalid cut-off parameters: {self:?}")))
        }
    }

    /// Number of walk steps for a graph of `n` nodes.
    pub fn walk_length(&self, n: usize) -> u32 {
        (self.m * (n as f64).ln()).ceil() as u32
    }

    /// Effective logistic steepness for a graph of `n` nodes.
    pub fn k_eff(&self, n: usize) -> f64 {
        self.k * n as f64
    }

    /// Candidate cut-offs, ascending.
    pub fn grid(&self) -> Vec<f64> {
        let eps = self.y_step * 1e-6;
        let mut ys = Vec::new();
        let mut i = 0u32;
        loop {
            let y = self.y_min + f64::from(i) * self.y_step;
            if y > self.y_max + eps {
                break;
            }
            ys.push(y);
            i += 1;
        }
        ys
    }
}

/// Per-node honesty scores from one verifier's point of view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreMap {
    pub verifier: u32,
    pub scores: Vec<f64>,
}

/// Scores every node as seen from `verifier`: a short walk is started at
/// the verifier and each node's walk mass is squashed through a logistic
/// centered on the node's stationary share. The verifier scores itself 1.
pub fn honesty_scores(g: &WalkGraph, verifier: u32, params: &CutoffParams) -> Result<ScoreMap> {
    let tm = g.transition_matrix();
    honesty_scores_with(g, &tm, verifier, params)
}

/// [`honesty_scores`] against a precomputed matrix.
pub fn honesty_scores_with(
    g: &WalkGraph,
    tm: &TransitionMatrix,
    verifier: u32,
    params: &CutoffParams,
) -> Result<ScoreMap> {
    params.validate()?;
    let n = g.node_count();
    let dist = walk_distribution_with(g, tm, verifier, params.walk_length(n))?;
    let k_eff = params.k_eff(n);
    let grand = g.grand_total() as f64;
    let mut scores: Vec<f64> = dist
        .mass
        .iter()
        .enumerate()
        .map(|(j, &mass)| logistic(mass, g.total_stake(j as u32) as f64 / grand, k_eff))
        .collect();
    scores[verifier as usize] = 1.0;
    Ok(ScoreMap { verifier, scores })
}

/// Scores for several verifiers out of one interleaved propagation pass.
/// Output matches per-verifier [`honesty_scores_with`] calls bit for bit;
/// batching only amortizes the sweep over the arcs. Callers pick the batch
/// size through the length of `verifiers`.
pub fn honesty_scores_batch(
    g: &WalkGraph,
    tm: &TransitionMatrix,
    verifiers: &[u32],
    params: &CutoffParams,
) -> Result<Vec<ScoreMap>> {
    params.validate()?;
    let n = g.node_count();
    let width = verifiers.len();
    if width == 0 {
        return Ok(Vec::new());
    }
    for &v in verifiers {
        if v as usize >= n {
            return Err(Error::UnknownNode(NodeId(v)));
        }
    }
    let mut cur = vec![0.0; n * width];
    let mut next = vec![0.0; n * width];
    for (b, &v) in verifiers.iter().enumerate() {
        cur[v as usize * width + b] = 1.0;
    }
    for _ in 0..params.walk_length(n) {
        tm.step_batch(width, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    let k_eff = params.k_eff(n);
    let grand = g.grand_total() as f64;
    let midpoints: Vec<f64> =
        (0..n).map(|j| g.total_stake(j as u32) as f64 / grand).collect();
    Ok(verifiers
        .iter()
        .enumerate()
        .map(|(b, &v)| {
            let mut scores: Vec<f64> = (0..n)
                .map(|j| logistic(cur[j * width + b], midpoints[j], k_eff))
                .collect();
            scores[v as usize] = 1.0;
            ScoreMap { verifier: v, scores }
        })
        .collect())
}

/// Selects the largest cut-off on the parameter grid at which the nodes
/// scoring at or above the cut-off are linked more among themselves than
/// toward the rest of the graph. Falls back to the grid minimum when no
/// cut-off qualifies.
pub fn select_cutoff(g: &WalkGraph, scores: &ScoreMap, params: &CutoffParams) -> Result<f64> {
    params.validate()?;
    let n = g.node_count();
    if scores.scores.len() != n {
        return Err(Error::arg(format!(
            "score map covers {} nodes, graph has {n}",
            scores.scores.len()
        )));
    }
    for &y in params.grid().iter().rev() {
        let mut internal = 0u64;
        let mut outward = 0u64;
        for i in 0..n {
            if scores.scores[i] < y {
                continue;
            }
            for &(j, _) in g.out(i as u32) {
                if scores.scores[j as usize] >= y {
                    internal += 1;
                } else {
                    outward += 1;
                }
            }
        }
        if internal > outward {
            return Ok(y);
        }
    }
    Ok(params.y_min)
}

/// Walk nodes scoring at or above the cut-off, ascending.
pub fn honest_set(scores: &ScoreMap, cutoff: f64) -> Vec<u32> {
    scores
        .scores
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s >= cutoff)
        .map(|(i, _)| i as u32)
        .collect()
}
