//! Directed graphs whose arcs carry committed stake.
//!
//! Nodes are dense integer ids in `0..node_count`. Raw edge lists (one
//! `tail head` pair per line, `#` comments) are remapped to dense ids on
//! load; structural operations (subsampling, core pruning) return new
//! graphs with their own dense id space rather than mutating in place.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node identifier, valid only relative to the graph that issued it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Debug for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// A directed graph with at most one arc per ordered node pair.
///
/// Each arc `(tail, head)` carries the stake the tail has committed toward
/// the head. Out-adjacency lists are kept sorted by head so arc lookups are
/// logarithmic in the out-degree.
#[derive(Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    out: Vec<Vec<(NodeId, u64)>>,
    arc_count: usize,
}

/// Counters reported by [`load_edge_list`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub nodes: usize,
    pub arcs: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

impl DirectedGraph {
    /// Graph with `n` nodes and no arcs.
    pub fn empty(n: usize) -> Self {
        DirectedGraph { out: vec![Vec::new(); n], arc_count: 0 }
    }

    /// Builds a graph from explicit arcs. Rejects self-loops, duplicate
    /// ordered pairs, zero stakes, and ids outside `0..n`.
    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (NodeId, NodeId, u64)>) -> Result<Self> {
        let mut g = DirectedGraph::empty(n);
        for (tail, head, stake) in arcs {
            if tail.index() >= n {
                return Err(Error::UnknownNode(tail));
            }
            if head.index() >= n {
                return Err(Error::UnknownNode(head));
            }
            if tail == head {
                return Err(Error::arg(format!("self-loop at node {tail}")));
            }
            if stake == 0 {
                return Err(Error::arg(format!("zero-stake arc {tail} -> {head}")));
            }
            if !g.insert_arc(tail, head, stake) {
                return Err(Error::arg(format!("duplicate arc {tail} -> {head}")));
            }
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.out.len() as u32).map(NodeId)
    }

    /// Out-arcs of `v` as `(head, stake)`, sorted by head.
    pub fn out(&self, v: NodeId) -> &[(NodeId, u64)] {
        &self.out[v.index()]
    }

    /// Stake on the arc `tail -> head`, if the arc exists.
    pub fn stake(&self, tail: NodeId, head: NodeId) -> Option<u64> {
        let row = self.out.get(tail.index())?;
        row.binary_search_by_key(&head, |&(h, _)| h).ok().map(|i| row[i].1)
    }

    pub fn has_arc(&self, tail: NodeId, head: NodeId) -> bool {
        self.stake(tail, head).is_some()
    }

    /// Appends an isolated node and returns its id.
    pub(crate) fn push_node(&mut self) -> NodeId {
        self.out.push(Vec::new());
        NodeId(self.out.len() as u32 - 1)
    }

    /// Inserts an arc, keeping the row sorted. Returns false if the ordered
    /// pair already exists (the stored stake is left untouched).
    pub(crate) fn insert_arc(&mut self, tail: NodeId, head: NodeId, stake: u64) -> bool {
        let row = &mut self.out[tail.index()];
        match row.binary_search_by_key(&head, |&(h, _)| h) {
            Ok(_) => false,
            Err(pos) => {
                row.insert(pos, (head, stake));
                self.arc_count += 1;
                true
            }
        }
    }

    /// Removes an arc and returns its stake, if present.
    pub(crate) fn remove_arc(&mut self, tail: NodeId, head: NodeId) -> Option<u64> {
        let row = &mut self.out[tail.index()];
        match row.binary_search_by_key(&head, |&(h, _)| h) {
            Ok(pos) => {
                let (_, stake) = row.remove(pos);
                self.arc_count -= 1;
                Some(stake)
            }
            Err(_) => None,
        }
    }

    /// Distinct-neighbor degree per node, counting in- and out-arcs alike.
    fn undirected_neighbors(&self) -> Vec<Vec<u32>> {
        let mut nbr: Vec<Vec<u32>> = vec![Vec::new(); self.out.len()];
        for (t, row) in self.out.iter().enumerate() {
            for &(h, _) in row {
                nbr[t].push(h.0);
                nbr[h.index()].push(t as u32);
            }
        }
        for row in &mut nbr {
            row.sort_unstable();
            row.dedup();
        }
        nbr
    }

    /// Keeps a uniform sample of `count` nodes along with every arc leaving
    /// them. Arc heads outside the sample stay in the result as nodes
    /// without out-arcs of their own. Ids are remapped to a dense range, in
    /// ascending order of the original ids (sampled nodes first).
    pub fn subsample_nodes(&self, count: usize, seed: u64) -> Result<DirectedGraph> {
        let n = self.node_count();
        if count > n {
            return Err(Error::arg(format!("cannot sample {count} of {n} nodes")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<u32> = (0..n as u32).collect();
        ids.partial_shuffle(&mut rng, count);
        let mut sampled: Vec<u32> = ids[..count].to_vec();
        sampled.sort_unstable();

        let mut remap: HashMap<u32, u32> = HashMap::with_capacity(count);
        for (new, &old) in sampled.iter().enumerate() {
            remap.insert(old, new as u32);
        }
        let in_sample = |v: u32| remap.contains_key(&v);

        let mut extra: Vec<u32> = Vec::new();
        for &t in &sampled {
            for &(h, _) in &self.out[t as usize] {
                if !in_sample(h.0) {
                    extra.push(h.0);
                }
            }
        }
        extra.sort_unstable();
        extra.dedup();
        for &old in &extra {
            let new = remap.len() as u32;
            remap.insert(old, new);
        }

        let mut g = DirectedGraph::empty(remap.len());
        for &t in &sampled {
            let nt = remap[&t];
            for &(h, stake) in &self.out[t as usize] {
                g.insert_arc(NodeId(nt), NodeId(remap[&h.0]), stake);
            }
        }
        Ok(g)
    }

    /// Induced subgraph on the k-core: repeatedly peels nodes whose
    /// distinct-neighbor degree (in either direction) is below `k` until
    /// every survivor has degree at least `k`. May be empty.
    pub fn k_core_prune(&self, k: u32) -> DirectedGraph {
        let nbr = self.undirected_neighbors();
        let n = self.node_count();
        let mut degree: Vec<u32> = nbr.iter().map(|r| r.len() as u32).collect();
        let mut removed = vec![false; n];
        let mut queue: Vec<u32> = (0..n as u32).filter(|&v| degree[v as usize] < k).collect();
        for &v in &queue {
            removed[v as usize] = true;
        }
        while let Some(v) = queue.pop() {
            for &u in &nbr[v as usize] {
                if removed[u as usize] {
                    continue;
                }
                degree[u as usize] -= 1;
                if degree[u as usize] < k {
                    removed[u as usize] = true;
                    queue.push(u);
                }
            }
        }

        let survivors: Vec<u32> = (0..n as u32).filter(|&v| !removed[v as usize]).collect();
        let mut remap: HashMap<u32, u32> = HashMap::with_capacity(survivors.len());
        for (new, &old) in survivors.iter().enumerate() {
            remap.insert(old, new as u32);
        }
        let mut g = DirectedGraph::empty(survivors.len());
        for &t in &survivors {
            for &(h, stake) in &self.out[t as usize] {
                if let Some(&nh) = remap.get(&h.0) {
                    g.insert_arc(NodeId(remap[&t]), NodeId(nh), stake);
                }
            }
        }
        g
    }

    /// Number of arcs leading from `n0` into `n1`. Both sets must consist
    /// of nodes of this graph; the sets may overlap.
    pub fn link_count(&self, n0: &HashSet<NodeId>, n1: &HashSet<NodeId>) -> Result<u64> {
        let n = self.node_count();
        for &v in n0.iter().chain(n1) {
            if v.index() >= n {
                return Err(Error::UnknownNode(v));
            }
        }
        let mut in_n1 = vec![false; n];
        for &v in n1 {
            in_n1[v.index()] = true;
        }
        let mut count = 0u64;
        for &t in n0 {
            for &(h, _) in &self.out[t.index()] {
                if in_n1[h.index()] {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// Writes the versioned snapshot format read by [`DirectedGraph::read_snapshot`].
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "stake-graph v1 nodes={} arcs={}", self.node_count(), self.arc_count)?;
        for (t, row) in self.out.iter().enumerate() {
            for &(h, stake) in row {
                writeln!(w, "{t} {h} {stake}")?;
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<DirectedGraph> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "empty snapshot"))??;
        let (nodes, arcs) = parse_snapshot_header(&header, "stake-graph v1")?;
        let mut g = DirectedGraph::empty(nodes);
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            let mut it = line.split_ascii_whitespace();
            let (t, h, s) = match (it.next(), it.next(), it.next(), it.next()) {
                (Some(t), Some(h), Some(s), None) => (t, h, s),
                _ => return Err(Error::parse(line_no, "expected `tail head stake`")),
            };
            let tail: u32 = t.parse().map_err(|_| Error::parse(line_no, "bad tail id"))?;
            let head: u32 = h.parse().map_err(|_| Error::parse(line_no, "bad head id"))?;
            let stake: u64 = s.parse().map_err(|_| Error::parse(line_no, "bad stake"))?;
            if tail as usize >= nodes || head as usize >= nodes {
                return Err(Error::parse(line_no, "node id outside declared range"));
            }
            if !g.insert_arc(NodeId(tail), NodeId(head), stake) {
                return Err(Error::parse(line_no, "duplicate arc"));
            }
        }
        if g.arc_count != arcs {
            return Err(Error::arg(format!(
                "snapshot declared {arcs} arcs but contained {}",
                g.arc_count
            )));
        }
        Ok(g)
    }
}

impl std::fmt::Debug for DirectedGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DirectedGraph({} nodes, {} arcs)", self.node_count(), self.arc_count)
    }
}

pub(crate) fn parse_snapshot_header(header: &str, magic: &str) -> Result<(usize, usize)> {
    let rest = header
        .strip_prefix(magic)
        .ok_or_else(|| Error::parse(1, format!("expected `{magic}` header")))?;
    let mut nodes = None;
    let mut arcs = None;
    for field in rest.split_ascii_whitespace() {
        if let Some(v) = field.strip_prefix("nodes=") {
            nodes = v.parse().ok();
        } else if let Some(v) = field.strip_prefix("arcs=") {
            arcs = v.parse().ok();
        }
    }
    match (nodes, arcs) {
        (Some(n), Some(a)) => Ok((n, a)),
        _ => Err(Error::parse(1, "header missing nodes=/arcs= fields")),
    }
}

/// Reads a raw edge list: one `tail head` pair of integers per line,
/// whitespace separated, `#` starting a comment line. Original ids may be
/// arbitrary and are remapped densely in order of first appearance.
/// Self-loops and repeated ordered pairs are dropped and counted. Every
/// surviving arc gets `default_stake`.
pub fn load_edge_list<R: BufRead>(r: R, default_stake: u64) -> Result<(DirectedGraph, LoadStats)> {
    if default_stake == 0 {
        return Err(Error::arg("default stake must be positive"));
    }
    let mut remap: HashMap<u64, u32> = HashMap::new();
    let mut g = DirectedGraph::empty(0);
    let mut stats = LoadStats::default();

    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_ascii_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(Error::parse(line_no, "expected two node ids")),
        };
        let tail: u64 = a
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad node id `{a}`")))?;
        let head: u64 = b
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad node id `{b}`")))?;
        if tail == head {
            stats.self_loops_dropped += 1;
            continue;
        }
        let mut intern = |orig: u64, g: &mut DirectedGraph| -> NodeId {
            match remap.get(&orig) {
                Some(&id) => NodeId(id),
                None => {
                    let id = g.push_node();
                    remap.insert(orig, id.0);
                    id
                }
            }
        };
        let t = intern(tail, &mut g);
        let h = intern(head, &mut g);
        if !g.insert_arc(t, h, default_stake) {
            stats.duplicates_dropped += 1;
        }
    }
    stats.nodes = g.node_count();
    stats.arcs = g.arc_count();
    Ok((g, stats))
}

/// Generates a connected, aperiodic, near-regular social graph for
/// experiments at configurable scale.
///
/// Nodes split into two halves by id parity. The graph is the union of
/// `cycles` random Hamiltonian cycles that alternate between the halves
/// (each one alone already connects everything) plus one random cycle
/// within each half, which closes odd walks and so keeps the random walk
/// aperiodic. Every undirected edge becomes a mutual arc pair with unit
/// stake and degrees concentrate at `2 * cycles + 2`. Unions of random
/// cycles are strong expanders, so short walks mix fast within each half,
/// while the two-level shape gives scores a coarse community texture.
pub fn synthetic_social_graph(nodes: usize, cycles: usize, seed: u64) -> Result<DirectedGraph> {
    if nodes < 3 {
        return Err(Error::arg("synthetic graph needs at least 3 nodes"));
    }
    if cycles == 0 {
        return Err(Error::arg("synthetic graph needs at least 1 cycle"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: HashSet<(u32, u32)> = HashSet::new();
    let add = |a: u32, b: u32, edges: &mut HashSet<(u32, u32)>| {
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    };
    let n = nodes as u32;
    let mut left: Vec<u32> = (0..n).step_by(2).collect();
    let mut right: Vec<u32> = (1..n).step_by(2).collect();
    for _ in 0..cycles {
        left.shuffle(&mut rng);
        right.shuffle(&mut rng);
        let mut order: Vec<u32> = Vec::with_capacity(nodes);
        for i in 0..left.len().max(right.len()) {
            if let Some(&v) = left.get(i) {
                order.push(v);
            }
            if let Some(&v) = right.get(i) {
                order.push(v);
            }
        }
        for i in 0..order.len() {
            add(order[i], order[(i + 1) % order.len()], &mut edges);
        }
    }
    for side in [&mut left, &mut right] {
        side.shuffle(&mut rng);
        match side.len() {
            0 | 1 => {}
            2 => add(side[0], side[1], &mut edges),
            len => {
                for i in 0..len {
                    add(side[i], side[(i + 1) % len], &mut edges);
                }
            }
        }
    }
    let mut sorted: Vec<(u32, u32)> = edges.into_iter().collect();
    sorted.sort_unstable();
    let arcs = sorted
        .iter()
        .flat_map(|&(a, b)| [(NodeId(a), NodeId(b), 1), (NodeId(b), NodeId(a), 1)]);
    DirectedGraph::from_arcs(nodes, arcs)
}
