//! Seeded builders for randomized tests.
//!
//! Everything here is deterministic in the seed, so failures reproduce by
//! rerunning the same test. The builders favor small, well-connected
//! graphs: a spanning tree guarantees connectivity and random extra links
//! control density.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use std::collections::BTreeSet;
use std::ops::Range;

use crate::graph::NodeId;
use crate::ledger::{LinkStatement, SecurityState};
use crate::walk::WalkGraph;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mutual link pairs over `ids`: a random spanning tree plus about `extra`
/// random links per node, deduplicated.
fn community_pairs(ids: Range<u32>, extra: usize, rng: &mut ChaCha8Rng) -> BTreeSet<(u32, u32)> {
    let lo = ids.start;
    let n = (ids.end - ids.start) as usize;
    let mut pairs = BTreeSet::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i) as u32;
        pairs.insert((lo + parent, lo + i as u32));
    }
    for _ in 0..n * extra {
        let a = lo + rng.gen_range(0..n as u32);
        let b = lo + rng.gen_range(0..n as u32);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    pairs
}

fn stake_pairs(
    n: usize,
    pairs: impl IntoIterator<Item = (u32, u32)>,
    max_stake: u64,
    rng: &mut ChaCha8Rng,
) -> WalkGraph {
    let mut arcs = Vec::new();
    for (a, b) in pairs {
        arcs.push((a, b, rng.gen_range(1..=max_stake)));
        arcs.push((b, a, rng.gen_range(1..=max_stake)));
    }
    WalkGraph::from_arcs(n, arcs).expect("builder produced a malformed walk graph")
}

/// Connected walk graph on `n` nodes with independently random stakes on
/// each side of every link.
pub fn random_walk_graph(n: usize, extra: usize, max_stake: u64, seed: u64) -> WalkGraph {
    let mut rng = seeded_rng(seed);
    let pairs = community_pairs(0..n as u32, extra, &mut rng);
    stake_pairs(n, pairs, max_stake, &mut rng)
}

/// Two random communities, nodes `0..na` and `na..na+nb`, joined by
/// exactly `cross` links. The sparse middle makes walks started on one
/// side linger there.
pub fn two_community_walk_graph(
    na: usize,
    nb: usize,
    cross: usize,
    extra: usize,
    seed: u64,
) -> WalkGraph {
    let mut rng = seeded_rng(seed);
    let mut pairs = community_pairs(0..na as u32, extra, &mut rng);
    pairs.extend(community_pairs(na as u32..(na + nb) as u32, extra, &mut rng));
    let mut crossings = BTreeSet::new();
    while crossings.len() < cross {
        let a = rng.gen_range(0..na as u32);
        let b = na as u32 + rng.gen_range(0..nb as u32);
        crossings.insert((a, b));
    }
    pairs.extend(crossings);
    stake_pairs(na + nb, pairs, 3, &mut rng)
}

/// Throws `steps` random statements at the state, applying the valid ones,
/// and returns how many were accepted. Useful for checking invariants that
/// must survive arbitrary valid histories.
pub fn churn_links(state: &mut SecurityState, steps: usize, seed: u64) -> usize {
    let mut rng = seeded_rng(seed);
    let n = state.node_count() as u32;
    let mut applied = 0;
    for _ in 0..steps {
        let origin = NodeId(rng.gen_range(0..n));
        let target = NodeId(rng.gen_range(0..n));
        let next_seq = |state: &SecurityState, v: NodeId| state.account(v).map_or(0, |a| a.seq) + 1;
        let stmt = match rng.gen_range(0..4u8) {
            0 | 1 => {
                let value = rng.gen_range(1..=3);
                LinkStatement::add_link(origin, target, value, next_seq(state, origin))
            }
            2 => LinkStatement::remove_by_origin(origin, target, next_seq(state, origin)),
            _ => LinkStatement::remove_by_target(origin, target, next_seq(state, target)),
        };
        if state.apply(&stmt).is_ok() {
            applied += 1;
        }
    }
    applied
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_are_seed_deterministic() {
        assert_eq!(random_walk_graph(20, 2, 3, 5), random_walk_graph(20, 2, 3, 5));
        assert_eq!(
            two_community_walk_graph(15, 15, 2, 2, 8),
            two_community_walk_graph(15, 15, 2, 2, 8)
        );
    }

    #[test]
    fn random_graph_is_connected() {
        let g = random_walk_graph(50, 0, 2, 42);
        let mut seen = vec![false; 50];
        let mut stack = vec![0u32];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in g.out(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn two_communities_touch_through_the_requested_links_only() {
        let g = two_community_walk_graph(30, 30, 3, 2, 17);
        let mut cross = 0;
        for v in 0..30u32 {
            for &(w, _) in g.out(v) {
                if w >= 30 {
                    cross += 1;
                }
            }
        }
        assert_eq!(cross, 3);
    }

    #[test]
    fn churn_applies_some_statements_and_keeps_the_books_straight() {
        let mut state = SecurityState::genesis(12, 50);
        let applied = churn_links(&mut state, 300, 7);
        assert!(applied > 0);
        assert_eq!(state.audit_supply(), state.supply());
    }
}
