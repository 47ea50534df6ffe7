//! Federated quorum systems built from per-node trusted sets.
//!
//! Every node names a trusted set and a threshold; a set of nodes is a
//! quorum when it is nonempty and each member sees at least its threshold
//! of trusted nodes inside the set. On top of that definition this module
//! answers the two questions that matter for a deployment: can the honest
//! remainder still make progress once ill-behaved nodes and everyone they
//! befoul are discarded (liveness), and do all remaining quorums pairwise
//! intersect (safety).
//!
//! The safety check is a certified lower bound rather than an exhaustive
//! search: it never calls an unsafe system safe, and on systems small
//! enough to enumerate it can be cross-checked against
//! [`brute_force_quorum_intersection`].

use crate::bits::Bitset;
use crate::error::{Error, Result};
use crate::graph::NodeId;

use std::io::{BufRead, Write};

/// Threshold rule used when trusted sets come straight from inference:
/// more than two thirds of the trusted set must concur.
pub fn supermajority_threshold(trusted: usize) -> usize {
    2 * trusted / 3 + 1
}

/// A federated quorum system over nodes `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fbas {
    trust: Vec<Bitset>,
    threshold: Vec<usize>,
}

impl Fbas {
    /// Builds a system from explicit trusted sets and thresholds. Every
    /// node must trust itself, and each threshold must be reachable within
    /// the trusted set.
    pub fn new(trust: Vec<Bitset>, threshold: Vec<usize>) -> Result<Fbas> {
        let n = trust.len();
        if threshold.len() != n {
            return Err(Error::arg(format!(
                "{n} trusted sets but {} thresholds",
                threshold.len()
            )));
        }
        for (v, set) in trust.iter().enumerate() {
            if set.universe() != n {
                return Err(Error::arg(format!(
                    "trusted set of node {v} ranges over {} nodes, system has {n}",
                    set.universe()
                )));
            }
            if !set.contains(v) {
                return Err(Error::arg(format!("node {v} does not trust itself")));
            }
            let t = threshold[v];
            if t == 0 || t > set.count() {
                return Err(Error::arg(format!(
                    "threshold {t} of node {v} outside 1..={}",
                    set.count()
                )));
            }
        }
        Ok(Fbas { trust, threshold })
    }

    /// Builds a system from trusted sets alone, applying the supermajority
    /// threshold rule to each.
    pub fn from_trust(trust: Vec<Bitset>) -> Result<Fbas> {
        let threshold = trust.iter().map(|s| supermajority_threshold(s.count())).collect();
        Fbas::new(trust, threshold)
    }

    /// [`Fbas::from_trust`] over member lists, as produced by per-verifier
    /// inference. `lists[v]` holds the nodes `v` trusts; `v` itself is
    /// added when the list omits it.
    pub fn from_member_lists(lists: &[Vec<u32>]) -> Result<Fbas> {
        let n = lists.len();
        let mut trust = Vec::with_capacity(n);
        for (v, list) in lists.iter().enumerate() {
            for &m in list {
                if m as usize >= n {
                    return Err(Error::UnknownNode(NodeId(m)));
                }
            }
            let mut set = Bitset::from_indices(n, list.iter().map(|&m| m as usize));
            set.insert(v);
            trust.push(set);
        }
        Fbas::from_trust(trust)
    }

    pub fn node_count(&self) -> usize {
        self.trust.len()
    }

    pub fn trust(&self, v: u32) -> &Bitset {
        &self.trust[v as usize]
    }

    /// Agreement threshold of `v`, equally the cardinality of its smallest
    /// quorum slice.
    pub fn threshold(&self, v: u32) -> usize {
        self.threshold[v as usize]
    }

    /// Whether `set` is a quorum: nonempty, and every member sees at least
    /// its threshold of trusted nodes inside the set.
    pub fn is_quorum(&self, set: &Bitset) -> bool {
        assert_eq!(set.universe(), self.node_count());
        !set.is_empty()
            && set
                .iter()
                .all(|v| self.trust[v].intersection_count(set) >= self.threshold[v])
    }

    /// The unique maximal quorum contained in `set`, if any: members whose
    /// in-set support falls short of their threshold are discarded until
    /// the rest stands on its own.
    pub fn quorum_within(&self, set: &Bitset) -> Option<Bitset> {
        assert_eq!(set.universe(), self.node_count());
        let mut q = set.clone();
        loop {
            let shaky: Vec<usize> = q
                .iter()
                .filter(|&v| self.trust[v].intersection_count(&q) < self.threshold[v])
                .collect();
            if shaky.is_empty() {
                break;
            }
            for v in shaky {
                q.remove(v);
            }
        }
        if q.is_empty() {
            None
        } else {
            Some(q)
        }
    }

    /// Writes the versioned text format read by [`Fbas::read_text`]: one
    /// `node: members` line per node. Thresholds are re-derived by the
    /// supermajority rule on read, so systems carrying preserved
    /// post-deletion thresholds do not round-trip through text.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "fbas v1 nodes={}", self.node_count())?;
        for v in 0..self.node_count() {
            write!(w, "{v}:")?;
            for m in self.trust[v].iter() {
                write!(w, " {m}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Fbas> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "empty input"))??;
        let n: usize = header
            .strip_prefix("fbas v1 nodes=")
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| Error::parse(1, "expected `fbas v1 nodes=N`"))?;
        let mut trust = vec![Bitset::new(n); n];
        let mut seen = vec![false; n];
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            let (head, members) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "expected `node: members`"))?;
            let v: usize =
                head.trim().parse().map_err(|_| Error::parse(line_no, "bad node id"))?;
            if v >= n || seen[v] {
                return Err(Error::parse(line_no, "node id out of range or repeated"));
            }
            seen[v] = true;
            trust[v].insert(v);
            for m in members.split_ascii_whitespace() {
                let m: usize = m.parse().map_err(|_| Error::parse(line_no, "bad member id"))?;
                if m >= n {
                    return Err(Error::parse(line_no, "member id out of range"));
                }
                trust[v].insert(m);
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::arg("missing trust lines for some nodes"));
        }
        Fbas::from_trust(trust)
    }
}

/// Outcome of the befouling cascade around a set of ill-behaved nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DsetResult {
    /// Ill-behaved nodes plus everyone transitively befouled by them.
    pub dset: Bitset,
    /// Whether the untouched remainder still forms a quorum.
    pub residual_live: bool,
}

/// Expands `ill_behaved` to the full dispensable set: a node is befouled
/// once more than a third of its trusted set is, and befouling cascades
/// until stable. The remainder is live when it can still reach quorum
/// on its own.
pub fn determine_dset(fbas: &Fbas, ill_behaved: &Bitset) -> DsetResult {
    assert_eq!(ill_behaved.universe(), fbas.node_count());
    let mut dset = ill_behaved.clone();
    loop {
        let newly: Vec<usize> = dset
            .complement()
            .iter()
            .filter(|&v| {
                let trusted = fbas.trust(v as u32);
                3 * trusted.intersection_count(&dset) > trusted.count()
            })
            .collect();
        if newly.is_empty() {
            break;
        }
        for v in newly {
            dset.insert(v);
        }
    }
    let residual_live = fbas.is_quorum(&dset.complement());
    DsetResult { dset, residual_live }
}

/// How thresholds carry over when nodes are deleted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Re-derive each threshold from the surviving trusted set with the
    /// supermajority rule.
    #[default]
    Recompute,
    /// Keep the original requirement, discounted by the trusted nodes that
    /// were deleted; never drops below 1.
    Preserve,
}

/// A system with nodes removed, plus the mapping back to the old ids.
#[derive(Clone, Debug, PartialEq)]
pub struct DeletedFbas {
    pub fbas: Fbas,
    /// `kept[new_id] = old_id`, ascending.
    pub kept: Vec<u32>,
}

/// Deletes `remove` from the system: surviving nodes are reindexed densely
/// and their trusted sets are restricted to survivors.
pub fn delete_nodes(fbas: &Fbas, remove: &Bitset, mode: ThresholdMode) -> DeletedFbas {
    let n = fbas.node_count();
    assert_eq!(remove.universe(), n);
    let kept: Vec<u32> = remove.complement().iter().map(|v| v as u32).collect();
    let mut new_id = vec![u32::MAX; n];
    for (i, &old) in kept.iter().enumerate() {
        new_id[old as usize] = i as u32;
    }
    let m = kept.len();
    let mut trust = Vec::with_capacity(m);
    let mut threshold = Vec::with_capacity(m);
    for &old in &kept {
        let old_set = fbas.trust(old);
        let surviving =
            Bitset::from_indices(m, old_set.iter().filter_map(|v| match new_id[v] {
                u32::MAX => None,
                id => Some(id as usize),
            }));
        let t = match mode {
            ThresholdMode::Recompute => supermajority_threshold(surviving.count()),
            ThresholdMode::Preserve => {
                let lost = old_set.intersection_count(remove);
                fbas.threshold(old).saturating_sub(lost).max(1)
            }
        };
        trust.push(surviving);
        threshold.push(t);
    }
    let fbas = Fbas::new(trust, threshold).expect("deletion preserved well-formedness");
    DeletedFbas { fbas, kept }
}

/// Certified per-node lower bounds on quorum size.
#[derive(Clone, Debug, PartialEq)]
pub struct SafetyCertificate {
    /// Whether every pair of quorums provably intersects.
    pub safe: bool,
    /// `bounds[v]` lower-bounds the size of any quorum containing `v`.
    pub bounds: Vec<usize>,
    /// Fixed-point rounds until the bounds stopped improving.
    pub rounds: u32,
}

/// Certifies quorum intersection by lower-bounding quorum sizes.
///
/// Any quorum containing `v` includes at least `threshold(v)` of `v`'s
/// trusted set, so it also includes some trusted node whose own bound is
/// at least the `threshold(v)`-th smallest bound across the trusted set.
/// Iterating that observation to a fixed point yields per-node bounds;
/// once every bound exceeds half the system, all quorums are
/// majorities and therefore pairwise intersect.
pub fn determine_safety(fbas: &Fbas) -> SafetyCertificate {
    let n = fbas.node_count();
    let mut bounds: Vec<usize> = fbas.threshold.clone();
    let mut rounds = 0;
    let mut scratch = Vec::new();
    loop {
        let mut next = bounds.clone();
        for v in 0..n {
            scratch.clear();
            scratch.extend(fbas.trust[v].iter().map(|u| bounds[u]));
            let (_, &mut kth, _) = scratch.select_nth_unstable(fbas.threshold[v] - 1);
            if kth > next[v] {
                next[v] = kth;
            }
        }
        rounds += 1;
        if next == bounds {
            break;
        }
        bounds = next;
    }
    let safe = bounds.iter().all(|&b| 2 * b > n);
    SafetyCertificate { safe, bounds, rounds }
}

/// Largest system size the brute-force oracles accept.
pub const BRUTE_FORCE_BOUND: usize = 16;

fn mask_to_set(mask: u32, n: usize) -> Bitset {
    Bitset::from_indices(n, (0..n).filter(|&v| mask & (1 << v) != 0))
}

/// Exhaustively finds a smallest quorum containing `v`. Refuses systems
/// larger than [`BRUTE_FORCE_BOUND`] nodes.
pub fn brute_force_min_quorum(fbas: &Fbas, v: u32) -> Result<Option<Bitset>> {
    let n = fbas.node_count();
    if n > BRUTE_FORCE_BOUND {
        return Err(Error::TooLarge { nodes: n, bound: BRUTE_FORCE_BOUND });
    }
    if v as usize >= n {
        return Err(Error::UnknownNode(NodeId(v)));
    }
    let mut best: Option<Bitset> = None;
    for mask in 0..1u32 << n {
        if mask & (1 << v) == 0 {
            continue;
        }
        if let Some(b) = &best {
            if (mask.count_ones() as usize) >= b.count() {
                continue;
            }
        }
        let set = mask_to_set(mask, n);
        if fbas.is_quorum(&set) {
            best = Some(set);
        }
    }
    Ok(best)
}

/// Exhaustively checks that all quorums pairwise intersect. Refuses
/// systems larger than [`BRUTE_FORCE_BOUND`] nodes.
pub fn brute_force_quorum_intersection(fbas: &Fbas) -> Result<bool> {
    let n = fbas.node_count();
    if n > BRUTE_FORCE_BOUND {
        return Err(Error::TooLarge { nodes: n, bound: BRUTE_FORCE_BOUND });
    }
    for mask in 1..1u32 << n {
        let set = mask_to_set(mask, n);
        if fbas.is_quorum(&set) && fbas.quorum_within(&set.complement()).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::seeded_rng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    /// Every node trusts everyone, supermajority thresholds.
    fn complete(n: usize) -> Fbas {
        Fbas::from_trust(vec![Bitset::full(n); n]).unwrap()
    }

    /// Random system: every node trusts itself plus `extra` random others.
    fn random_fbas(n: usize, extra: usize, seed: u64) -> Fbas {
        let mut rng = seeded_rng(seed);
        let mut trust = Vec::with_capacity(n);
        for v in 0..n {
            let mut set = Bitset::new(n);
            set.insert(v);
            for _ in 0..extra {
                set.insert(rng.gen_range(0..n));
            }
            trust.push(set);
        }
        Fbas::from_trust(trust).unwrap()
    }

    fn set(n: usize, members: &[usize]) -> Bitset {
        Bitset::from_indices(n, members.iter().copied())
    }

    #[test]
    fn supermajority_threshold_table() {
        assert_eq!(supermajority_threshold(1), 1);
        assert_eq!(supermajority_threshold(2), 2);
        assert_eq!(supermajority_threshold(3), 3);
        assert_eq!(supermajority_threshold(4), 3);
        assert_eq!(supermajority_threshold(6), 5);
        assert_eq!(supermajority_threshold(9), 7);
        assert_eq!(supermajority_threshold(100), 67);
    }

    #[test]
    fn constructor_rejects_malformed_systems() {
        // threshold count mismatch
        assert!(Fbas::new(vec![Bitset::full(2); 2], vec![1]).is_err());
        // trusted set over the wrong universe
        assert!(Fbas::new(vec![Bitset::full(3); 2], vec![1, 1]).is_err());
        // zero threshold, threshold beyond the trusted set
        assert!(Fbas::new(vec![Bitset::full(2); 2], vec![1, 0]).is_err());
        assert!(Fbas::new(vec![Bitset::full(2); 2], vec![1, 3]).is_err());
        // node that does not trust itself
        let mut no_self = Bitset::full(2);
        no_self.remove(1);
        assert!(Fbas::new(vec![Bitset::full(2), no_self], vec![1, 1]).is_err());
        // member id out of range
        assert!(Fbas::from_member_lists(&[vec![0, 5], vec![1]]).is_err());
    }

    #[test]
    fn member_lists_gain_their_owner() {
        let f = Fbas::from_member_lists(&[vec![1], vec![0]]).unwrap();
        assert_eq!(f.trust(0), &Bitset::full(2));
        assert_eq!(f.trust(1), &Bitset::full(2));
        assert_eq!(f.threshold(0), 2);
    }

    #[test]
    fn complete_trust_quorums_are_supermajorities() {
        let f = complete(6);
        assert!(f.is_quorum(&Bitset::full(6)));
        assert!(f.is_quorum(&set(6, &[0, 1, 2, 3, 4])));
        assert!(!f.is_quorum(&set(6, &[0, 1, 2, 3])));
        assert!(!f.is_quorum(&Bitset::new(6)));
    }

    #[test]
    fn two_cliques_have_disjoint_quorums() {
        let f = Fbas::from_member_lists(&[
            vec![0, 1, 2],
            vec![0, 1, 2],
            vec![0, 1, 2],
            vec![3, 4, 5],
            vec![3, 4, 5],
            vec![3, 4, 5],
        ])
        .unwrap();
        let left = set(6, &[0, 1, 2]);
        let right = set(6, &[3, 4, 5]);
        assert!(f.is_quorum(&left));
        assert!(f.is_quorum(&right));
        assert!(!brute_force_quorum_intersection(&f).unwrap());
        assert!(!determine_safety(&f).safe);
    }

    #[test]
    fn complete_trust_is_safe_and_certifiably_so() {
        for n in 1..=9 {
            let f = complete(n);
            let cert = determine_safety(&f);
            assert!(cert.safe, "complete system of {n} reported unsafe");
            assert!(brute_force_quorum_intersection(&f).unwrap());
            for &b in &cert.bounds {
                assert_eq!(b, supermajority_threshold(n));
            }
        }
    }

    #[test]
    fn quorum_within_finds_the_maximal_contained_quorum() {
        let f = complete(5);
        // 4 of 5 meets the threshold, any 3 does not
        assert_eq!(f.quorum_within(&set(5, &[0, 1, 2, 3])), Some(set(5, &[0, 1, 2, 3])));
        assert_eq!(f.quorum_within(&set(5, &[0, 1, 2])), None);
        // a node trusting an absent supermajority collapses step by step
        let chain = Fbas::from_member_lists(&[vec![0, 1], vec![1, 2], vec![2]]).unwrap();
        assert_eq!(chain.quorum_within(&Bitset::full(3)), Some(Bitset::full(3)));
        assert_eq!(chain.quorum_within(&set(3, &[0, 1])), None);
        assert_eq!(chain.quorum_within(&set(3, &[1, 2])), Some(set(3, &[1, 2])));
    }

    #[test]
    fn quorum_within_crosschecks_is_quorum_on_random_systems() {
        for seed in 0..20 {
            let f = random_fbas(10, 3, seed);
            let mut rng = seeded_rng(seed ^ 0xbeef);
            for _ in 0..50 {
                let mask: u32 = rng.gen_range(0..1 << 10);
                let s = mask_to_set(mask, 10);
                match f.quorum_within(&s) {
                    Some(q) => {
                        assert!(f.is_quorum(&q));
                        assert!(q.is_subset_of(&s));
                    }
                    None => {
                        // no nonempty subset may be a quorum; spot-check s itself
                        assert!(!f.is_quorum(&s));
                    }
                }
            }
        }
    }

    #[test]
    fn befouling_cascades_through_dependent_nodes() {
        // 0..4 form a core trusting {0..4}; 5 leans on 4, 6 leans on 5.
        // Losing 4 befouls 5 (half its trusted set), which befouls 6, while
        // the core only loses a fifth and stands.
        let f = Fbas::from_member_lists(&[
            vec![0, 1, 2, 3, 4],
            vec![0, 1, 2, 3, 4],
            vec![0, 1, 2, 3, 4],
            vec![0, 1, 2, 3, 4],
            vec![0, 1, 2, 3, 4],
            vec![4, 5],
            vec![5, 6],
        ])
        .unwrap();
        let out = determine_dset(&f, &set(7, &[4]));
        assert_eq!(out.dset, set(7, &[4, 5, 6]));
        // remainder {0..3} meets its threshold of 4 within itself
        assert!(out.residual_live);

        let lone = determine_dset(&f, &set(7, &[6]));
        assert_eq!(lone.dset, set(7, &[6]));
        assert!(lone.residual_live);

        let nothing = determine_dset(&f, &Bitset::new(7));
        assert!(nothing.dset.is_empty());
        assert!(nothing.residual_live);
    }

    #[test]
    fn befouling_needs_strictly_more_than_a_third() {
        // exactly one third of a 6-node trusted set does not befoul, but
        // the survivors fall short of their supermajority all the same
        let f = complete(6);
        let out = determine_dset(&f, &set(6, &[0, 1]));
        assert_eq!(out.dset, set(6, &[0, 1]));
        assert!(!out.residual_live);
        // one more tips everyone over
        let out = determine_dset(&f, &set(6, &[0, 1, 2]));
        assert_eq!(out.dset, Bitset::full(6));
        assert!(!out.residual_live);
        // a 7-node complete system absorbs the same two losses
        let f = complete(7);
        let out = determine_dset(&f, &set(7, &[0, 1]));
        assert_eq!(out.dset, set(7, &[0, 1]));
        assert!(out.residual_live);
    }

    #[test]
    fn dset_matches_order_shuffled_recomputation() {
        for seed in 0..15 {
            let f = random_fbas(12, 4, seed);
            let mut rng = seeded_rng(seed.wrapping_mul(31) ^ 7);
            let ill = Bitset::from_indices(12, (0..12).filter(|_| rng.gen_bool(0.25)));
            let fast = determine_dset(&f, &ill);

            // oracle: repeatedly scan nodes in a random order, one at a time
            let mut dset = ill.clone();
            let mut order: Vec<usize> = (0..12).collect();
            loop {
                order.shuffle(&mut rng);
                let mut changed = false;
                for &v in &order {
                    if dset.contains(v) {
                        continue;
                    }
                    let trusted = f.trust(v as u32);
                    if 3 * trusted.intersection_count(&dset) > trusted.count() {
                        dset.insert(v);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            assert_eq!(fast.dset, dset, "seed {seed}");
            assert_eq!(fast.residual_live, f.is_quorum(&dset.complement()), "seed {seed}");
        }
    }

    #[test]
    fn deletion_reindexes_and_restricts_trust() {
        let f = Fbas::from_member_lists(&[
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 3],
        ])
        .unwrap();
        let del = delete_nodes(&f, &set(4, &[1]), ThresholdMode::Recompute);
        assert_eq!(del.kept, vec![0, 2, 3]);
        assert_eq!(del.fbas.node_count(), 3);
        for v in 0..3 {
            assert_eq!(del.fbas.trust(v), &Bitset::full(3));
            assert_eq!(del.fbas.threshold(v), 3);
        }
    }

    #[test]
    fn preserved_thresholds_discount_deleted_trustees() {
        let f = complete(6); // thresholds 5
        let del = delete_nodes(&f, &set(6, &[4, 5]), ThresholdMode::Preserve);
        assert_eq!(del.kept, vec![0, 1, 2, 3]);
        for v in 0..4 {
            assert_eq!(del.fbas.threshold(v), 3);
        }
        // deleting almost everyone floors the requirement at 1
        let del = delete_nodes(&f, &set(6, &[1, 2, 3, 4, 5]), ThresholdMode::Preserve);
        assert_eq!(del.fbas.threshold(0), 1);
        assert!(del.fbas.is_quorum(&Bitset::full(1)));
    }

    #[test]
    fn identity_deletion_changes_nothing() {
        let f = random_fbas(9, 3, 2);
        for mode in [ThresholdMode::Recompute, ThresholdMode::Preserve] {
            let del = delete_nodes(&f, &Bitset::new(9), mode);
            assert_eq!(del.fbas, f);
            assert_eq!(del.kept, (0..9).collect::<Vec<u32>>());
        }
    }

    #[test]
    fn preserve_mode_keeps_surviving_quorum_parts_alive() {
        // whatever remains of a quorum after deleting an arbitrary set is
        // still a quorum of the deleted system under preserved thresholds
        for seed in 0..20 {
            let f = random_fbas(12, 4, seed);
            let mut rng = seeded_rng(seed ^ 0xabc);
            let Some(q) = f.quorum_within(&Bitset::full(12)) else { continue };
            let b = Bitset::from_indices(12, (0..12).filter(|_| rng.gen_bool(0.3)));
            if q.is_subset_of(&b) {
                continue;
            }
            let del = delete_nodes(&f, &b, ThresholdMode::Preserve);
            let mapped = Bitset::from_indices(
                del.kept.len(),
                del.kept
                    .iter()
                    .enumerate()
                    .filter(|&(_, &old)| q.contains(old as usize))
                    .map(|(new, _)| new),
            );
            assert!(del.fbas.is_quorum(&mapped), "seed {seed}");
        }
    }

    #[test]
    fn quorums_survive_deletion_of_outsiders() {
        // deleting nodes outside a quorum leaves it a quorum in both modes,
        // modulo reindexing
        for seed in 0..10 {
            let f = random_fbas(12, 4, seed);
            let Some(q) = f.quorum_within(&Bitset::full(12)) else { continue };
            let mut outside = q.complement();
            // keep one outsider around so deletion is nontrivial
            let keep = outside.iter().next();
            if let Some(keep) = keep {
                outside.remove(keep);
            }
            for mode in [ThresholdMode::Recompute, ThresholdMode::Preserve] {
                let del = delete_nodes(&f, &outside, mode);
                let mapped = Bitset::from_indices(
                    del.kept.len(),
                    del.kept
                        .iter()
                        .enumerate()
                        .filter(|&(_, &old)| q.contains(old as usize))
                        .map(|(new, _)| new),
                );
                assert!(
                    del.fbas.is_quorum(&mapped),
                    "seed {seed}, {mode:?}: quorum broken by outside deletion"
                );
            }
        }
    }

    #[test]
    fn safety_bounds_never_exceed_true_minimum_quorum_size() {
        for seed in 0..20 {
            let f = random_fbas(10, 3, seed);
            let cert = determine_safety(&f);
            for v in 0..10u32 {
                if let Some(q) = brute_force_min_quorum(&f, v).unwrap() {
                    assert!(
                        cert.bounds[v as usize] <= q.count(),
                        "seed {seed}: bound {} exceeds min quorum {} at node {v}",
                        cert.bounds[v as usize],
                        q.count()
                    );
                }
            }
        }
    }

    #[test]
    fn safety_verdicts_never_contradict_exhaustive_search() {
        // sparse systems exercise the unsafe side, dense ones the safe side
        let mut safe_seen = 0;
        let mut unsafe_seen = 0;
        for extra in [1, 3, 12] {
            for seed in 0..20 {
                let f = random_fbas(9, extra, seed);
                let cert = determine_safety(&f);
                let truth = brute_force_quorum_intersection(&f).unwrap();
                if cert.safe {
                    safe_seen += 1;
                    assert!(truth, "extra {extra}, seed {seed}: certified safe, quorums disjoint");
                }
                if !truth {
                    unsafe_seen += 1;
                    assert!(!cert.safe, "extra {extra}, seed {seed}: disjoint yet certified");
                }
            }
        }
        assert!(safe_seen > 0, "no random system was certifiably safe");
        assert!(unsafe_seen > 0, "no random system had disjoint quorums");
    }

    #[test]
    fn whole_node_set_is_always_a_quorum() {
        for seed in 0..10 {
            let f = random_fbas(14, 3, seed);
            assert!(f.is_quorum(&Bitset::full(14)));
        }
    }

    #[test]
    fn majority_thresholds_suffice_for_intersection() {
        // when every smallest slice is a majority, intersection is
        // immediate; the exhaustive oracle must agree
        for seed in 0..10 {
            let mut rng = seeded_rng(seed);
            let n = 8;
            let mut trust = Vec::with_capacity(n);
            for v in 0..n {
                let want = rng.gen_range(6..=n);
                let mut s = Bitset::new(n);
                s.insert(v);
                while s.count() < want {
                    s.insert(rng.gen_range(0..n));
                }
                trust.push(s);
            }
            let f = Fbas::from_trust(trust).unwrap();
            assert!((0..n as u32).all(|v| 2 * f.threshold(v) > n));
            assert!(determine_safety(&f).safe);
            assert!(brute_force_quorum_intersection(&f).unwrap());
        }
    }

    #[test]
    fn dset_is_monotone_and_idempotent() {
        for seed in 0..10 {
            let f = random_fbas(12, 3, seed);
            let mut rng = seeded_rng(seed + 100);
            let small = Bitset::from_indices(12, (0..12).filter(|_| rng.gen_bool(0.2)));
            let mut big = small.clone();
            for v in 0..12 {
                if rng.gen_bool(0.2) {
                    big.insert(v);
                }
            }
            let ds_small = determine_dset(&f, &small).dset;
            let ds_big = determine_dset(&f, &big).dset;
            assert!(ds_small.is_subset_of(&ds_big), "seed {seed}");
            assert_eq!(determine_dset(&f, &ds_small).dset, ds_small, "seed {seed}");
        }
    }

    #[test]
    fn brute_force_refuses_oversized_systems() {
        let f = complete(17);
        assert!(matches!(
            brute_force_min_quorum(&f, 0),
            Err(Error::TooLarge { nodes: 17, bound: 16 })
        ));
        assert!(brute_force_quorum_intersection(&f).is_err());
    }

    #[test]
    fn min_quorum_of_complete_system_is_a_supermajority() {
        let f = complete(7);
        let q = brute_force_min_quorum(&f, 3).unwrap().unwrap();
        assert_eq!(q.count(), supermajority_threshold(7));
        assert!(q.contains(3));
    }

    #[test]
    fn text_round_trip_is_byte_identical() {
        let f = random_fbas(11, 3, 5);
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        let back = Fbas::read_text(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let mut again = Vec::new();
        back.write_text(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn text_reader_rejects_corrupt_input() {
        let cases: &[&str] = &[
            "",
            "fbas v2 nodes=1\n0: 0\n",
            "fbas v1 nodes=1\n",
            "fbas v1 nodes=1\n0 0\n",
            "fbas v1 nodes=1\nx: 0\n",
            "fbas v1 nodes=1\n0: 3\n",
            "fbas v1 nodes=2\n0: 0\n0: 1\n",
        ];
        for case in cases {
            assert!(Fbas::read_text(case.as_bytes()).is_err(), "accepted {case:?}");
        }
    }
}
