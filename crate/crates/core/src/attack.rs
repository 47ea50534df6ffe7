//! Sybil-attack injection into an honest security state.
//!
//! An attack adds freshly minted adversarial accounts, wires them together
//! with a stake budget internal to the Sybil region, and buys mutual links
//! into a sampled set of naive honest nodes with a second budget. All links
//! are installed through ordinary statements, so the resulting state is
//! reachable ledger content plus the recorded exogenous minting.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::ledger::{LinkStatement, SecurityState};

/// Shape and budget of an injected Sybil attack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackParams {
    /// Number of Sybil identities to add.
    pub n_s: usize,
    /// Stake budget internal to the Sybil region, counted once per mutual
    /// pair; must be a multiple of `stake_per_link`.
    pub l_s: u64,
    /// Stake budget on honest-to-Sybil links, counted once per mutual
    /// pair; must be a multiple of `stake_per_link`.
    pub l_n: u64,
    /// Fraction of honest nodes that are naive enough to reciprocate a
    /// stranger's link, in `[0, 1]`.
    pub f_n: f64,
    /// Stake committed on each side of every injected link.
    pub stake_per_link: u64,
    /// Seed for pair sampling.
    pub seed: u64,
}

impl AttackParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.f_n) {
            return Err(Error::arg(format!("naive fraction {} outside [0, 1]", self.f_n)));
        }
        if self.stake_per_link == 0 {
            return Err(Error::arg("stake per link must be positive"));
        }
        if self.l_s % self.stake_per_link != 0 || self.l_n % self.stake_per_link != 0 {
            return Err(Error::arg(format!(
                "budgets l_s={} l_n={} not multiples of the link stake {}",
                self.l_s, self.l_n, self.stake_per_link
            )));
        }
        Ok(())
    }
}

/// Benign newcomer: a single fresh identity attaching to the network with
/// two minimal mutual links and no region of its own.
pub fn benign_params(seed: u64) -> AttackParams {
    AttackParams { n_s: 1, l_s: 0, l_n: 2, f_n: 1.0, stake_per_link: 1, seed }
}

/// Full-strength adversary: one Sybil per three honest nodes, total
/// Sybil-incident stake at half the honest region's committed stake.
///
/// A quarter of the attack allowance buys honest links, spread evenly
/// across the naive, keeping the cut to the honest region sparse; the
/// remaining three quarters densify the Sybil region itself. Both budgets
/// clamp to what is combinatorially available on small states.
pub fn byzantine_params(state: &SecurityState, seed: u64) -> AttackParams {
    let n_h = state.node_count() as u64;
    let n_s = n_h / 3;
    let spl = 1;
    // counting once per pair, half the honest stake is incident once the
    // two budgets together spend a quarter of it
    let cap = state.committed_stake() / 4;
    let l_n = (cap / 4).min(n_h * n_s * spl);
    let internal_pairs = n_s * n_s.saturating_sub(1) / 2;
    let l_s = cap.saturating_sub(l_n).min(internal_pairs * spl);
    AttackParams { n_s: n_s as usize, l_s, l_n, f_n: 1.0, stake_per_link: spl, seed }
}

/// An attacked state plus the ground truth an evaluation scores against.
#[derive(Clone, Debug)]
pub struct AttackOutcome {
    pub state: SecurityState,
    /// The pre-attack nodes, all honest by construction.
    pub honest: Vec<NodeId>,
    /// The injected identities, ascending.
    pub sybils: Vec<NodeId>,
    /// The honest nodes willing to link with strangers, ascending.
    pub naive: Vec<NodeId>,
    /// Exogenous balance minted onto the Sybil accounts.
    pub minted: u64,
    /// Link statements applied during injection.
    pub statements: usize,
}

/// Uniform distinct pairs `(a, b)` with `a < b < n`, `count` of them.
/// Rejection-samples while the demand is sparse and enumerates the whole
/// pair space once the demand approaches it.
fn sample_internal_pairs(
    n: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let available = n * n.saturating_sub(1) / 2;
    if count > available / 2 {
        let mut all: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let (chosen, _) = all.partial_shuffle(rng, count);
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        return chosen;
    }
    let mut picked = BTreeSet::new();
    while picked.len() < count {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            picked.insert((a.min(b), a.max(b)));
        }
    }
    picked.into_iter().collect()
}

/// Distinct cross pairs `(left, right)` from `0..n_left` × `0..n_right`,
/// spread so that left-side multiplicities differ by at most one: no
/// single left node soaks up a clump of the budget. Which lefts carry an
/// extra pair and which rights they meet are drawn from `rng`.
fn sample_cross_pairs(
    n_left: usize,
    n_right: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    if count == 0 || n_left == 0 {
        return Vec::new();
    }
    let per = count / n_left;
    let extra = count % n_left;
    let mut lefts: Vec<usize> = (0..n_left).collect();
    lefts.shuffle(rng);
    let mut rights: Vec<usize> = (0..n_right).collect();
    let mut picked: Vec<(usize, usize)> = Vec::with_capacity(count);
    for (slot, &left) in lefts.iter().enumerate() {
        let want = per + usize::from(slot < extra);
        if want == 0 {
            break;
        }
        let (chosen, _) = rights.partial_shuffle(rng, want);
        for &right in chosen.iter() {
            picked.push((left, right));
        }
    }
    picked.sort_unstable();
    picked
}

/// Installs a mutual link, both sides at `stake`, low account first.
fn link_mutually(state: &mut SecurityState, a: NodeId, b: NodeId, stake: u64) -> Result<()> {
    let (lo, hi) = if a.0 < b.0 { (a, b) } else { (b, a) };
    for (origin, target) in [(lo, hi), (hi, lo)] {
        let seq = state.account(origin).map_or(0, |acct| acct.seq) + 1;
        state.apply(&LinkStatement::add_link(origin, target, stake, seq))?;
    }
    Ok(())
}

/// Injects the parameterized attack into a copy of `state`.
///
/// Sybil accounts are funded with exactly the balance their links commit,
/// so they end the injection fully staked and empty-handed; naive honest
/// nodes pay for their reciprocation out of their own balance. The honest
/// label set is every pre-attack node.
pub fn inject_attack(state: &SecurityState, params: &AttackParams) -> Result<AttackOutcome> {
    params.validate()?;
    if state.node_count() == 0 {
        return Err(Error::arg("cannot attack an empty state"));
    }
    let spl = params.stake_per_link;
    let honest: Vec<NodeId> = state.accounts().iter().map(|a| a.id).collect();
    let n_h = honest.len();

    let internal_pairs = (params.l_s / spl) as usize;
    let internal_available = params.n_s * params.n_s.saturating_sub(1) / 2;
    if internal_pairs > internal_available {
        return Err(Error::arg(format!(
            "l_s asks for {internal_pairs} Sybil pairs, only {internal_available} exist"
        )));
    }
    let naive_count = (params.f_n * n_h as f64).ceil() as usize;
    let cross_pairs = (params.l_n / spl) as usize;
    let cross_available = naive_count * params.n_s;
    if cross_pairs > cross_available {
        return Err(Error::arg(format!(
            "l_n asks for {cross_pairs} attachment pairs, only {cross_available} exist"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut naive = honest.clone();
    let (sampled, _) = naive.partial_shuffle(&mut rng, naive_count);
    let mut naive = sampled.to_vec();
    naive.sort_unstable_by_key(|v| v.0);

    let internal = sample_internal_pairs(params.n_s, internal_pairs, &mut rng);
    let cross = sample_cross_pairs(naive.len(), params.n_s, cross_pairs, &mut rng);

    // fund each Sybil with exactly the stake its sampled links commit
    let mut needed = vec![0u64; params.n_s];
    for &(a, b) in &internal {
        needed[a] += spl;
        needed[b] += spl;
    }
    for &(_, s) in &cross {
        needed[s] += spl;
    }
    let mut state = state.clone();
    let sybils: Vec<NodeId> = needed.iter().map(|&bal| state.mint_account(bal)).collect();
    let minted: u64 = needed.iter().sum();

    let mut statements = 0;
    for &(a, b) in &internal {
        link_mutually(&mut state, sybils[a], sybils[b], spl)?;
        statements += 2;
    }
    for &(v, s) in &cross {
        link_mutually(&mut state, naive[v], sybils[s], spl)?;
        statements += 2;
    }

    Ok(AttackOutcome { state, honest, sybils, naive, minted, statements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic_social_graph;

    /// Small honest state: a 12-node ring-of-cycles graph, unit stakes.
    fn base_state() -> SecurityState {
        let g = synthetic_social_graph(12, 1, 7).unwrap();
        SecurityState::from_graph(&g, 100).unwrap()
    }

    fn is_sybil(outcome: &AttackOutcome, v: NodeId) -> bool {
        outcome.sybils.binary_search_by_key(&v.0, |s| s.0).is_ok()
    }

    #[test]
    fn benign_attack_attaches_one_sybil_twice() {
        let state = base_state();
        let out = inject_attack(&state, &benign_params(3)).unwrap();
        assert_eq!(out.sybils.len(), 1);
        assert_eq!(out.naive.len(), 12);
        assert_eq!(out.minted, 2);
        assert_eq!(out.statements, 4);
        let sybil = out.sybils[0];
        let links = out.state.links().out(sybil);
        assert_eq!(links.len(), 2);
        for &(target, stake) in links {
            assert_eq!(stake, 1);
            assert_eq!(out.state.links().stake(target, sybil), Some(1));
        }
        // the sybil committed everything it was given
        assert_eq!(out.state.account(sybil).unwrap().balance, 0);
    }

    #[test]
    fn null_attack_changes_nothing() {
        let state = base_state();
        let params = AttackParams {
            n_s: 0,
            l_s: 0,
            l_n: 0,
            f_n: 0.5,
            stake_per_link: 1,
            seed: 9,
        };
        let out = inject_attack(&state, &params).unwrap();
        assert_eq!(out.state, state);
        assert!(out.sybils.is_empty());
        assert_eq!(out.minted, 0);
        assert_eq!(out.statements, 0);
    }

    #[test]
    fn injection_is_deterministic() {
        let state = base_state();
        let params = AttackParams {
            n_s: 4,
            l_s: 3,
            l_n: 5,
            f_n: 0.75,
            stake_per_link: 1,
            seed: 21,
        };
        let a = inject_attack(&state, &params).unwrap();
        let b = inject_attack(&state, &params).unwrap();
        assert_eq!(a.state, b.state);
        assert_eq!(a.naive, b.naive);
        assert_eq!(a.sybils, b.sybils);
        let c = inject_attack(&state, &AttackParams { seed: 22, ..params }).unwrap();
        assert_ne!(a.state, c.state);
    }

    #[test]
    fn budgets_are_spent_exactly() {
        let state = base_state();
        let params = AttackParams {
            n_s: 5,
            l_s: 8,
            l_n: 6,
            f_n: 1.0,
            stake_per_link: 2,
            seed: 4,
        };
        let out = inject_attack(&state, &params).unwrap();
        let links = out.state.links();
        let mut internal = 0u64;
        let mut cross = 0u64;
        for &s in &out.sybils {
            for &(target, stake) in links.out(s) {
                if is_sybil(&out, target) {
                    internal += stake;
                } else {
                    cross += stake;
                }
            }
        }
        // internal stake counts both sybil sides, cross only the sybil side
        assert_eq!(internal, 2 * params.l_s);
        assert_eq!(cross, params.l_n);
        assert_eq!(out.minted, 2 * params.l_s + params.l_n);
        assert_eq!(out.state.audit_supply(), out.state.supply());
        for &s in &out.sybils {
            assert_eq!(out.state.account(s).unwrap().balance, 0);
        }
    }

    #[test]
    fn honest_region_subgraph_is_untouched() {
        let state = base_state();
        let out = inject_attack(&state, &byzantine_params(&state, 11)).unwrap();
        let n_h = state.node_count() as u32;
        for v in state.links().nodes() {
            let before = state.links().out(v);
            let after: Vec<(NodeId, u64)> = out
                .state
                .links()
                .out(v)
                .iter()
                .copied()
                .filter(|&(t, _)| t.0 < n_h)
                .collect();
            assert_eq!(after.as_slice(), before, "honest arcs of {v} changed");
        }
    }

    #[test]
    fn injected_links_are_reciprocal_and_survive_projection() {
        let state = base_state();
        let out = inject_attack(&state, &byzantine_params(&state, 2)).unwrap();
        let walk = out.state.to_walk_graph();
        // every sybil with any link at all keeps it through reciprocal
        // pruning; with the byzantine budgets each sybil has at least one
        for &s in &out.sybils {
            if !out.state.links().out(s).is_empty() {
                assert!(walk.origin().contains(&s), "sybil {s} pruned despite mutual links");
            }
        }
    }

    #[test]
    fn byzantine_preset_respects_the_incident_stake_cap() {
        let state = base_state();
        let honest_stake = state.committed_stake();
        let params = byzantine_params(&state, 5);
        assert_eq!(params.n_s, 4);
        // both budgets together spend a quarter, so incident stake
        // (counting both sides of internal pairs) is at most half
        assert!(2 * (params.l_s + params.l_n) <= honest_stake);
        let out = inject_attack(&state, &params).unwrap();
        let links = out.state.links();
        let mut incident = 0u64;
        for v in links.nodes() {
            for &(target, stake) in links.out(v) {
                if is_sybil(&out, v) || is_sybil(&out, target) {
                    incident += stake;
                }
            }
        }
        assert!(incident <= honest_stake, "incident {incident} of {honest_stake}");
    }

    #[test]
    fn budget_overruns_and_bad_fractions_are_rejected() {
        let state = base_state();
        let ok = AttackParams { n_s: 3, l_s: 0, l_n: 0, f_n: 1.0, stake_per_link: 1, seed: 0 };
        // more internal pairs than 3 sybils offer
        assert!(inject_attack(&state, &AttackParams { l_s: 4, ..ok.clone() }).is_err());
        // more attachments than (naive x sybil) pairs
        assert!(inject_attack(&state, &AttackParams { l_n: 37, ..ok.clone() }).is_err());
        // naive set too small for the attachments
        assert!(inject_attack(
            &state,
            &AttackParams { l_n: 4, f_n: 0.1, n_s: 1, ..ok.clone() }
        )
        .is_err());
        assert!(inject_attack(&state, &AttackParams { f_n: 1.5, ..ok.clone() }).is_err());
        assert!(inject_attack(&state, &AttackParams { stake_per_link: 0, ..ok.clone() }).is_err());
        // budgets must be whole links
        assert!(inject_attack(
            &state,
            &AttackParams { l_s: 3, stake_per_link: 2, ..ok }
        )
        .is_err());
    }

    #[test]
    fn pair_samplers_cover_sparse_and_dense_demands() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for count in [0, 1, 5, 10] {
            let pairs = sample_internal_pairs(5, count, &mut rng);
            assert_eq!(pairs.len(), count);
            let distinct: BTreeSet<_> = pairs.iter().collect();
            assert_eq!(distinct.len(), count);
            assert!(pairs.windows(2).all(|w| w[0] < w[1]), "unsorted: {pairs:?}");
            assert!(pairs.iter().all(|&(a, b)| a < b && b < 5));
        }
        for count in [0, 3, 11, 12] {
            let pairs = sample_cross_pairs(4, 3, count, &mut rng);
            assert_eq!(pairs.len(), count);
            let distinct: BTreeSet<_> = pairs.iter().collect();
            assert_eq!(distinct.len(), count);
            assert!(pairs.iter().all(|&(a, b)| a < 4 && b < 3));
            let mut multiplicity = [0usize; 4];
            for &(a, _) in &pairs {
                multiplicity[a] += 1;
            }
            let spread =
                multiplicity.iter().max().unwrap() - multiplicity.iter().min().unwrap();
            assert!(spread <= 1, "count {count} clumped: {multiplicity:?}");
        }
    }
}
