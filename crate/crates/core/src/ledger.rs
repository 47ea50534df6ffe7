//! Account state and the stake-link statement log.
//!
//! Balances live on accounts; committing a link moves stake from the origin
//! account's balance onto the arc, and removing the link moves it back.
//! Total supply (balances plus committed stake) is therefore invariant
//! under every statement, accepted or rejected. Statements carry a
//! per-signer sequence number so a log replays to exactly one state.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::graph::NodeId;
use crate::walk::WalkGraph;

/// Why a statement was rejected. Rejection never mutates state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StatementError {
    #[error("unknown account {0}")]
    UnknownAccount(NodeId),
    #[error("origin and target must differ")]
    SelfLink,
    #[error("link stake must be positive")]
    ZeroValue,
    #[error("expected sequence {expected}, statement carries {got}")]
    BadSequence { expected: u64, got: u64 },
    #[error("balance {available} cannot cover stake {needed}")]
    InsufficientBalance { needed: u64, available: u64 },
    #[error("link already exists")]
    LinkExists,
    #[error("link does not exist")]
    LinkMissing,
}

/// One stake-bearing account.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub id: NodeId,
    pub balance: u64,
    /// Sequence number of the last statement this account signed.
    pub seq: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatementKind {
    /// Origin commits `value` of its balance onto the arc `origin -> target`.
    AddLink { value: u64 },
    /// Origin withdraws the link it committed; the stake returns to origin.
    RemoveLinkByOrigin,
    /// Target severs an unwanted incoming link; the stake still returns to
    /// the origin account that committed it.
    RemoveLinkByTarget,
}

/// A signed state transition. The signer is the origin for [`StatementKind::AddLink`]
/// and [`StatementKind::RemoveLinkByOrigin`], and the target for
/// [`StatementKind::RemoveLinkByTarget`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStatement {
    pub origin: NodeId,
    pub target: NodeId,
    /// Must equal the signer's current sequence number plus one.
    pub seq: u64,
    pub kind: StatementKind,
}

impl LinkStatement {
    pub fn add_link(origin: NodeId, target: NodeId, value: u64, seq: u64) -> Self {
        LinkStatement { origin, target, seq, kind: StatementKind::AddLink { value } }
    }

    pub fn remove_by_origin(origin: NodeId, target: NodeId, seq: u64) -> Self {
        LinkStatement { origin, target, seq, kind: StatementKind::RemoveLinkByOrigin }
    }

    pub fn remove_by_target(origin: NodeId, target: NodeId, seq: u64) -> Self {
        LinkStatement { origin, target, seq, kind: StatementKind::RemoveLinkByTarget }
    }

    pub fn signer(&self) -> NodeId {
        match self.kind {
            StatementKind::AddLink { .. } | StatementKind::RemoveLinkByOrigin => self.origin,
            StatementKind::RemoveLinkByTarget => self.target,
        }
    }
}

/// Accounts plus the directed graph of committed stake links.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecurityState {
    accounts: Vec<Account>,
    links: DirectedGraph,
    supply: u64,
}

impl SecurityState {
    /// `n` accounts, each holding `balance`, no links.
    pub fn genesis(n: usize, balance: u64) -> Self {
        let accounts = (0..n as u32)
            .map(|i| Account { id: NodeId(i), balance, seq: 0 })
            .collect();
        SecurityState {
            accounts,
            links: DirectedGraph::empty(n),
            supply: balance * n as u64,
        }
    }

    /// Bootstraps a state from an existing graph: every node becomes an
    /// account with `genesis_balance`, then each arc is installed through a
    /// regular [`LinkStatement`], committing the arc's stake from the
    /// origin's balance.
    pub fn from_graph(links: &DirectedGraph, genesis_balance: u64) -> Result<Self> {
        let mut state = SecurityState::genesis(links.node_count(), genesis_balance);
        for tail in links.nodes() {
            for &(head, stake) in links.out(tail) {
                let seq = state.accounts[tail.index()].seq + 1;
                state.apply(&LinkStatement::add_link(tail, head, stake, seq))?;
            }
        }
        Ok(state)
    }

    pub fn node_count(&self) -> usize {
        self.accounts.len()
    }

    pub fn account(&self, v: NodeId) -> Option<&Account> {
        self.accounts.get(v.index())
    }

    pub fn accounts(&self) -> &[Account] {
        &self.accounts
    }

    pub fn links(&self) -> &DirectedGraph {
        &self.links
    }

    /// Fixed total of all balances plus all committed link stake.
    pub fn supply(&self) -> u64 {
        self.supply
    }

    /// Recomputes balances plus committed stake from scratch; equals
    /// [`SecurityState::supply`] whenever the state is consistent.
    pub fn audit_supply(&self) -> u64 {
        let balances: u64 = self.accounts.iter().map(|a| a.balance).sum();
        balances + self.committed_stake()
    }

    /// Sum of stake committed on all links.
    pub fn committed_stake(&self) -> u64 {
        self.links
            .nodes()
            .flat_map(|v| self.links.out(v).iter().map(|&(_, s)| s))
            .sum()
    }

    /// Creates a new account funded out of thin air (the supply grows).
    /// Experiment code uses this to stand up adversarial identities; it is
    /// not reachable through the statement log.
    pub(crate) fn mint_account(&mut self, balance: u64) -> NodeId {
        let id = self.links.push_node();
        self.accounts.push(Account { id, balance, seq: 0 });
        self.supply += balance;
        id
    }

    /// Validates and applies one statement in place. On rejection the state
    /// is untouched; validation completes before any mutation starts.
    pub fn apply(&mut self, stmt: &LinkStatement) -> std::result::Result<(), StatementError> {
        if stmt.origin == stmt.target {
            return Err(StatementError::SelfLink);
        }
        let n = self.accounts.len();
        if stmt.origin.index() >= n {
            return Err(StatementError::UnknownAccount(stmt.origin));
        }
        if stmt.target.index() >= n {
            return Err(StatementError::UnknownAccount(stmt.target));
        }
        let signer = stmt.signer();
        let expected = self.accounts[signer.index()].seq + 1;
        if stmt.seq != expected {
            return Err(StatementError::BadSequence { expected, got: stmt.seq });
        }
        match stmt.kind {
            StatementKind::AddLink { value } => {
                if value == 0 {
                    return Err(StatementError::ZeroValue);
                }
                if self.links.has_arc(stmt.origin, stmt.target) {
                    return Err(StatementError::LinkExists);
                }
                let available = self.accounts[stmt.origin.index()].balance;
                if available < value {
                    return Err(StatementError::InsufficientBalance { needed: value, available });
                }
                self.accounts[stmt.origin.index()].balance -= value;
                self.links.insert_arc(stmt.origin, stmt.target, value);
            }
            StatementKind::RemoveLinkByOrigin | StatementKind::RemoveLinkByTarget => {
                if !self.links.has_arc(stmt.origin, stmt.target) {
                    return Err(StatementError::LinkMissing);
                }
                let stake = self.links.remove_arc(stmt.origin, stmt.target).unwrap();
                self.accounts[stmt.origin.index()].balance += stake;
            }
        }
        self.accounts[signer.index()].seq = stmt.seq;
        Ok(())
    }

    /// Pure variant of [`SecurityState::apply`]: returns the successor
    /// state, leaving `self` untouched.
    pub fn apply_statement(
        &self,
        stmt: &LinkStatement,
    ) -> std::result::Result<SecurityState, StatementError> {
        let mut next = self.clone();
        next.apply(stmt)?;
        Ok(next)
    }

    /// Projects the link graph onto its reciprocal core: an arc survives
    /// only if the reverse arc exists, and each side keeps the stake it
    /// committed. Nodes with no surviving arcs are dropped; the result uses
    /// fresh dense ids with a mapping back to account ids.
    pub fn to_walk_graph(&self) -> WalkGraph {
        let mut origin: Vec<NodeId> = Vec::new();
        let mut walk_id = vec![u32::MAX; self.accounts.len()];
        for v in self.links.nodes() {
            let reciprocal = self
                .links
                .out(v)
                .iter()
                .any(|&(h, _)| self.links.has_arc(h, v));
            if reciprocal {
                walk_id[v.index()] = origin.len() as u32;
                origin.push(v);
            }
        }
        let mut arcs: Vec<(u32, u32, u64)> = Vec::new();
        for &v in &origin {
            for &(h, stake) in self.links.out(v) {
                if self.links.has_arc(h, v) {
                    arcs.push((walk_id[v.index()], walk_id[h.index()], stake));
                }
            }
        }
        WalkGraph::from_labeled_arcs(origin, arcs)
            .expect("reciprocal projection always yields a valid walk graph")
    }
}

/// Writes statements one per line in the versioned log format.
pub fn write_statement_log<W: Write>(mut w: W, statements: &[LinkStatement]) -> Result<()> {
    writeln!(w, "stake-ledger-log v1 statements={}", statements.len())?;
    for s in statements {
        match s.kind {
            StatementKind::AddLink { value } => {
                writeln!(w, "add {} {} {} {}", s.origin, s.target, s.seq, value)?
            }
            StatementKind::RemoveLinkByOrigin => {
                writeln!(w, "remove-origin {} {} {}", s.origin, s.target, s.seq)?
            }
            StatementKind::RemoveLinkByTarget => {
                writeln!(w, "remove-target {} {} {}", s.origin, s.target, s.seq)?
            }
        }
    }
    Ok(())
}

/// Parses a log produced by [`write_statement_log`].
pub fn read_statement_log<R: BufRead>(r: R) -> Result<Vec<LinkStatement>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty statement log"))??;
    let rest = header
        .strip_prefix("stake-ledger-log v1")
        .ok_or_else(|| Error::parse(1, "expected `stake-ledger-log v1` header"))?;
    let declared: usize = rest
        .trim()
        .strip_prefix("statements=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(1, "header missing statements= field"))?;

    let mut out = Vec::with_capacity(declared);
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let mut it = line.split_ascii_whitespace();
        let verb = it.next().ok_or_else(|| Error::parse(line_no, "empty statement"))?;
        let mut field = |name: &str| -> Result<u64> {
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(line_no, format!("missing or bad {name}")))
        };
        let origin = NodeId(field("origin")? as u32);
        let target = NodeId(field("target")? as u32);
        let seq = field("seq")?;
        let stmt = match verb {
            "add" => LinkStatement::add_link(origin, target, field("value")?, seq),
            "remove-origin" => LinkStatement::remove_by_origin(origin, target, seq),
            "remove-target" => LinkStatement::remove_by_target(origin, target, seq),
            other => return Err(Error::parse(line_no, format!("unknown verb `{other}`"))),
        };
        if it.next().is_some() {
            return Err(Error::parse(line_no, "trailing tokens"));
        }
        out.push(stmt);
    }
    if out.len() != declared {
        return Err(Error::arg(format!(
            "log declared {declared} statements but contained {}",
            out.len()
        )));
    }
    Ok(out)
}
