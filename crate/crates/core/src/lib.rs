//! Stake-weighted trust graphs, random-walk Sybil inference, and federated
//! quorum safety checking.
//!
//! The pipeline runs in three stages. A [`ledger::SecurityState`] tracks
//! accounts whose balances back directed trust links; projecting its mutual
//! links yields a [`walk::WalkGraph`] on which each verifier runs a short
//! stake-weighted random walk and squashes the resulting visit mass into
//! per-node honesty scores ([`walk::honesty_scores`]). A cut-off sweep
//! ([`walk::select_cutoff`]) turns scores into the verifier's honest set.
//! Collecting every node's honest set builds a federated quorum system
//! ([`fbas::Fbas`]) whose liveness and safety are then checked directly:
//! ill-behaved nodes are identified and deleted as a dispensable set, and a
//! fixed-point certifies that all remaining quorums pairwise intersect.
//!
//! All randomness is seeded explicitly and every collection in a
//! report-affecting path iterates in a fixed order, so identical inputs
//! produce byte-identical outputs.

pub mod attack;
pub mod bits;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fbas;
pub mod graph;
pub mod ledger;
pub mod testkit;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{DirectedGraph, NodeId};
pub use ledger::{LinkStatement, SecurityState};
pub use walk::{CutoffParams, ScoreMap, WalkGraph};
