//! Permissioned quorum voting among member nodes.
//!
//! One proposer per `(height, view)` rotates round-robin. Nodes re-validate a
//! proposal (including every biometric attestation), broadcast an approve or
//! reject vote, and commit a block once `floor(2n/3) + 1` approvals for its
//! hash are observed. A node approves at most one proposal per
//! `(height, view)`. Timeouts bump the view and rotate the proposer.

mod message;
mod node;

pub use message::{Envelope, Message, MessageKind, Payload};
pub use node::{Node, NodeConfig, ProposeError, Rejection, RejectionReason};

use serde::{Deserialize, Serialize};

/// How a node deviates from the protocol, if at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Behavior {
    Honest,
    /// Never sends or handles anything.
    Crashed,
    /// As proposer, sends two different blocks to different peers and votes for both.
    Equivocator,
    /// As proposer, corrupts one transaction after building the block.
    Tamperer,
    /// Votes the negation of its own validation verdict.
    VoteFlipper,
}

impl Behavior {
    pub fn is_honest(self) -> bool {
        self == Behavior::Honest
    }
}

/// Approvals needed to commit: `floor(2n/3) + 1`.
pub fn quorum_size(n: u32) -> usize {
    (2 * n as usize) / 3 + 1
}

/// Largest fault count `f` with `n >= 3f + 1`.
pub fn max_faulty(n: u32) -> usize {
    (n as usize).saturating_sub(1) / 3
}

pub fn proposer_for(height: u64, view: u32, n: u32) -> u32 {
    ((height + u64::from(view)) % u64::from(n)) as u32
}
