use serde::Serialize;

use crate::hash::Hash32;
use crate::ledger::{Block, Transaction};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Proposal {
        block: Block,
        proposer_id: u32,
        view: u32,
    },
    Vote {
        voter_id: u32,
        height: u64,
        block_hash: Hash32,
        approve: bool,
    },
    /// Carries the committed block so lagging nodes can adopt it.
    Commit {
        height: u64,
        block_hash: Hash32,
        block: Block,
    },
    /// Mempool gossip of a transaction whose attestation was accepted at its gateway.
    Tx {
        tx: Transaction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MessageKind {
    Proposal,
    Vote,
    Commit,
    Tx,
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::Proposal { .. } => MessageKind::Proposal,
            Payload::Vote { .. } => MessageKind::Vote,
            Payload::Commit { .. } => MessageKind::Commit,
            Payload::Tx { .. } => MessageKind::Tx,
        }
    }
}

/// An outgoing payload addressed to one peer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub to: u32,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: u32,
    pub to: u32,
    pub payload: Payload,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}
