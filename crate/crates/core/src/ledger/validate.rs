//! Block and chain validation.
//!
//! Checks run in a fixed order and the first failure wins: version, height,
//! prev-hash link, non-empty body, Merkle root, each stored tx id, then each
//! attestation re-verified against the registry.

use serde::{Deserialize, Serialize};

use super::block::Block;
use super::merkle::{root_of_leaves, LEAF_PREFIX};
use super::Chain;
use crate::biometric::{ActorRegistry, BiometricError};
use crate::constants::BLOCK_VERSION;
use crate::hash::Hash32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttestationFault {
    UnknownActor,
    KeyMismatch,
    ScoreMismatch { recorded: u64, recomputed: u64 },
    VerdictMismatch { recorded: bool, recomputed: bool },
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "failure_kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValidationFailure {
    BadGenesis,
    BadVersion { found: u32 },
    BadHeight { expected: u64, found: u64 },
    BadLink,
    EmptyBlock,
    BadMerkle,
    BadTxid { tx_index: usize },
    BadAttestation { tx_index: usize, fault: AttestationFault },
    HeadMismatch { expected: Hash32, found: Hash32 },
}

impl ValidationFailure {
    pub fn kind(&self) -> &'static str {
        match self {
            ValidationFailure::BadGenesis => "BAD_GENESIS",
            ValidationFailure::BadVersion { .. } => "BAD_VERSION",
            ValidationFailure::BadHeight { .. } => "BAD_HEIGHT",
            ValidationFailure::BadLink => "BAD_LINK",
            ValidationFailure::EmptyBlock => "EMPTY_BLOCK",
            ValidationFailure::BadMerkle => "BAD_MERKLE",
            ValidationFailure::BadTxid { .. } => "BAD_TXID",
            ValidationFailure::BadAttestation { .. } => "BAD_ATTESTATION",
            ValidationFailure::HeadMismatch { .. } => "HEAD_MISMATCH",
        }
    }
}

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.kind())
    }
}

/// A chain-level failure: the first bad height and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainFault {
    pub height: u64,
    #[serde(flatten)]
    pub failure: ValidationFailure,
}

impl std::fmt::Display for ChainFault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "block {}: {}", self.height, self.failure)
    }
}

pub fn validate_block(
    block: &Block,
    prev: &Block,
    registry: &ActorRegistry,
    threshold: u64,
) -> Result<(), ValidationFailure> {
    let h = &block.header;
    if h.version != BLOCK_VERSION {
        return Err(ValidationFailure::BadVersion { found: h.version });
    }
    let expected = prev.header.height + 1;
    if h.height != expected {
        return Err(ValidationFailure::BadHeight { expected, found: h.height });
    }
    if h.prev_hash != prev.hash() {
        return Err(ValidationFailure::BadLink);
    }
    if block.transactions.is_empty() {
        return Err(ValidationFailure::EmptyBlock);
    }
    // One serialization per transaction feeds both its leaf and its id.
    let (leaves, ids): (Vec<Hash32>, Vec<Hash32>) = block
        .transactions
        .iter()
        .map(|tx| {
            let bytes = tx.canonical_bytes();
            (Hash32::digest_prefixed(LEAF_PREFIX, &[&bytes]), Hash32::digest(&bytes))
        })
        .unzip();
    if root_of_leaves(leaves) != h.merkle_root {
        return Err(ValidationFailure::BadMerkle);
    }
    if let Some(tx_index) = block.transactions.iter().zip(&ids).position(|(tx, id)| *id != tx.tx_id) {
        return Err(ValidationFailure::BadTxid { tx_index });
    }
    for (tx_index, tx) in block.transactions.iter().enumerate() {
        let a = &tx.attestation;
        let fault = match registry.verify_actor(a.actor_id, &a.encrypted_probe, threshold) {
            Err(BiometricError::UnknownActor(_)) => Some(AttestationFault::UnknownActor),
            Err(_) => Some(AttestationFault::KeyMismatch),
            Ok(d) if d.score != a.match_score => {
                Some(AttestationFault::ScoreMismatch { recorded: a.match_score, recomputed: d.score })
            }
            Ok(d) if d.accepted != a.accepted => {
                Some(AttestationFault::VerdictMismatch { recorded: a.accepted, recomputed: d.accepted })
            }
            Ok(d) if !d.accepted => Some(AttestationFault::Rejected),
            Ok(_) => None,
        };
        if let Some(fault) = fault {
            return Err(ValidationFailure::BadAttestation { tx_index, fault });
        }
    }
    Ok(())
}

/// Validates the genesis block's fixed form and every link after it.
pub fn validate_chain(chain: &Chain, registry: &ActorRegistry, threshold: u64) -> Result<(), ChainFault> {
    let blocks = chain.blocks();
    match blocks.first() {
        Some(g) if *g == Block::genesis() => {}
        _ => return Err(ChainFault { height: 0, failure: ValidationFailure::BadGenesis }),
    }
    for (i, pair) in blocks.windows(2).enumerate() {
        validate_block(&pair[1], &pair[0], registry, threshold)
            .map_err(|failure| ChainFault { height: i as u64 + 1, failure })?;
    }
    Ok(())
}

/// [`validate_chain`] plus a check that the tip hash equals a committed head
/// hash obtained out of band (e.g. from the quorum's commit record). This is
/// what protects the tip header, which no later block links to.
pub fn validate_chain_with_head(
    chain: &Chain,
    registry: &ActorRegistry,
    threshold: u64,
    committed_head: &Hash32,
) -> Result<(), ChainFault> {
    validate_chain(chain, registry, threshold)?;
    let tip = chain.tip();
    let found = tip.hash();
    if found != *committed_head {
        return Err(ChainFault {
            height: tip.height(),
            failure: ValidationFailure::HeadMismatch { expected: *committed_head, found },
        });
    }
    Ok(())
}
