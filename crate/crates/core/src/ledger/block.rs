use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::merkle::merkle_root;
use super::tx::Transaction;
use crate::codec::{DecodeError, Reader, Writer};
use crate::constants::BLOCK_VERSION;
use crate::hash::Hash32;

/// Canonical header size: 4 + 8 + 32 + 32 + 8 + 4.
pub const HEADER_LEN: usize = 88;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockHeader {
    pub version: u32,
    pub height: u64,
    pub prev_hash: Hash32,
    pub merkle_root: Hash32,
    pub timestamp: u64,
    pub proposer_id: u32,
}

impl BlockHeader {
    pub fn genesis() -> Self {
        BlockHeader {
            version: BLOCK_VERSION,
            height: 0,
            prev_hash: Hash32::ZERO,
            merkle_root: Hash32::ZERO,
            timestamp: 0,
            proposer_id: 0,
        }
    }

    pub fn canonical_bytes(&self) -> [u8; HEADER_LEN] {
        let mut w = Writer::with_capacity(HEADER_LEN);
        w.u32(self.version)
            .u64(self.height)
            .hash(&self.prev_hash)
            .hash(&self.merkle_root)
            .u64(self.timestamp)
            .u32(self.proposer_id);
        w.into_bytes().try_into().expect("header encoding is fixed width")
    }

    pub fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(BlockHeader {
            version: r.u32()?,
            height: r.u64()?,
            prev_hash: r.hash()?,
            merkle_root: r.hash()?,
            timestamp: r.u64()?,
            proposer_id: r.u32()?,
        })
    }

    pub fn hash(&self) -> Hash32 {
        Hash32::digest(&self.canonical_bytes())
    }
}

pub fn block_hash(header: &BlockHeader) -> Hash32 {
    header.hash()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<Transaction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("transaction {tx_index} carries a rejected attestation")]
    UnattestedTx { tx_index: usize },
    #[error("blocks must carry at least one transaction")]
    EmptyBlock,
}

impl Block {
    pub fn genesis() -> Self {
        Block { header: BlockHeader::genesis(), transactions: Vec::new() }
    }

    pub fn height(&self) -> u64 {
        self.header.height
    }

    pub fn hash(&self) -> Hash32 {
        self.header.hash()
    }

    pub fn encode_into(&self, w: &mut Writer) {
        w.raw(&self.header.canonical_bytes());
        w.u32(u32::try_from(self.transactions.len()).expect("tx count exceeds u32"));
        for tx in &self.transactions {
            tx.encode_into(w);
            w.hash(&tx.tx_id);
        }
    }

    /// Reads header, tx count and each transaction followed by its stored id.
    pub fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let header = BlockHeader::decode_from(r)?;
        let count = r.u32()? as usize;
        let mut transactions = Vec::with_capacity(count.min(r.remaining() / 200 + 1));
        for _ in 0..count {
            let mut tx = Transaction::decode_from(r)?;
            tx.tx_id = r.hash()?;
            transactions.push(tx);
        }
        Ok(Block { header, transactions })
    }
}

/// Builds the block extending `prev`. Every transaction must carry an
/// accepted attestation.
pub fn make_block(prev: &Block, txs: Vec<Transaction>, timestamp: u64, proposer_id: u32) -> Result<Block, BlockError> {
    if txs.is_empty() {
        return Err(BlockError::EmptyBlock);
    }
    if let Some(tx_index) = txs.iter().position(|tx| !tx.attestation.accepted) {
        return Err(BlockError::UnattestedTx { tx_index });
    }
    let header = BlockHeader {
        version: BLOCK_VERSION,
        height: prev.header.height + 1,
        prev_hash: prev.hash(),
        merkle_root: merkle_root(&txs),
        timestamp,
        proposer_id,
    };
    Ok(Block { header, transactions: txs })
}
