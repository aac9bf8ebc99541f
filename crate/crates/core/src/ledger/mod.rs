//! Hash-chained, Merkle-rooted blocks of attested supply-chain transactions.

mod block;
mod event;
pub mod merkle;
mod tx;
mod validate;

pub use block::{block_hash, make_block, Block, BlockError, BlockHeader, HEADER_LEN};
pub use event::{EventError, Stage, SupplyChainEvent};
pub use merkle::merkle_root;
pub use tx::{BiometricAttestation, Transaction};
pub use validate::{
    validate_block, validate_chain, validate_chain_with_head, AttestationFault, ChainFault, ValidationFailure,
};

use serde::{Deserialize, Serialize};

/// An ordered list of blocks starting at genesis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chain {
    blocks: Vec<Block>,
}

impl Default for Chain {
    fn default() -> Self {
        Self::new()
    }
}

impl Chain {
    pub fn new() -> Self {
        Chain { blocks: vec![Block::genesis()] }
    }

    /// Wraps blocks as-is; use [`validate_chain`] before trusting the result.
    ///
    /// Panics if `blocks` is empty.
    pub fn from_blocks(blocks: Vec<Block>) -> Self {
        assert!(!blocks.is_empty(), "a chain holds at least one block");
        Chain { blocks }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("chain always holds genesis")
    }

    pub fn height(&self) -> u64 {
        self.tip().height()
    }

    pub fn block_at(&self, height: u64) -> Option<&Block> {
        self.blocks.get(usize::try_from(height).ok()?)
    }

    /// Appends without validation. Callers validate first.
    pub fn push(&mut self, block: Block) {
        self.blocks.push(block);
    }

    pub fn tx_count(&self) -> usize {
        self.blocks.iter().map(|b| b.transactions.len()).sum()
    }

    /// Builds and appends a block over the current tip.
    pub fn extend(&mut self, txs: Vec<Transaction>, timestamp: u64, proposer_id: u32) -> Result<&Block, BlockError> {
        let block = make_block(self.tip(), txs, timestamp, proposer_id)?;
        self.blocks.push(block);
        Ok(self.tip())
    }
}
