//! Binary Merkle tree over transactions.
//!
//! Leaves are `SHA-256(0x00 || canonical tx bytes)`, internal nodes are
//! `SHA-256(0x01 || left || right)`, an odd node at any level is paired with
//! itself, and the empty list has the all-zero root.

use super::tx::Transaction;
use crate::hash::Hash32;

pub const LEAF_PREFIX: u8 = 0x00;
pub const NODE_PREFIX: u8 = 0x01;

pub fn leaf_hash(tx: &Transaction) -> Hash32 {
    Hash32::digest_prefixed(LEAF_PREFIX, &[&tx.canonical_bytes()])
}

pub fn node_hash(left: &Hash32, right: &Hash32) -> Hash32 {
    Hash32::digest_prefixed(NODE_PREFIX, &[left.as_bytes(), right.as_bytes()])
}

pub fn merkle_root(txs: &[Transaction]) -> Hash32 {
    let leaves: Vec<Hash32> = txs.iter().map(leaf_hash).collect();
    root_of_leaves(leaves)
}

pub fn root_of_leaves(mut level: Vec<Hash32>) -> Hash32 {
    if level.is_empty() {
        return Hash32::ZERO;
    }
    while level.len() > 1 {
        level = level.chunks(2).map(|pair| node_hash(&pair[0], pair.get(1).unwrap_or(&pair[0]))).collect();
    }
    level[0]
}
