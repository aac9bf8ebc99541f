//! On-disk chain format.
//!
//! `"BBC1"`, a u32 block count, then per block: the 88 canonical header bytes,
//! a u32 transaction count and, per transaction, its canonical bytes followed
//! by the stored 32-byte tx id. JSON export mirrors the same fields.

use std::ops::Range;

use crate::codec::{DecodeError, Reader, Writer};
use crate::ledger::{Block, Chain};

pub const MAGIC: &[u8; 4] = b"BBC1";

pub fn encode_chain(chain: &Chain) -> Vec<u8> {
    let mut w = Writer::with_capacity(8 + chain.blocks().len() * 512);
    w.raw(MAGIC);
    w.u32(u32::try_from(chain.blocks().len()).expect("block count exceeds u32"));
    for block in chain.blocks() {
        block.encode_into(&mut w);
    }
    w.into_bytes()
}

pub fn decode_chain(bytes: &[u8]) -> Result<Chain, DecodeError> {
    decode_with_spans(bytes).map(|(chain, _)| chain)
}

/// Byte range occupied by each block in an encoded chain file.
pub fn block_spans(bytes: &[u8]) -> Result<Vec<Range<usize>>, DecodeError> {
    decode_with_spans(bytes).map(|(_, spans)| spans)
}

fn decode_with_spans(bytes: &[u8]) -> Result<(Chain, Vec<Range<usize>>), DecodeError> {
    let mut r = Reader::new(bytes);
    if r.take(4).map_err(|_| DecodeError::BadMagic)? != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let at = r.position();
    let count = r.u32()? as usize;
    if count == 0 {
        return Err(DecodeError::InvalidTag { what: "block count", value: 0, at });
    }
    // a block is at least a header plus its tx count
    if count > r.remaining() / 92 {
        return Err(DecodeError::Truncated(bytes.len()));
    }
    let mut blocks = Vec::with_capacity(count);
    let mut spans = Vec::with_capacity(count);
    for _ in 0..count {
        let start = r.position();
        blocks.push(Block::decode_from(&mut r)?);
        spans.push(start..r.position());
    }
    r.finish()?;
    Ok((Chain::from_blocks(blocks), spans))
}

pub fn to_json(chain: &Chain) -> String {
    serde_json::to_string_pretty(chain).expect("chain serializes")
}

pub fn from_json(s: &str) -> Result<Chain, serde_json::Error> {
    let chain: Chain = serde_json::from_str(s)?;
    if chain.blocks().is_empty() {
        return Err(serde::de::Error::custom("chain has no blocks"));
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genesis_only_layout() {
        let bytes = encode_chain(&Chain::new());
        assert_eq!(&bytes[..4], b"BBC1");
        assert_eq!(&bytes[4..8], &[0, 0, 0, 1]);
        assert_eq!(bytes.len(), 8 + 88 + 4);
        assert_eq!(block_spans(&bytes).unwrap(), vec![8..100]);
        assert_eq!(decode_chain(&bytes).unwrap(), Chain::new());
    }

    #[test]
    fn bad_magic_and_truncation() {
        let mut bytes = encode_chain(&Chain::new());
        assert!(matches!(decode_chain(&bytes[..bytes.len() - 1]), Err(DecodeError::Truncated(_))));
        bytes.push(0);
        assert_eq!(decode_chain(&bytes), Err(DecodeError::TrailingBytes(1)));
        bytes[0] = b'X';
        assert_eq!(decode_chain(&bytes), Err(DecodeError::BadMagic));
        assert_eq!(decode_chain(b"BB"), Err(DecodeError::BadMagic));
    }

    #[test]
    fn zero_blocks_rejected() {
        assert!(matches!(decode_chain(b"BBC1\0\0\0\0"), Err(DecodeError::InvalidTag { .. })));
    }
}
