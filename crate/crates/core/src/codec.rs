//! Canonical big-endian encoding.
//!
//! Integers are fixed width big-endian, strings are a u32 byte length followed
//! by UTF-8, lists are a u32 count followed by elements, enumerations are one
//! byte, booleans are one byte 0 or 1. Decoding is strict: every accepted byte
//! string re-encodes to itself.

use thiserror::Error;

use crate::hash::Hash32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("unexpected end of input at offset {0}")]
    Truncated(usize),
    #[error("invalid UTF-8 string at offset {0}")]
    InvalidUtf8(usize),
    #[error("invalid {what} value {value} at offset {at}")]
    InvalidTag { what: &'static str, value: u64, at: usize },
    #[error("{0} trailing bytes after the last record")]
    TrailingBytes(usize),
    #[error("bad magic bytes, expected \"BBC1\"")]
    BadMagic,
}

#[derive(Debug, Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { buf: Vec::with_capacity(n) }
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.u8(v as u8)
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn i16(&mut self, v: i16) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn i32(&mut self, v: i32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn hash(&mut self, h: &Hash32) -> &mut Self {
        self.buf.extend_from_slice(h.as_bytes());
        self
    }

    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.u32(len_u32(s.len()));
        self.raw(s.as_bytes())
    }

    pub fn strs(&mut self, items: &[String]) -> &mut Self {
        self.u32(len_u32(items.len()));
        for s in items {
            self.str(s);
        }
        self
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

fn len_u32(n: usize) -> u32 {
    u32::try_from(n).expect("length exceeds u32 range")
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(DecodeError::Truncated(self.buf.len()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let mut out = [0u8; N];
        out.copy_from_slice(self.take(N)?);
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.array::<1>()?[0])
    }

    pub fn bool(&mut self) -> Result<bool, DecodeError> {
        let at = self.pos;
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(DecodeError::InvalidTag { what: "boolean", value: v.into(), at }),
        }
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        self.array().map(u32::from_be_bytes)
    }

    pub fn i16(&mut self) -> Result<i16, DecodeError> {
        self.array().map(i16::from_be_bytes)
    }

    pub fn i32(&mut self) -> Result<i32, DecodeError> {
        self.array().map(i32::from_be_bytes)
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        self.array().map(u64::from_be_bytes)
    }

    pub fn hash(&mut self) -> Result<Hash32, DecodeError> {
        self.array().map(Hash32)
    }

    pub fn str(&mut self) -> Result<String, DecodeError> {
        let len = self.u32()? as usize;
        let at = self.pos;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| DecodeError::InvalidUtf8(at))
    }

    pub fn strs(&mut self) -> Result<Vec<String>, DecodeError> {
        let count = self.u32()? as usize;
        // each string needs at least its 4-byte length prefix
        if count > self.remaining() / 4 {
            return Err(DecodeError::Truncated(self.buf.len()));
        }
        (0..count).map(|_| self.str()).collect()
    }

    pub fn finish(&self) -> Result<(), DecodeError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(DecodeError::TrailingBytes(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_widths_are_big_endian() {
        let mut w = Writer::new();
        w.u32(1).i32(-2).u64(3).i16(-1).bool(true);
        assert_eq!(w.into_bytes(), [0, 0, 0, 1, 0xff, 0xff, 0xff, 0xfe, 0, 0, 0, 0, 0, 0, 0, 3, 0xff, 0xff, 1]);
    }

    #[test]
    fn string_list_layout() {
        let mut w = Writer::new();
        w.strs(&["ab".to_string(), String::new()]);
        assert_eq!(w.into_bytes(), [0, 0, 0, 2, 0, 0, 0, 2, b'a', b'b', 0, 0, 0, 0]);
    }

    #[test]
    fn strict_reader() {
        assert!(matches!(Reader::new(&[2]).bool(), Err(DecodeError::InvalidTag { .. })));
        assert!(matches!(Reader::new(&[0, 0, 0, 5, b'a']).str(), Err(DecodeError::Truncated(_))));
        assert!(matches!(Reader::new(&[0, 0, 0, 1, 0xff]).str(), Err(DecodeError::InvalidUtf8(4))));
        assert!(matches!(Reader::new(&[0xff, 0xff, 0xff, 0xff]).strs(), Err(DecodeError::Truncated(_))));
        let r = Reader::new(&[1, 2]);
        assert_eq!(r.finish(), Err(DecodeError::TrailingBytes(2)));
    }
}
