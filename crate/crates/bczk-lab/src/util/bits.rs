//! Packed bit strings with explicit length.
//!
//! Bit `i` lives at byte `i / 8`, position `i % 8` (least significant bit
//! first). Unused trailing bits of the last byte are always zero, so equal
//! bit strings compare equal bytewise.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    bytes: Vec<u8>,
}

impl BitString {
    pub fn zero(len: usize) -> Self {
        BitString {
            len,
            bytes: vec![0u8; len.div_ceil(8)],
        }
    }

    /// Builds from a slice of 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut s = BitString::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b & 1 == 1);
        }
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = BitString::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// `len` uniformly random bits.
    pub fn random<R: Rng>(rng: &mut R, len: usize) -> Self {
        let mut s = BitString::zero(len);
        rng.fill(&mut s.bytes[..]);
        s.mask_tail();
        s
    }

    /// Wraps raw packed bytes, truncating to `len` bits.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::LengthMismatch(format!(
                "need {} bytes for {len} bits, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut s = BitString {
            len,
            bytes: bytes.to_vec(),
        };
        s.mask_tail();
        Ok(s)
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= (1u8 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bytes[i / 8] >> (i % 8)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        if v {
            self.bytes[i / 8] |= 1 << (i % 8);
        } else {
            self.bytes[i / 8] &= !(1 << (i % 8));
        }
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(Error::LengthMismatch(format!(
                "xor of {} and {} bits",
                self.len, other.len
            )));
        }
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitString {
            len: self.len,
            bytes,
        })
    }

    /// XOR of all bits.
    pub fn parity(&self) -> bool {
        self.bytes.iter().fold(0u8, |acc, b| acc ^ b).count_ones() % 2 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(s)
            .map_err(|e| Error::LengthMismatch(format!("bad hex: {e}")))?;
        BitString::from_bytes(&bytes, len)
    }

    /// Interprets the first `min(len, 64)` bits as a little-endian integer.
    pub fn low_u64(&self) -> u64 {
        let mut v = 0u64;
        for i in 0..self.len.min(64) {
            if self.get(i) {
                v |= 1 << i;
            }
        }
        v
    }

    /// Builds an `len`-bit string from the low bits of `v`.
    pub fn from_u64(v: u64, len: usize) -> Self {
        let mut s = BitString::zero(len);
        for i in 0..len.min(64) {
            s.set(i, (v >> i) & 1 == 1);
        }
        s
    }
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({} bits, {})", self.len, self.to_hex())
    }
}
