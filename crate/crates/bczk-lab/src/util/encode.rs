//! Canonical byte encoding for proof-statement instances.
//!
//! Layout (documented in `docs/formats.md`): a one-byte relation tag, then
//! each field in a fixed per-relation order. Variable-length fields are
//! prefixed with their length as a big-endian `u32`; bit strings carry their
//! bit length followed by packed bytes; optional fields are a presence byte
//! followed by the payload; lists are a big-endian `u32` count followed by
//! the elements.

use sha2::{Digest, Sha256};

use crate::util::bits::BitString;

#[derive(Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new(tag: u8) -> Self {
        Encoder { buf: vec![tag] }
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn bytes(&mut self, v: &[u8]) -> &mut Self {
        self.u32(v.len() as u32);
        self.buf.extend_from_slice(v);
        self
    }

    pub fn bits(&mut self, v: &BitString) -> &mut Self {
        self.u32(v.len() as u32);
        self.buf.extend_from_slice(v.as_bytes());
        self
    }

    pub fn opt<T, F: FnOnce(&mut Self, &T)>(&mut self, v: &Option<T>, f: F) -> &mut Self {
        match v {
            None => {
                self.buf.push(0);
            }
            Some(inner) => {
                self.buf.push(1);
                f(self, inner);
            }
        }
        self
    }

    pub fn count(&mut self, n: usize) -> &mut Self {
        self.u32(n as u32)
    }

    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(&self.buf);
        h.finalize().into()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}
