//! Two-message statistically-binding, computationally-concealing bit
//! commitment in the style of Naor's PRG construction.
//!
//! The receiver sends a random 3n-bit string `r`; the committer expands an
//! n-bit seed through a PRG to 3n bits and sends either `PRG(seed)` (bit 0)
//! or `PRG(seed) ⊕ r` (bit 1). Binding holds statistically because a random
//! `r` is unlikely to be the XOR of two PRG outputs; concealing holds
//! computationally from the PRG. The PRG here is SHA-256 in counter mode:
//! `PRG(seed) = H(seed ‖ 0) ‖ H(seed ‖ 1) ‖ …` truncated to the output
//! length (counters are 4-byte big-endian; seeds are packed little-bit-first,
//! see `docs/formats.md`).

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::util::bits::BitString;

/// Upper limit for a single PRG expansion, in bits.
pub const MAX_PRG_BITS: usize = 1 << 16;

/// The receiver's first message: exactly 3n bits for an n-bit seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverString(pub BitString);

impl ReceiverString {
    pub fn sample<R: Rng>(rng: &mut R, seed_bits: usize) -> Self {
        ReceiverString(BitString::random(rng, 3 * seed_bits))
    }
}

/// The committer's message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Commitment(pub BitString);

/// What the committer reveals to open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub bit: bool,
    pub seed: BitString,
}

/// Deterministic hash-counter PRG expansion of `seed` to `out_len` bits.
pub fn prg(seed: &BitString, out_len: usize) -> Result<BitString> {
    if out_len > MAX_PRG_BITS {
        return Err(Error::TooLarge(format!(
            "prg output of {out_len} bits exceeds {MAX_PRG_BITS}"
        )));
    }
    let mut out = Vec::with_capacity(out_len.div_ceil(8));
    let mut counter: u32 = 0;
    while out.len() * 8 < out_len {
        let mut h = Sha256::new();
        h.update(seed.as_bytes());
        h.update(counter.to_be_bytes());
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    out.truncate(out_len.div_ceil(8));
    BitString::from_bytes(&out, out_len)
}

/// Commits to `bit` under receiver string `rstring` with the given seed.
pub fn commit(rstring: &ReceiverString, bit: bool, seed: &BitString) -> Result<Commitment> {
    if rstring.0.len() != 3 * seed.len() {
        return Err(Error::LengthMismatch(format!(
            "receiver string has {} bits, need 3*{}",
            rstring.0.len(),
            seed.len()
        )));
    }
    let expanded = prg(seed, rstring.0.len())?;
    let value = if bit {
        expanded.xor(&rstring.0)?
    } else {
        expanded
    };
    Ok(Commitment(value))
}

/// Checks an opening by recomputation. Value mismatch is `Ok(false)`; shape
/// mismatch (e.g. a truncated commitment) is an error.
pub fn verify_open(rstring: &ReceiverString, com: &Commitment, opening: &Opening) -> Result<bool> {
    if com.0.len() != rstring.0.len() {
        return Err(Error::LengthMismatch(format!(
            "commitment has {} bits, receiver string {}",
            com.0.len(),
            rstring.0.len()
        )));
    }
    let recomputed = commit(rstring, opening.bit, &opening.seed)?;
    Ok(recomputed == *com)
}

/// Exhaustively lists every equivocation pair for seeds of `n <= 12` bits:
/// seed pairs `(s0, s1)` with `PRG(s0) = PRG(s1) ⊕ r`, i.e. seeds whose
/// commitments to 0 and 1 coincide. Output is sorted, so identical inputs
/// yield identical lists.
pub fn binding_collision_search(
    n: usize,
    rstring: &ReceiverString,
) -> Result<Vec<(BitString, BitString)>> {
    if n > 12 {
        return Err(Error::TooLarge(format!(
            "binding search over 2^{} seed pairs refused",
            2 * n
        )));
    }
    if rstring.0.len() != 3 * n {
        return Err(Error::LengthMismatch(format!(
            "receiver string has {} bits, need {}",
            rstring.0.len(),
            3 * n
        )));
    }
    let out_len = 3 * n;
    let expansions: Vec<BitString> = (0u64..1 << n)
        .map(|v| prg(&BitString::from_u64(v, n), out_len))
        .collect::<Result<_>>()?;
    let mut by_value: std::collections::HashMap<&BitString, Vec<u64>> =
        std::collections::HashMap::new();
    for (v, e) in expansions.iter().enumerate() {
        by_value.entry(e).or_default().push(v as u64);
    }
    let mut pairs = Vec::new();
    for (s1, e1) in expansions.iter().enumerate() {
        let shifted = e1.xor(&rstring.0)?;
        if let Some(zeros) = by_value.get(&shifted) {
            for &s0 in zeros {
                pairs.push((
                    BitString::from_u64(s0, n),
                    BitString::from_u64(s1 as u64, n),
                ));
            }
        }
    }
    pairs.sort_by_key(|(a, b)| (a.low_u64(), b.low_u64()));
    Ok(pairs)
}

/// Unbounded-opener helper: exhaustively finds some `(bit, seed)` opening a
/// commitment at small seed sizes. Used by the coin-flipping simulator that
/// plays against an unbounded committer, and by tests.
pub fn brute_force_open(
    n: usize,
    rstring: &ReceiverString,
    com: &Commitment,
) -> Result<Option<Opening>> {
    if n > 20 {
        return Err(Error::TooLarge(format!("brute force over 2^{n} seeds refused")));
    }
    for bit in [false, true] {
        for v in 0u64..1 << n {
            let seed = BitString::from_u64(v, n);
            if commit(rstring, bit, &seed)? == *com {
                return Ok(Some(Opening { bit, seed }));
            }
        }
    }
    Ok(None)
}
