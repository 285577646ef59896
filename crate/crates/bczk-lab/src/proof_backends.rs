//! Relation predicates for every statement the protocols prove, a pluggable
//! proof backend with an ideal instantiation, and the CRS-from-coin-flipping
//! subprotocol.
//!
//! The ideal backend evaluates the relation on (instance, witness) and emits
//! a token carrying a canonical instance digest plus the truth value;
//! verification recomputes the digest and reads the value back. That keeps
//! the backend complete and sound by construction while the experiments
//! exercise the concurrency and combinatorics around it. The interface is
//! stable so a concrete argument system can be dropped in later.

use rand::Rng;

use crate::commitment::{self, Commitment, Opening, ReceiverString};
use crate::error::{Error, Result};
use crate::ot::SsotTranscript;
use crate::util::bits::BitString;
use crate::util::encode::Encoder;
use crate::util::rng::LabRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationId {
    RWi,
    RZkPok,
    RSrotConsistency,
    RCoinflipOpen,
    RCrsBit,
}

impl RelationId {
    pub fn tag(self) -> u8 {
        match self {
            RelationId::RWi => 1,
            RelationId::RZkPok => 2,
            RelationId::RSrotConsistency => 3,
            RelationId::RCoinflipOpen => 4,
            RelationId::RCrsBit => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Ok(match tag {
            1 => RelationId::RWi,
            2 => RelationId::RZkPok,
            3 => RelationId::RSrotConsistency,
            4 => RelationId::RCoinflipOpen,
            5 => RelationId::RCrsBit,
            other => return Err(Error::Protocol(format!("unknown relation id {other}"))),
        })
    }
}

/// The base NP relation a protocol instance is about. `Sha256Preimage`
/// serves as the concrete demo relation; `Never` models instances outside
/// the language; `Always` is a degenerate stand-in for tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseRelation {
    Sha256Preimage,
    Always,
    Never,
}

impl BaseRelation {
    pub fn holds(&self, x: &[u8], w: &[u8]) -> bool {
        match self {
            BaseRelation::Sha256Preimage => {
                use sha2::{Digest, Sha256};
                x == Sha256::digest(w).as_slice()
            }
            BaseRelation::Always => true,
            BaseRelation::Never => false,
        }
    }

    /// Instance bytes for which `w` is a witness under `Sha256Preimage`.
    pub fn instance_for(w: &[u8]) -> Vec<u8> {
        use sha2::{Digest, Sha256};
        Sha256::digest(w).to_vec()
    }
}

/// Packs a bit-string witness into bytes unambiguously (length-prefixed).
pub fn bits_witness_bytes(w: &BitString) -> Vec<u8> {
    let mut out = (w.len() as u32).to_le_bytes().to_vec();
    out.extend_from_slice(w.as_bytes());
    out
}

// ---------------------------------------------------------------------------
// Instances and witnesses.
// ---------------------------------------------------------------------------

/// One Stage-1 slot as seen by both parties.
#[derive(Debug, Clone)]
pub struct SlotStatement {
    pub rstring: ReceiverString,
    pub commitment: Commitment,
    pub verifier_bit: bool,
}

/// Statement for the disjunctive Stage-2 proof: either `x` is in the base
/// language, or at least `threshold` slots open to the verifier's bit.
#[derive(Debug, Clone)]
pub struct RwiInstance {
    pub base: BaseRelation,
    pub x: Vec<u8>,
    pub threshold: u64,
    pub slots: Vec<SlotStatement>,
}

#[derive(Debug, Clone)]
pub struct RwiWitness {
    pub base_witness: Option<Vec<u8>>,
    pub openings: Vec<Option<Opening>>,
}

/// Statement for the share-based proof of knowledge: `ℓ_w × λ` OT
/// executions whose revealed location bits place a share in the slot the
/// prover claims, with row XORs forming the witness.
#[derive(Debug, Clone)]
pub struct ZkPokInstance {
    pub base: BaseRelation,
    pub x: Vec<u8>,
    pub cell_transcripts: Vec<Vec<SsotTranscript>>,
    pub locations: Vec<BitString>,
}

#[derive(Debug, Clone)]
pub struct ZkPokWitness {
    pub w: BitString,
    pub cell_randomness: Vec<Vec<BitString>>,
    pub shares: Vec<BitString>,
    pub masks: Vec<BitString>,
}

/// Consistency statement binding the OT receiver's extraction-phase shares
/// to its main-execution sender inputs.
#[derive(Debug, Clone)]
pub struct SrotInstance {
    pub lambda: usize,
    pub main_transcript: SsotTranscript,
    pub cell_transcripts: Vec<Vec<SsotTranscript>>,
    pub locations: Vec<BitString>,
}

#[derive(Debug, Clone)]
pub struct SrotWitness {
    pub r_prime: bool,
    pub beta: bool,
    pub main_sender_randomness: BitString,
    pub cell_randomness: Vec<Vec<BitString>>,
    pub shares: Vec<BitString>,
    pub masks: Vec<BitString>,
}

/// Opening statement for the coin-flipping commitment.
#[derive(Debug, Clone)]
pub struct CoinflipOpenInstance {
    pub rstring: ReceiverString,
    pub commitment: Commitment,
    pub a: bool,
}

#[derive(Debug, Clone)]
pub struct CoinflipOpenWitness {
    pub seed: BitString,
}

/// Per-bit consistency statement of the CRS protocol: the revealed CRS bit
/// equals the committed bit XOR the chooser's bit.
#[derive(Debug, Clone)]
pub struct CrsBitInstance {
    pub rstring: ReceiverString,
    pub commitment: Commitment,
    pub b: bool,
    pub crs_bit: bool,
}

#[derive(Debug, Clone)]
pub struct CrsBitWitness {
    pub a: bool,
    pub seed: BitString,
}

#[derive(Debug, Clone)]
pub enum Instance {
    Rwi(RwiInstance),
    ZkPok(ZkPokInstance),
    Srot(SrotInstance),
    CoinflipOpen(CoinflipOpenInstance),
    CrsBit(CrsBitInstance),
}

#[derive(Debug, Clone)]
pub enum Witness {
    Rwi(RwiWitness),
    ZkPok(ZkPokWitness),
    Srot(SrotWitness),
    CoinflipOpen(CoinflipOpenWitness),
    CrsBit(CrsBitWitness),
}

impl Instance {
    pub fn relation(&self) -> RelationId {
        match self {
            Instance::Rwi(_) => RelationId::RWi,
            Instance::ZkPok(_) => RelationId::RZkPok,
            Instance::Srot(_) => RelationId::RSrotConsistency,
            Instance::CoinflipOpen(_) => RelationId::RCoinflipOpen,
            Instance::CrsBit(_) => RelationId::RCrsBit,
        }
    }

    /// Canonical digest over the instance encoding (see `docs/formats.md`).
    pub fn digest(&self) -> [u8; 32] {
        let mut e = Encoder::new(self.relation().tag());
        match self {
            Instance::Rwi(i) => {
                e.u8(match i.base {
                    BaseRelation::Sha256Preimage => 0,
                    BaseRelation::Always => 1,
                    BaseRelation::Never => 2,
                });
                e.bytes(&i.x);
                e.u64(i.threshold);
                e.count(i.slots.len());
                for s in &i.slots {
                    e.bits(&s.rstring.0);
                    e.bits(&s.commitment.0);
                    e.u8(s.verifier_bit as u8);
                }
            }
            Instance::ZkPok(i) => {
                e.u8(match i.base {
                    BaseRelation::Sha256Preimage => 0,
                    BaseRelation::Always => 1,
                    BaseRelation::Never => 2,
                });
                e.bytes(&i.x);
                encode_cells(&mut e, &i.cell_transcripts, &i.locations);
            }
            Instance::Srot(i) => {
                e.u64(i.lambda as u64);
                e.bytes(&i.main_transcript.ot1);
                e.bytes(&i.main_transcript.ot2);
                encode_cells(&mut e, &i.cell_transcripts, &i.locations);
            }
            Instance::CoinflipOpen(i) => {
                e.bits(&i.rstring.0);
                e.bits(&i.commitment.0);
                e.u8(i.a as u8);
            }
            Instance::CrsBit(i) => {
                e.bits(&i.rstring.0);
                e.bits(&i.commitment.0);
                e.u8(i.b as u8);
                e.u8(i.crs_bit as u8);
            }
        }
        e.digest()
    }
}

fn encode_cells(e: &mut Encoder, transcripts: &[Vec<SsotTranscript>], locations: &[BitString]) {
    e.count(transcripts.len());
    for (row, locs) in transcripts.iter().zip(locations) {
        e.count(row.len());
        for t in row {
            e.bytes(&t.ot1);
            e.bytes(&t.ot2);
        }
        e.bits(locs);
    }
}

// ---------------------------------------------------------------------------
// Relation predicates.
// ---------------------------------------------------------------------------

/// Disjunctive Stage-2 relation. True iff the base relation holds on
/// `(x, base_witness)`, or at least `threshold` slots carry an opening whose
/// committed bit equals the verifier's response and verifies.
pub fn relation_rwi(instance: &RwiInstance, witness: &RwiWitness) -> Result<bool> {
    if witness.openings.len() != instance.slots.len() {
        return Err(Error::LengthMismatch(format!(
            "{} openings for {} slots",
            witness.openings.len(),
            instance.slots.len()
        )));
    }
    if let Some(w) = &witness.base_witness {
        if instance.base.holds(&instance.x, w) {
            return Ok(true);
        }
    }
    let mut matched = 0u64;
    for (slot, opening) in instance.slots.iter().zip(&witness.openings) {
        let Some(op) = opening else { continue };
        // An opening to the wrong bit never counts toward the threshold.
        if op.bit != slot.verifier_bit {
            continue;
        }
        if commitment::verify_open(&slot.rstring, &slot.commitment, op)? {
            matched += 1;
        }
    }
    Ok(matched >= instance.threshold)
}

fn check_cell_grid(
    rows: usize,
    cols: usize,
    transcripts: &[Vec<SsotTranscript>],
    locations: &[BitString],
    randomness: &[Vec<BitString>],
    shares: &[BitString],
    masks: &[BitString],
) -> Result<bool> {
    let dims_ok = transcripts.len() == rows
        && locations.len() == rows
        && randomness.len() == rows
        && shares.len() == rows
        && masks.len() == rows
        && transcripts.iter().all(|r| r.len() == cols)
        && randomness.iter().all(|r| r.len() == cols)
        && locations.iter().all(|r| r.len() == cols)
        && shares.iter().all(|r| r.len() == cols)
        && masks.iter().all(|r| r.len() == cols);
    if !dims_ok {
        return Err(Error::LengthMismatch(format!(
            "cell grid is not {rows} x {cols}"
        )));
    }
    for i in 0..rows {
        for j in 0..cols {
            let b = locations[i].get(j);
            let (m0, m1) = if b {
                (masks[i].get(j), shares[i].get(j))
            } else {
                (shares[i].get(j), masks[i].get(j))
            };
            if !transcripts[i][j].valid_for(&randomness[i][j], m0, m1) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Share-based proof-of-knowledge relation: every OT transcript is valid for
/// the placement dictated by its location bit, every row of shares XORs to
/// the corresponding witness bit, and the base relation holds.
pub fn relation_zkpok(instance: &ZkPokInstance, witness: &ZkPokWitness) -> Result<bool> {
    let rows = witness.w.len();
    if rows == 0 || instance.cell_transcripts.len() != rows {
        return Err(Error::LengthMismatch(format!(
            "witness has {rows} bits but instance has {} rows",
            instance.cell_transcripts.len()
        )));
    }
    let cols = instance.cell_transcripts[0].len();
    if cols == 0 {
        return Err(Error::LengthMismatch("zero-column cell grid".into()));
    }
    if !check_cell_grid(
        rows,
        cols,
        &instance.cell_transcripts,
        &instance.locations,
        &witness.cell_randomness,
        &witness.shares,
        &witness.masks,
    )? {
        return Ok(false);
    }
    for i in 0..rows {
        if witness.shares[i].parity() != witness.w.get(i) {
            return Ok(false);
        }
    }
    Ok(instance
        .base
        .holds(&instance.x, &bits_witness_bytes(&witness.w)))
}

/// OT-consistency relation: extraction rows encode `(r', β, main-execution
/// sender randomness)` and the main transcript was produced with inputs
/// `(r', r' ⊕ β)` under that randomness.
pub fn relation_srot(instance: &SrotInstance, witness: &SrotWitness) -> Result<bool> {
    let rows = instance.lambda + 2;
    let cols = instance.lambda;
    if witness.main_sender_randomness.len() != instance.lambda {
        return Err(Error::LengthMismatch(format!(
            "main randomness has {} bits, lambda is {}",
            witness.main_sender_randomness.len(),
            instance.lambda
        )));
    }
    if !check_cell_grid(
        rows,
        cols,
        &instance.cell_transcripts,
        &instance.locations,
        &witness.cell_randomness,
        &witness.shares,
        &witness.masks,
    )? {
        return Ok(false);
    }
    // Row XORs must spell out w = (r', β, r*).
    let mut w = Vec::with_capacity(rows);
    w.push(witness.r_prime);
    w.push(witness.beta);
    for i in 0..instance.lambda {
        w.push(witness.main_sender_randomness.get(i));
    }
    for i in 0..rows {
        if witness.shares[i].parity() != w[i] {
            return Ok(false);
        }
    }
    Ok(instance.main_transcript.valid_for(
        &witness.main_sender_randomness,
        witness.r_prime,
        witness.r_prime ^ witness.beta,
    ))
}

pub fn relation_coinflip_open(
    instance: &CoinflipOpenInstance,
    witness: &CoinflipOpenWitness,
) -> Result<bool> {
    commitment::verify_open(
        &instance.rstring,
        &instance.commitment,
        &Opening {
            bit: instance.a,
            seed: witness.seed.clone(),
        },
    )
}

pub fn relation_crs_bit(instance: &CrsBitInstance, witness: &CrsBitWitness) -> Result<bool> {
    if instance.crs_bit != (witness.a ^ instance.b) {
        return Ok(false);
    }
    commitment::verify_open(
        &instance.rstring,
        &instance.commitment,
        &Opening {
            bit: witness.a,
            seed: witness.seed.clone(),
        },
    )
}

/// Evaluates the predicate for a typed (instance, witness) pair.
pub fn evaluate(instance: &Instance, witness: &Witness) -> Result<bool> {
    match (instance, witness) {
        (Instance::Rwi(i), Witness::Rwi(w)) => relation_rwi(i, w),
        (Instance::ZkPok(i), Witness::ZkPok(w)) => relation_zkpok(i, w),
        (Instance::Srot(i), Witness::Srot(w)) => relation_srot(i, w),
        (Instance::CoinflipOpen(i), Witness::CoinflipOpen(w)) => relation_coinflip_open(i, w),
        (Instance::CrsBit(i), Witness::CrsBit(w)) => relation_crs_bit(i, w),
        _ => Err(Error::Protocol(
            "instance and witness belong to different relations".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Backend.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Ideal,
}

/// Proof token: relation tag, canonical instance digest, validity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofToken {
    pub relation: RelationId,
    pub instance_digest: [u8; 32],
    pub valid: bool,
}

impl ProofToken {
    pub fn to_bytes(&self) -> [u8; 34] {
        let mut out = [0u8; 34];
        out[0] = self.relation.tag();
        out[1..33].copy_from_slice(&self.instance_digest);
        out[33] = self.valid as u8;
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 34 {
            return Err(Error::LengthMismatch(format!(
                "proof token must be 34 bytes, got {}",
                bytes.len()
            )));
        }
        let mut digest = [0u8; 32];
        digest.copy_from_slice(&bytes[1..33]);
        Ok(ProofToken {
            relation: RelationId::from_tag(bytes[0])?,
            instance_digest: digest,
            valid: bytes[33] == 1,
        })
    }
}

/// Produces a proof token. Under the ideal backend the token's validity is
/// the predicate's truth value on (instance, witness).
pub fn prove(backend: Backend, instance: &Instance, witness: &Witness) -> Result<ProofToken> {
    match backend {
        Backend::Ideal => Ok(ProofToken {
            relation: instance.relation(),
            instance_digest: instance.digest(),
            valid: evaluate(instance, witness)?,
        }),
    }
}

/// Checks a token against an instance. A token forged for a different
/// instance digest verifies false.
pub fn verify(backend: Backend, instance: &Instance, token: &ProofToken) -> bool {
    match backend {
        Backend::Ideal => {
            token.relation == instance.relation()
                && token.instance_digest == instance.digest()
                && token.valid
        }
    }
}

/// The zero-knowledge simulation surface of the ideal backend: mints a
/// valid token without a witness. Only simulator harnesses may call this.
pub fn simulate_token(backend: Backend, instance: &Instance) -> ProofToken {
    match backend {
        Backend::Ideal => ProofToken {
            relation: instance.relation(),
            instance_digest: instance.digest(),
            valid: true,
        },
    }
}

// ---------------------------------------------------------------------------
// CRS from coin flipping.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrsGeneratorBehavior {
    Honest,
    /// Reveals a flipped CRS bit at the given index.
    FlipCrsAt(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrsChooserBehavior {
    Honest,
    /// Always contributes the same bit.
    FixedBit(bool),
}

#[derive(Debug, Clone)]
pub struct CrsBitRecord {
    pub rstring: ReceiverString,
    pub commitment: Commitment,
    pub b: bool,
    pub crs_bit: bool,
    pub token: ProofToken,
}

#[derive(Debug, Clone)]
pub struct CrsRun {
    pub crs: BitString,
    pub bits: Vec<CrsBitRecord>,
}

impl CrsRun {
    /// Commitment, chooser bit, revealed CRS bit, proof: four per CRS bit.
    pub fn logical_messages(&self) -> usize {
        4 * self.bits.len()
    }
}

/// Runs the per-bit commit → contribute → reveal → prove protocol that
/// turns a coin flip into a common random string. One side (the generator)
/// commits to `a_i` and later reveals `crs_i = a_i ⊕ b_i` with a proof of
/// consistency; the other side contributes `b_i` after seeing only the
/// commitment. A failed per-bit proof aborts with the offending index.
pub fn crs_from_coinflip(
    bit_len: usize,
    generator: CrsGeneratorBehavior,
    chooser: CrsChooserBehavior,
    seed_bits: usize,
    rng: &mut LabRng,
) -> Result<CrsRun> {
    if bit_len < 1 {
        return Err(Error::InvalidParams("bit_len must be >= 1".into()));
    }
    let mut crs = BitString::zero(bit_len);
    let mut bits = Vec::with_capacity(bit_len);
    for i in 0..bit_len {
        let rstring = ReceiverString::sample(rng, seed_bits);
        let a = rng.gen::<bool>();
        let seed = BitString::random(rng, seed_bits);
        let com = commitment::commit(&rstring, a, &seed)?;
        let b = match chooser {
            CrsChooserBehavior::Honest => rng.gen::<bool>(),
            CrsChooserBehavior::FixedBit(v) => v,
        };
        let mut crs_bit = a ^ b;
        if generator == CrsGeneratorBehavior::FlipCrsAt(i) {
            crs_bit = !crs_bit;
        }
        let instance = Instance::CrsBit(CrsBitInstance {
            rstring: rstring.clone(),
            commitment: com.clone(),
            b,
            crs_bit,
        });
        let token = prove(
            Backend::Ideal,
            &instance,
            &Witness::CrsBit(CrsBitWitness { a, seed }),
        )?;
        if !verify(Backend::Ideal, &instance, &token) {
            return Err(Error::AbortAt {
                what: "crs bit proof".into(),
                index: i,
            });
        }
        crs.set(i, crs_bit);
        bits.push(CrsBitRecord {
            rstring,
            commitment: com,
            b,
            crs_bit,
            token,
        });
    }
    Ok(CrsRun { crs, bits })
}
