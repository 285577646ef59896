//! State machines for the slot-based bounded-concurrent ZK protocol, plus a
//! library of adversarial verifier strategies.
//!
//! Per session the message choreography is (rounds are 1-based, S = slots):
//!
//! * slot j: round 3j−2 verifier sends the receiver string, round 3j−1 the
//!   prover commits to a fresh random bit, round 3j the verifier answers
//!   with a uniform bit;
//! * after S slots a four-message proof phase: rounds 3S+1 and 3S+3 are
//!   verifier nonces, 3S+2 is the prover's statement engagement, 3S+4 the
//!   proof token for the disjunctive relation (base witness, or `threshold`
//!   matched-slot openings).
//!
//! The verifier side is public-coin: every message it sends is drawn fresh
//! from its seeded randomness source, never from prover content.

use rand::Rng;

use crate::commitment::{self, Commitment, Opening, ReceiverString};
use crate::engine::{
    self, BundledMessage, Driver, Engine, HostedMachine, MachineReply, Payload, Schedule,
    SessionId, TranscriptSet,
};
use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::proof_backends::{
    self, Backend, BaseRelation, Instance, ProofToken, RwiInstance, RwiWitness, SlotStatement,
    Witness,
};
use crate::util::bits::BitString;
use crate::util::rng::{self, LabRng};

// ---------------------------------------------------------------------------
// Message bodies.
// ---------------------------------------------------------------------------

pub fn bits_body(bs: &BitString) -> Vec<u8> {
    let mut out = (bs.len() as u32).to_le_bytes().to_vec();
    out.extend_from_slice(bs.as_bytes());
    out
}

pub fn parse_bits_body(body: &[u8]) -> Result<BitString> {
    if body.len() < 4 {
        return Err(Error::Protocol("bit-string body too short".into()));
    }
    let len = u32::from_le_bytes([body[0], body[1], body[2], body[3]]) as usize;
    BitString::from_bytes(&body[4..], len)
}

pub fn bit_body(b: bool) -> Vec<u8> {
    vec![b as u8]
}

pub fn parse_bit_body(body: &[u8]) -> Result<bool> {
    match body {
        [0] => Ok(false),
        [1] => Ok(true),
        _ => Err(Error::Protocol("bit body must be one byte of 0/1".into())),
    }
}

/// Slot index (0-based) of a commitment round, if it is one.
pub fn slot_of_commit_round(round: u32) -> Option<usize> {
    (round % 3 == 2).then(|| ((round + 1) / 3 - 1) as usize)
}

/// Slot index (0-based) of a verifier-bit round within Stage 1.
pub fn slot_of_bit_round(round: u32, slots: u64) -> Option<usize> {
    (round % 3 == 0 && round >= 3 && u64::from(round) <= slots.saturating_mul(3))
        .then(|| (round / 3 - 1) as usize)
}

// ---------------------------------------------------------------------------
// Prover machine.
// ---------------------------------------------------------------------------

/// One Stage-1 slot from the prover's perspective.
#[derive(Debug, Clone)]
pub struct SlotRecord {
    pub rstring: ReceiverString,
    pub commitment: Commitment,
    /// Prover-private committed bit and seed.
    pub bit: bool,
    pub seed: BitString,
    pub verifier_bit: Option<bool>,
}

/// Prover-private slot data. Simulator and extractor harnesses reach it
/// only through this explicit handle, never through transcripts.
#[derive(Debug, Clone, Default)]
pub struct ProverSecrets {
    pub slots: Vec<SlotRecord>,
}

impl ProverSecrets {
    /// Count of resolved slots whose committed bit equals the verifier's
    /// response.
    pub fn matched(&self) -> u64 {
        self.slots
            .iter()
            .filter(|s| s.verifier_bit == Some(s.bit))
            .count() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheatStrategy {
    UniformGuess,
    AllZeros,
    /// Commits to a bit derived from the transcript seen so far. Binding is
    /// still enforced physically: the commitment precedes the verifier bit.
    AdaptiveOnTranscript,
}

#[derive(Debug, Clone)]
pub enum ProverKind {
    /// Knows a base witness and uses it in the proof phase.
    Honest { witness: Vec<u8> },
    /// Proves through matched-slot openings only (the simulator's prover).
    OpeningsOnly,
    /// Soundness adversary: no witness, openings branch only.
    Cheating(CheatStrategy),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ProverPhase {
    Stage1,
    Stage2,
    Done,
    Aborted,
}

#[derive(Debug, Clone)]
pub struct ProverMachine {
    params: ProtocolParams,
    seed_bits: usize,
    base: BaseRelation,
    x: Vec<u8>,
    kind: ProverKind,
    slots: Vec<SlotRecord>,
    expected: u32,
    phase: ProverPhase,
    adaptive_state: u64,
    /// Whether the proof-phase witness branch was satisfied, once emitted.
    pub stage2_success: Option<bool>,
}

impl ProverMachine {
    pub fn new(
        params: ProtocolParams,
        seed_bits: usize,
        base: BaseRelation,
        x: Vec<u8>,
        kind: ProverKind,
    ) -> Self {
        ProverMachine {
            params,
            seed_bits,
            base,
            x,
            kind,
            slots: Vec::new(),
            expected: 1,
            phase: ProverPhase::Stage1,
            adaptive_state: 0,
            stage2_success: None,
        }
    }

    pub fn secrets_handle(&self) -> ProverSecrets {
        ProverSecrets {
            slots: self.slots.clone(),
        }
    }

    pub fn is_aborted(&self) -> bool {
        self.phase == ProverPhase::Aborted
    }

    fn commit_bit(&mut self, rng: &mut LabRng) -> bool {
        match &self.kind {
            ProverKind::Honest { .. } | ProverKind::OpeningsOnly => rng.gen(),
            ProverKind::Cheating(CheatStrategy::UniformGuess) => rng.gen(),
            ProverKind::Cheating(CheatStrategy::AllZeros) => false,
            ProverKind::Cheating(CheatStrategy::AdaptiveOnTranscript) => {
                self.adaptive_state.count_ones() % 2 == 1
            }
        }
    }

    fn rwi_instance(&self) -> RwiInstance {
        RwiInstance {
            base: self.base,
            x: self.x.clone(),
            threshold: self.params.threshold,
            slots: self
                .slots
                .iter()
                .map(|s| SlotStatement {
                    rstring: s.rstring.clone(),
                    commitment: s.commitment.clone(),
                    verifier_bit: s.verifier_bit.unwrap_or_default(),
                })
                .collect(),
        }
    }

    fn stage2_witness(&self) -> RwiWitness {
        match &self.kind {
            ProverKind::Honest { witness } => RwiWitness {
                base_witness: Some(witness.clone()),
                openings: vec![None; self.slots.len()],
            },
            ProverKind::OpeningsOnly | ProverKind::Cheating(_) => {
                // Lexicographically first `threshold` matched openings; the
                // relation is monotone, the cap is for determinism only.
                let mut openings: Vec<Option<Opening>> = vec![None; self.slots.len()];
                let mut used = 0u64;
                for (i, s) in self.slots.iter().enumerate() {
                    if used == self.params.threshold {
                        break;
                    }
                    if s.verifier_bit == Some(s.bit) {
                        openings[i] = Some(Opening {
                            bit: s.bit,
                            seed: s.seed.clone(),
                        });
                        used += 1;
                    }
                }
                RwiWitness {
                    base_witness: None,
                    openings,
                }
            }
        }
    }
}

impl HostedMachine for ProverMachine {
    fn expected_round(&self) -> Option<u32> {
        match self.phase {
            ProverPhase::Done | ProverPhase::Aborted => None,
            _ => Some(self.expected),
        }
    }

    fn on_message(&mut self, round: u32, body: &[u8], rng: &mut LabRng) -> MachineReply {
        let s = self.params.slots as u32;
        // The engine enforces round order for bundled runs; enforce it here
        // as well so directly driven machines abort on out-of-phase input.
        if round != self.expected || self.phase == ProverPhase::Aborted {
            self.phase = ProverPhase::Aborted;
            return MachineReply::Reject;
        }
        self.adaptive_state = self.adaptive_state.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(
            body.iter()
                .fold(0u64, |a, &b| a.wrapping_mul(31).wrapping_add(b as u64)),
        );

        if round <= 3 * s && round % 3 == 1 {
            // Receiver string opening slot (round+2)/3.
            let Ok(raw) = parse_bits_body(body) else {
                self.phase = ProverPhase::Aborted;
                return MachineReply::Reject;
            };
            if raw.len() != 3 * self.seed_bits {
                self.phase = ProverPhase::Aborted;
                return MachineReply::Reject;
            }
            let bit = self.commit_bit(rng);
            let seed = BitString::random(rng, self.seed_bits);
            let rstring = ReceiverString(raw);
            let Ok(com) = commitment::commit(&rstring, bit, &seed) else {
                self.phase = ProverPhase::Aborted;
                return MachineReply::Reject;
            };
            let reply = bits_body(&com.0);
            self.slots.push(SlotRecord {
                rstring,
                commitment: com,
                bit,
                seed,
                verifier_bit: None,
            });
            self.expected = round + 2;
            MachineReply::Send {
                round: round + 1,
                body: reply,
            }
        } else if round <= 3 * s && round % 3 == 0 {
            let Ok(bit) = parse_bit_body(body) else {
                self.phase = ProverPhase::Aborted;
                return MachineReply::Reject;
            };
            let idx = (round / 3 - 1) as usize;
            self.slots[idx].verifier_bit = Some(bit);
            self.expected = round + 1;
            if round == 3 * s {
                self.phase = ProverPhase::Stage2;
            }
            MachineReply::Silent
        } else if round == 3 * s + 1 {
            self.expected = round + 2;
            MachineReply::Send {
                round: round + 1,
                body: Instance::Rwi(self.rwi_instance()).digest().to_vec(),
            }
        } else if round == 3 * s + 3 {
            let instance = Instance::Rwi(self.rwi_instance());
            let witness = Witness::Rwi(self.stage2_witness());
            let token = match proof_backends::prove(Backend::Ideal, &instance, &witness) {
                Ok(t) => t,
                Err(_) => {
                    self.phase = ProverPhase::Aborted;
                    return MachineReply::Reject;
                }
            };
            self.stage2_success = Some(token.valid);
            self.phase = ProverPhase::Done;
            MachineReply::Send {
                round: round + 1,
                body: token.to_bytes().to_vec(),
            }
        } else {
            self.phase = ProverPhase::Aborted;
            MachineReply::Reject
        }
    }

    fn is_complete(&self) -> bool {
        self.phase == ProverPhase::Done
    }
}

// ---------------------------------------------------------------------------
// Honest verifier session (driver side).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitStrategy {
    Uniform,
    Fixed(bool),
}

#[derive(Debug, Clone)]
pub struct VerifierSession {
    params: ProtocolParams,
    seed_bits: usize,
    base: BaseRelation,
    x: Vec<u8>,
    bits: BitStrategy,
    slots: Vec<(ReceiverString, Option<Commitment>, Option<bool>)>,
    next_round: u32,
    awaiting: Option<u32>,
    pub outcome: Option<bool>,
}

impl VerifierSession {
    pub fn new(
        params: ProtocolParams,
        seed_bits: usize,
        base: BaseRelation,
        x: Vec<u8>,
        bits: BitStrategy,
    ) -> Self {
        VerifierSession {
            params,
            seed_bits,
            base,
            x,
            bits,
            slots: Vec::new(),
            next_round: 1,
            awaiting: None,
            outcome: None,
        }
    }

    pub fn finished(&self) -> bool {
        self.outcome.is_some()
    }

    /// Whether the session can emit a verifier message right now.
    pub fn ready(&self) -> bool {
        self.outcome.is_none() && self.awaiting.is_none()
    }

    pub fn next_round(&self) -> Option<u32> {
        self.ready().then_some(self.next_round)
    }

    /// Emits the next verifier message, drawing freshness from `rng`.
    pub fn next_message(&mut self, rng: &mut LabRng) -> Option<(u32, Vec<u8>)> {
        if !self.ready() {
            return None;
        }
        let s = self.params.slots as u32;
        let round = self.next_round;
        let msg = if round <= 3 * s && round % 3 == 1 {
            let rstring = ReceiverString::sample(rng, self.seed_bits);
            self.slots.push((rstring.clone(), None, None));
            self.awaiting = Some(round + 1);
            self.next_round = round + 2;
            bits_body(&rstring.0)
        } else if round <= 3 * s && round % 3 == 0 {
            let bit = match self.bits {
                BitStrategy::Uniform => rng.gen(),
                BitStrategy::Fixed(b) => b,
            };
            let idx = (round / 3 - 1) as usize;
            self.slots[idx].2 = Some(bit);
            self.next_round = round + 1;
            bit_body(bit)
        } else if round == 3 * s + 1 || round == 3 * s + 3 {
            let mut nonce = [0u8; 16];
            rng.fill(&mut nonce);
            self.awaiting = Some(round + 1);
            self.next_round = round + 2;
            nonce.to_vec()
        } else {
            return None;
        };
        Some((round, msg))
    }

    /// Records a prover reply.
    pub fn on_reply(&mut self, round: u32, body: &[u8]) {
        let s = self.params.slots as u32;
        if self.awaiting != Some(round) {
            self.outcome = Some(false);
            return;
        }
        self.awaiting = None;
        if round <= 3 * s && round % 3 == 2 {
            match parse_bits_body(body) {
                Ok(c) if c.len() == 3 * self.seed_bits => {
                    let idx = ((round + 1) / 3 - 1) as usize;
                    self.slots[idx].1 = Some(Commitment(c));
                }
                _ => {
                    // Malformed commitment length: reject.
                    self.outcome = Some(false);
                }
            }
        } else if round == 3 * s + 2 {
            // Statement engagement; not load-bearing under the ideal
            // backend.
        } else if round == 3 * s + 4 {
            let accept = match ProofToken::from_bytes(body) {
                Ok(token) => {
                    let instance = Instance::Rwi(RwiInstance {
                        base: self.base,
                        x: self.x.clone(),
                        threshold: self.params.threshold,
                        slots: self
                            .slots
                            .iter()
                            .map(|(r, c, b)| SlotStatement {
                                rstring: r.clone(),
                                commitment: c
                                    .clone()
                                    .unwrap_or(Commitment(BitString::zero(3 * self.seed_bits))),
                                verifier_bit: b.unwrap_or_default(),
                            })
                            .collect(),
                    });
                    proof_backends::verify(Backend::Ideal, &instance, &token)
                }
                Err(_) => false,
            };
            self.outcome = Some(accept);
        }
    }
}

// ---------------------------------------------------------------------------
// Concurrent adversary driver.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdversaryKind {
    /// Round-robin scheduling, uniform bits.
    HonestLike,
    /// Round-robin scheduling with a fixed response bit.
    FixedBits(bool),
    /// Chooses which session speaks from a private tape mixed with the
    /// conversation state; bits stay uniform.
    StateDependentScheduling,
    /// Withholds each slot's response until the next block so slots straddle
    /// block boundaries.
    SlotStaggerer,
    /// Aborts each session turn with the given probability.
    Aborter(f64),
    /// Runs honestly, then aborts every session once the given block starts.
    AllAbortInBlock(usize),
}

/// The strategy suite exercised by the oblivious-rewinding experiments.
pub fn adversary_library() -> Vec<AdversaryKind> {
    vec![
        AdversaryKind::HonestLike,
        AdversaryKind::FixedBits(false),
        AdversaryKind::StateDependentScheduling,
        AdversaryKind::SlotStaggerer,
        AdversaryKind::Aborter(0.02),
        AdversaryKind::AllAbortInBlock(1),
    ]
}

#[derive(Debug, Clone)]
pub struct AdversaryDriver {
    pub kind: AdversaryKind,
    schedule: Schedule,
    params: ProtocolParams,
    sessions: Vec<VerifierSession>,
    aborted: Vec<bool>,
    dead: Vec<bool>,
    rng: LabRng,
    rr_cursor: usize,
    /// (session, remaining turns) for the block-staggered schedule.
    span_state: (usize, u32),
    state_tape: u64,
    /// Mirror of the engine's transcript length.
    global_pos: usize,
    last_live: Option<SessionId>,
    /// Global position of each session's pending slot commitment (for the
    /// staggerer).
    pending_commit_pos: Vec<Option<usize>>,
}

impl AdversaryDriver {
    pub fn new(
        kind: AdversaryKind,
        params: ProtocolParams,
        seed_bits: usize,
        base: BaseRelation,
        x: Vec<u8>,
        seed: u64,
    ) -> Self {
        let schedule = match kind {
            AdversaryKind::Aborter(p) => Schedule::Abortive { p_abort: p },
            _ => Schedule::RoundRobin,
        };
        Self::with_schedule(kind, schedule, params, seed_bits, base, x, seed)
    }

    /// Honest-bits driver over an explicit scheduling policy; the adversary
    /// kinds are presets over this.
    pub fn with_schedule(
        kind: AdversaryKind,
        schedule: Schedule,
        params: ProtocolParams,
        seed_bits: usize,
        base: BaseRelation,
        x: Vec<u8>,
        seed: u64,
    ) -> Self {
        let q = params.q as usize;
        let bits = match kind {
            AdversaryKind::FixedBits(b) => BitStrategy::Fixed(b),
            _ => BitStrategy::Uniform,
        };
        let sessions = (0..q)
            .map(|_| VerifierSession::new(params, seed_bits, base, x.clone(), bits))
            .collect();
        AdversaryDriver {
            kind,
            schedule,
            params,
            sessions,
            aborted: vec![false; q],
            dead: vec![false; q],
            rng: rng::derive(seed, "adversary", 0),
            rr_cursor: 0,
            span_state: (0, 0),
            state_tape: 0x6a09e667f3bcc908,
            global_pos: 0,
            last_live: None,
            pending_commit_pos: vec![None; q],
        }
    }

    pub fn sessions(&self) -> &[VerifierSession] {
        &self.sessions
    }

    pub fn accepted(&self) -> Vec<Option<bool>> {
        self.sessions.iter().map(|s| s.outcome).collect()
    }

    fn current_block(&self) -> usize {
        let bl = self.params.block_len as usize;
        let l = self.params.blocks as usize;
        (self.global_pos / bl).min(l - 1)
    }

    fn block_of(&self, pos: usize) -> usize {
        let bl = self.params.block_len as usize;
        let l = self.params.blocks as usize;
        (pos / bl).min(l - 1)
    }

    /// Staggering rule: a slot response is withheld while its commitment
    /// sits in the current block.
    fn stagger_allows(&self, idx: usize) -> bool {
        if self.kind != AdversaryKind::SlotStaggerer {
            return true;
        }
        let Some(round) = self.sessions[idx].next_round() else {
            return true;
        };
        if round % 3 == 0 && u64::from(round) <= 3 * self.params.slots {
            match self.pending_commit_pos[idx] {
                Some(pos) => self.block_of(pos) < self.current_block(),
                None => true,
            }
        } else {
            true
        }
    }

    fn active(&self, idx: usize) -> bool {
        !self.aborted[idx] && !self.dead[idx] && self.sessions[idx].ready()
    }
}

impl Driver for AdversaryDriver {
    fn next_bundle(&mut self, replies: &BundledMessage) -> Option<BundledMessage> {
        let q = self.sessions.len();
        // Fold in replies to the previous live message.
        if let Some(sid) = self.last_live.take() {
            self.global_pos += 1; // our message was logged
            match replies.payload(sid) {
                Payload::Msg { round, body } => {
                    self.global_pos += 1;
                    self.state_tape = self
                        .state_tape
                        .wrapping_mul(0x100000001b3)
                        .wrapping_add(u64::from(*round));
                    let s = self.params.slots as u32;
                    if *round <= 3 * s && round % 3 == 2 {
                        self.pending_commit_pos[sid - 1] = Some(self.global_pos - 1);
                    }
                    self.sessions[sid - 1].on_reply(*round, body);
                }
                Payload::Bot => {
                    self.dead[sid - 1] = true;
                }
                Payload::Na => {}
            }
        }

        if let AdversaryKind::AllAbortInBlock(k) = self.kind {
            if self.current_block() >= k {
                return None;
            }
        }

        let mut candidates: Vec<usize> = (0..q)
            .filter(|&i| self.active(i) && self.stagger_allows(i))
            .collect();
        if candidates.is_empty() {
            // Staggerer fallback: release the oldest withheld response.
            let mut forced: Vec<usize> = (0..q).filter(|&i| self.active(i)).collect();
            forced.sort_by_key(|&i| self.pending_commit_pos[i]);
            candidates = forced;
        }
        let idx = loop {
            if candidates.is_empty() {
                return None;
            }
            let pick = if self.kind == AdversaryKind::StateDependentScheduling {
                let draw: u64 = self.rng.gen();
                let mix = self.state_tape.wrapping_add(draw);
                candidates[(mix % candidates.len() as u64) as usize]
            } else {
                match self.schedule {
                    Schedule::RandomInterleave => {
                        candidates[self.rng.gen_range(0..candidates.len())]
                    }
                    Schedule::BlockStaggered { span } => {
                        let (cur, remaining) = self.span_state;
                        if remaining > 0 && candidates.contains(&cur) {
                            self.span_state = (cur, remaining - 1);
                            cur
                        } else {
                            let mut chosen = candidates[0];
                            for off in 1..=q {
                                let i = (cur + off) % q;
                                if candidates.contains(&i) {
                                    chosen = i;
                                    break;
                                }
                            }
                            self.span_state = (chosen, span.saturating_sub(1));
                            chosen
                        }
                    }
                    Schedule::RoundRobin | Schedule::Abortive { .. } => {
                        let mut chosen = None;
                        for off in 0..q {
                            let i = (self.rr_cursor + off) % q;
                            if candidates.contains(&i) {
                                chosen = Some(i);
                                break;
                            }
                        }
                        let c = chosen.unwrap_or(candidates[0]);
                        self.rr_cursor = (c + 1) % q;
                        c
                    }
                }
            };
            if let Schedule::Abortive { p_abort } = self.schedule {
                if p_abort > 0.0 && self.rng.gen_bool(p_abort) {
                    self.aborted[pick] = true;
                    candidates.retain(|&i| i != pick);
                    continue;
                }
            }
            break pick;
        };

        let (round, body) = self.sessions[idx].next_message(&mut self.rng)?;
        self.last_live = Some(idx + 1);
        Some(BundledMessage::single(q, idx + 1, round, body))
    }
}

// ---------------------------------------------------------------------------
// Whole-run helpers.
// ---------------------------------------------------------------------------

/// Outcome of one concurrent run.
#[derive(Debug)]
pub struct ConcurrentRun {
    pub transcript: TranscriptSet,
    pub secrets: Vec<ProverSecrets>,
    pub verifier_accepts: Vec<Option<bool>>,
    pub stage2_success: Vec<Option<bool>>,
}

/// Runs Q sessions of the protocol against the given adversary.
pub fn run_concurrent(
    params: &ProtocolParams,
    seed_bits: usize,
    base: BaseRelation,
    x: &[u8],
    prover_kind: ProverKind,
    adversary: AdversaryKind,
    seed: u64,
) -> Result<ConcurrentRun> {
    let q = params.q as usize;
    let machines: Vec<ProverMachine> = (0..q)
        .map(|_| ProverMachine::new(*params, seed_bits, base, x.to_vec(), prover_kind.clone()))
        .collect();
    let mut eng = Engine::new(machines);
    let mut driver = AdversaryDriver::new(adversary, *params, seed_bits, base, x.to_vec(), seed);
    let mut prover_rng = rng::derive(seed, "prover", 0);
    let budget = 2 * params.prot_len * params.q + 16;
    let transcript = engine::run(&mut eng, &mut driver, &mut prover_rng, budget, seed)?;
    Ok(ConcurrentRun {
        transcript,
        secrets: eng.machines().iter().map(|m| m.secrets_handle()).collect(),
        verifier_accepts: driver.accepted(),
        stage2_success: eng.machines().iter().map(|m| m.stage2_success).collect(),
    })
}

/// Like [`run_concurrent`] but with an explicit scheduling policy and
/// honest verifier behavior.
pub fn run_concurrent_scheduled(
    params: &ProtocolParams,
    seed_bits: usize,
    base: BaseRelation,
    x: &[u8],
    prover_kind: ProverKind,
    schedule: Schedule,
    seed: u64,
) -> Result<ConcurrentRun> {
    let q = params.q as usize;
    let machines: Vec<ProverMachine> = (0..q)
        .map(|_| ProverMachine::new(*params, seed_bits, base, x.to_vec(), prover_kind.clone()))
        .collect();
    let mut eng = Engine::new(machines);
    let mut driver = AdversaryDriver::with_schedule(
        AdversaryKind::HonestLike,
        schedule,
        *params,
        seed_bits,
        base,
        x.to_vec(),
        seed,
    );
    let mut prover_rng = rng::derive(seed, "prover", 0);
    let budget = 2 * params.prot_len * params.q + 16;
    let transcript = engine::run(&mut eng, &mut driver, &mut prover_rng, budget, seed)?;
    Ok(ConcurrentRun {
        transcript,
        secrets: eng.machines().iter().map(|m| m.secrets_handle()).collect(),
        verifier_accepts: driver.accepted(),
        stage2_success: eng.machines().iter().map(|m| m.stage2_success).collect(),
    })
}

/// Matched-slot count for one session, recomputed from the transcript's
/// verifier bits against the prover's private committed bits. Errors if a
/// committed slot is missing its response.
pub fn matched_count(
    transcript: &TranscriptSet,
    session: SessionId,
    secrets: &ProverSecrets,
) -> Result<u64> {
    let slots = secrets.slots.len();
    let mut verifier_bits: Vec<Option<bool>> = vec![None; slots];
    for entry in transcript.session_view(session) {
        if entry.direction == engine::Direction::Driver {
            if let Some(idx) = slot_of_bit_round(entry.round, u64::MAX) {
                if idx < slots {
                    verifier_bits[idx] = Some(parse_bit_body(&entry.body)?);
                }
            }
        }
    }
    let mut matched = 0u64;
    for (i, slot) in secrets.slots.iter().enumerate() {
        let Some(vb) = verifier_bits[i] else {
            return Err(Error::Protocol(format!(
                "slot {i} of session {session} has no verifier response"
            )));
        };
        matched += u64::from(vb == slot.bit);
    }
    Ok(matched)
}

/// Complete slots of a session within a global-position range: slots whose
/// commitment and verifier bit both fall inside `[start, end)`. The
/// receiver-string message may precede the range.
pub fn complete_slots_in_range(
    ts: &[engine::GlobalEntry],
    session: SessionId,
    slots: u64,
    start: usize,
    end: usize,
) -> Vec<usize> {
    let mut commits = std::collections::BTreeSet::new();
    let mut bits = std::collections::BTreeSet::new();
    for (pos, e) in ts.iter().enumerate().take(end).skip(start) {
        let _ = pos;
        if e.session != session {
            continue;
        }
        if let Some(j) = slot_of_commit_round(e.round) {
            commits.insert(j);
        }
        if let Some(j) = slot_of_bit_round(e.round, slots) {
            bits.insert(j);
        }
    }
    commits.intersection(&bits).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::desk_profile;

    fn demo_base() -> (BaseRelation, Vec<u8>, Vec<u8>) {
        let w = b"the demo witness".to_vec();
        let x = BaseRelation::instance_for(&w);
        (BaseRelation::Sha256Preimage, x, w)
    }

    #[test]
    fn honest_run_accepts_all_sessions() {
        let p = desk_profile(8, 4, 1, 2).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::HonestLike,
            77,
        )
        .unwrap();
        assert_eq!(run.verifier_accepts, vec![Some(true), Some(true)]);
        assert_eq!(run.transcript.len(), (p.prot_len * p.q) as usize);
    }

    #[test]
    fn round_robin_alternates_sessions() {
        let p = desk_profile(8, 4, 1, 2).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::HonestLike,
            78,
        )
        .unwrap();
        let driver_msgs: Vec<usize> = run
            .transcript
            .global
            .iter()
            .filter(|e| e.direction == engine::Direction::Driver)
            .map(|e| e.session)
            .take(4)
            .collect();
        assert_eq!(driver_msgs, vec![1, 2, 1, 2]);
    }

    #[test]
    fn same_seed_same_transcript() {
        let p = desk_profile(8, 4, 1, 2).unwrap();
        let (base, x, w) = demo_base();
        let a = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w.clone() },
            AdversaryKind::HonestLike,
            79,
        )
        .unwrap();
        let b = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::HonestLike,
            79,
        )
        .unwrap();
        assert_eq!(a.transcript.serialize_lines(), b.transcript.serialize_lines());
    }

    #[test]
    fn aborter_one_kills_every_session_at_first_turn() {
        let p = desk_profile(8, 4, 1, 2).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::Aborter(1.0),
            80,
        )
        .unwrap();
        assert!(run.transcript.is_empty());
        assert_eq!(run.verifier_accepts, vec![None, None]);
    }

    #[test]
    fn aborter_zero_equals_honest_like() {
        let p = desk_profile(8, 4, 1, 2).unwrap();
        let (base, x, w) = demo_base();
        let a = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w.clone() },
            AdversaryKind::Aborter(0.0),
            81,
        )
        .unwrap();
        let b = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::HonestLike,
            81,
        )
        .unwrap();
        assert_eq!(a.transcript.serialize_lines(), b.transcript.serialize_lines());
    }

    #[test]
    fn fixed_bits_matched_count_equals_zero_commit_count() {
        let p = desk_profile(16, 4, 1, 1).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::FixedBits(false),
            82,
        )
        .unwrap();
        let zeros = run.secrets[0].slots.iter().filter(|s| !s.bit).count() as u64;
        let m = matched_count(&run.transcript, 1, &run.secrets[0]).unwrap();
        assert_eq!(m, zeros);
        assert_eq!(m, run.secrets[0].matched());
    }

    #[test]
    fn matched_count_errors_on_pending_slots() {
        let p = desk_profile(8, 4, 1, 1).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::HonestLike,
            83,
        )
        .unwrap();
        let mut t = run.transcript.clone();
        t.global.retain(|e| !(e.round == 3 * 8 && e.session == 1));
        assert!(matched_count(&t, 1, &run.secrets[0]).is_err());
    }

    #[test]
    fn matched_count_zero_slots() {
        let ts = TranscriptSet {
            q: 1,
            seed: 0,
            global: vec![],
            deviations: vec![],
        };
        assert_eq!(matched_count(&ts, 1, &ProverSecrets::default()).unwrap(), 0);
    }

    #[test]
    fn stage1_matched_fraction_concentrates() {
        let p = desk_profile(1000, 40, 10, 1).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::HonestLike,
            84,
        )
        .unwrap();
        let m = run.secrets[0].matched() as f64 / 1000.0;
        assert!((0.46..=0.54).contains(&m), "matched fraction {m}");
    }

    #[test]
    fn committed_bits_are_balanced_over_many_slots() {
        let p = desk_profile(10_000, 400, 100, 1).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::HonestLike,
            85,
        )
        .unwrap();
        let ones = run.secrets[0].slots.iter().filter(|s| s.bit).count() as f64;
        let freq = ones / 10_000.0;
        assert!((0.48..=0.52).contains(&freq), "commit-bit frequency {freq}");
    }

    #[test]
    fn verifier_bits_are_balanced() {
        let p = desk_profile(10_000, 400, 100, 1).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::HonestLike,
            86,
        )
        .unwrap();
        let ones = run.secrets[0]
            .slots
            .iter()
            .filter(|s| s.verifier_bit == Some(true))
            .count() as f64;
        let freq = ones / 10_000.0;
        assert!((0.48..=0.52).contains(&freq), "verifier-bit frequency {freq}");
    }

    #[test]
    fn public_coin_streams_identical_across_prover_kinds() {
        // The driver's message stream must not depend on prover content.
        let p = desk_profile(8, 4, 1, 2).unwrap();
        let (base, x, w) = demo_base();
        let kinds = [
            ProverKind::Honest { witness: w },
            ProverKind::Cheating(CheatStrategy::AllZeros),
            ProverKind::Cheating(CheatStrategy::AdaptiveOnTranscript),
        ];
        let mut streams = Vec::new();
        for kind in kinds {
            let run =
                run_concurrent(&p, 8, base, &x, kind, AdversaryKind::HonestLike, 87).unwrap();
            let stream: Vec<(usize, u32, Vec<u8>)> = run
                .transcript
                .global
                .iter()
                .filter(|e| e.direction == engine::Direction::Driver)
                .map(|e| (e.session, e.round, e.body.clone()))
                .collect();
            streams.push(stream);
        }
        assert_eq!(streams[0], streams[1]);
        assert_eq!(streams[0], streams[2]);
    }

    #[test]
    fn stage2_message_during_stage1_aborts_prover() {
        let p = desk_profile(8, 4, 1, 1).unwrap();
        let (base, x, w) = demo_base();
        let mut m = ProverMachine::new(p, 8, base, x, ProverKind::Honest { witness: w });
        let mut r = rng::seeded(90);
        // Out-of-phase message: proof-phase round while in Stage 1.
        let reply = m.on_message(3 * 8 + 1, &[0u8; 16], &mut r);
        assert!(matches!(reply, MachineReply::Reject));
        assert!(m.is_aborted());
    }

    #[test]
    fn garbage_stage2_token_is_rejected() {
        let p = desk_profile(4, 4, 1, 1).unwrap();
        let (base, x, _) = demo_base();
        let mut session = VerifierSession::new(p, 8, base, x.clone(), BitStrategy::Uniform);
        let mut r = rng::seeded(88);
        let mut prover = ProverMachine::new(p, 8, base, x, ProverKind::OpeningsOnly);
        loop {
            let Some((round, body)) = session.next_message(&mut r) else {
                break;
            };
            if round == 3 * 4 + 3 {
                session.on_reply(3 * 4 + 4, b"not a token");
                break;
            }
            match prover.on_message(round, &body, &mut r) {
                MachineReply::Send { round: r2, body: b2 } => session.on_reply(r2, &b2),
                MachineReply::Silent => {}
                MachineReply::Reject => panic!("prover rejected honest message"),
            }
        }
        assert_eq!(session.outcome, Some(false));
    }

    #[test]
    fn slot_staggerer_leaves_a_block_without_complete_slots() {
        // Desk profile with block_len <= 3q so two sessions can fill a block
        // with opener messages alone.
        let p = desk_profile(6, 8, 1, 2).unwrap();
        assert_eq!(p.block_len, 5);
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::SlotStaggerer,
            89,
        )
        .unwrap();
        let blocks = engine::block_view(run.transcript.len(), &p);
        let mut slotless = 0;
        for b in &blocks {
            let complete: usize = (1..=2usize)
                .map(|sid| {
                    complete_slots_in_range(&run.transcript.global, sid, p.slots, b.start, b.end)
                        .len()
                })
                .sum();
            if !b.is_empty() && complete == 0 {
                slotless += 1;
            }
        }
        assert!(slotless >= 1, "no slotless block found");
    }

    #[test]
    fn liveness_under_honest_schedulers() {
        // RoundRobin, RandomInterleave, and BlockStaggered all complete
        // every session with honest parties.
        let p = desk_profile(8, 4, 1, 3).unwrap();
        let (base, x, w) = demo_base();
        for schedule in [
            Schedule::RoundRobin,
            Schedule::RandomInterleave,
            Schedule::BlockStaggered { span: 3 },
        ] {
            let run = run_concurrent_scheduled(
                &p,
                8,
                base,
                &x,
                ProverKind::Honest { witness: w.clone() },
                schedule,
                92,
            )
            .unwrap();
            assert_eq!(
                run.verifier_accepts,
                vec![Some(true); 3],
                "schedule {schedule:?} left a session incomplete"
            );
            assert_eq!(run.transcript.len(), (p.prot_len * p.q) as usize);
        }
    }

    #[test]
    fn block_staggered_schedule_dwells_on_sessions() {
        let p = desk_profile(8, 4, 1, 2).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent_scheduled(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            Schedule::BlockStaggered { span: 4 },
            93,
        )
        .unwrap();
        // The first four driver messages belong to one session.
        let first: Vec<usize> = run
            .transcript
            .global
            .iter()
            .filter(|e| e.direction == engine::Direction::Driver)
            .map(|e| e.session)
            .take(4)
            .collect();
        assert!(first.iter().all(|&s| s == first[0]), "order {first:?}");
    }

    #[test]
    fn all_abort_in_block_truncates_run() {
        let p = desk_profile(8, 4, 1, 2).unwrap();
        let (base, x, w) = demo_base();
        let run = run_concurrent(
            &p,
            8,
            base,
            &x,
            ProverKind::Honest { witness: w },
            AdversaryKind::AllAbortInBlock(1),
            91,
        )
        .unwrap();
        // Nothing past the first block boundary plus one in-flight message.
        assert!(run.transcript.len() <= p.block_len as usize + 2);
        assert!(run.verifier_accepts.iter().all(|a| a.is_none()));
    }
}
