//! The Q-session concurrent message fabric.
//!
//! A driver (the concurrent adversary) exchanges *bundled* messages with an
//! engine hosting Q per-session state machines. Every bundle has exactly Q
//! entries, one per session; at each step exactly one entry is live (the
//! rest are N/A) so the global transcript order is well defined. In-order
//! live messages are answered by the session machine; an out-of-order round
//! kills the session, which answers (⊥,⊥) once and N/A afterwards. A driver
//! that marks several entries live is normalized: the lowest session id is
//! processed and the event is logged as a protocol deviation.
//!
//! Engines are single-owner state machines; they clone cheaply, which is
//! what the block-rewinding simulator uses to rewind.

use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::util::rng::LabRng;

pub type SessionId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// No message from/for this session at this step.
    Na,
    /// A protocol message for round `round` of the session.
    Msg { round: u32, body: Vec<u8> },
    /// The (⊥,⊥) reply marking a session killed by an out-of-order message.
    Bot,
}

/// One step's worth of messages: exactly Q entries, session ids 1..=Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundledMessage {
    pub entries: Vec<(SessionId, Payload)>,
}

impl BundledMessage {
    pub fn all_na(q: usize) -> Self {
        BundledMessage {
            entries: (1..=q).map(|s| (s, Payload::Na)).collect(),
        }
    }

    /// A bundle with a single live message.
    pub fn single(q: usize, session: SessionId, round: u32, body: Vec<u8>) -> Self {
        let mut b = Self::all_na(q);
        b.entries[session - 1].1 = Payload::Msg { round, body };
        b
    }

    pub fn validate(&self, q: usize) -> Result<()> {
        if self.entries.len() != q {
            return Err(Error::Protocol(format!(
                "bundle has {} entries, expected {q}",
                self.entries.len()
            )));
        }
        for (i, (sid, _)) in self.entries.iter().enumerate() {
            if *sid != i + 1 {
                return Err(Error::Protocol(format!(
                    "bundle entry {i} carries session id {sid}"
                )));
            }
        }
        Ok(())
    }

    pub fn payload(&self, session: SessionId) -> &Payload {
        &self.entries[session - 1].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Sent by the driving side (the concurrent adversary).
    Driver,
    /// Sent by a hosted session machine.
    Hosted,
}

/// One protocol message in the global interleaved order.
#[derive(Debug, Clone)]
pub struct GlobalEntry {
    pub step: u64,
    pub session: SessionId,
    pub round: u32,
    pub direction: Direction,
    pub body: Vec<u8>,
}

/// Full record of a concurrent run.
#[derive(Debug, Clone)]
pub struct TranscriptSet {
    pub q: usize,
    pub seed: u64,
    pub global: Vec<GlobalEntry>,
    pub deviations: Vec<String>,
}

impl TranscriptSet {
    pub fn len(&self) -> usize {
        self.global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_empty()
    }

    /// Per-session view, in global order.
    pub fn session_view(&self, session: SessionId) -> Vec<&GlobalEntry> {
        self.global.iter().filter(|e| e.session == session).collect()
    }

    /// Line-delimited records: step, session, round, direction, payload hex.
    pub fn serialize_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.global {
            let dir = match e.direction {
                Direction::Driver => "v",
                Direction::Hosted => "p",
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                e.step,
                e.session,
                e.round,
                dir,
                hex::encode(&e.body)
            ));
        }
        out
    }
}

/// What a hosted machine does with an in-order message.
#[derive(Debug, Clone)]
pub enum MachineReply {
    /// Emit the next protocol message.
    Send { round: u32, body: Vec<u8> },
    /// Nothing to send; the counterparty owns the next round.
    Silent,
    /// Terminal rejection; the session is dead.
    Reject,
}

/// A per-session protocol state machine hosted by the engine.
pub trait HostedMachine: Clone {
    /// The round index this machine expects the driver to send next;
    /// `None` once the session is complete or aborted.
    fn expected_round(&self) -> Option<u32>;

    fn on_message(&mut self, round: u32, body: &[u8], rng: &mut LabRng) -> MachineReply;

    fn is_complete(&self) -> bool;
}

#[derive(Debug, Clone)]
pub struct Engine<M: HostedMachine> {
    q: usize,
    machines: Vec<M>,
    dead: Vec<bool>,
    bot_pending: Vec<bool>,
    transcript: Vec<GlobalEntry>,
    deviations: Vec<String>,
    step: u64,
}

impl<M: HostedMachine> Engine<M> {
    pub fn new(machines: Vec<M>) -> Self {
        let q = machines.len();
        Engine {
            q,
            machines,
            dead: vec![false; q],
            bot_pending: vec![false; q],
            transcript: Vec::new(),
            deviations: Vec::new(),
            step: 0,
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn machines(&self) -> &[M] {
        &self.machines
    }

    pub fn transcript_len(&self) -> usize {
        self.transcript.len()
    }

    pub fn transcript_entries(&self) -> &[GlobalEntry] {
        &self.transcript
    }

    pub fn is_dead(&self, session: SessionId) -> bool {
        self.dead[session - 1]
    }

    pub fn all_settled(&self) -> bool {
        (0..self.q).all(|i| self.dead[i] || self.machines[i].is_complete())
    }

    pub fn into_transcript(self, seed: u64) -> TranscriptSet {
        TranscriptSet {
            q: self.q,
            seed,
            global: self.transcript,
            deviations: self.deviations,
        }
    }

    pub fn transcript_set(&self, seed: u64) -> TranscriptSet {
        TranscriptSet {
            q: self.q,
            seed,
            global: self.transcript.clone(),
            deviations: self.deviations.clone(),
        }
    }

    /// Processes one bundle. Hosted randomness is drawn from `rng`, which
    /// the block-rewinding simulator refreshes per attempt.
    pub fn step(&mut self, incoming: &BundledMessage, rng: &mut LabRng) -> Result<BundledMessage> {
        incoming.validate(self.q)?;
        self.step += 1;
        let mut live: Vec<SessionId> = incoming
            .entries
            .iter()
            .filter(|(_, p)| matches!(p, Payload::Msg { .. }))
            .map(|(s, _)| *s)
            .collect();
        if live.len() > 1 {
            self.deviations.push(format!(
                "step {}: {} live entries, processing session {} only",
                self.step,
                live.len(),
                live[0]
            ));
            live.truncate(1);
        }
        let mut reply = BundledMessage::all_na(self.q);
        let Some(sid) = live.first().copied() else {
            return Ok(reply);
        };
        let idx = sid - 1;
        let Payload::Msg { round, body } = incoming.payload(sid).clone() else {
            unreachable!()
        };
        if self.dead[idx] {
            if self.bot_pending[idx] {
                self.bot_pending[idx] = false;
                reply.entries[idx].1 = Payload::Bot;
            }
            return Ok(reply);
        }
        match self.machines[idx].expected_round() {
            Some(expected) if expected == round => {
                self.transcript.push(GlobalEntry {
                    step: self.step,
                    session: sid,
                    round,
                    direction: Direction::Driver,
                    body: body.clone(),
                });
                match self.machines[idx].on_message(round, &body, rng) {
                    MachineReply::Send { round: r2, body: b2 } => {
                        self.transcript.push(GlobalEntry {
                            step: self.step,
                            session: sid,
                            round: r2,
                            direction: Direction::Hosted,
                            body: b2.clone(),
                        });
                        reply.entries[idx].1 = Payload::Msg { round: r2, body: b2 };
                    }
                    MachineReply::Silent => {}
                    MachineReply::Reject => {
                        self.dead[idx] = true;
                        reply.entries[idx].1 = Payload::Bot;
                    }
                }
            }
            _ => {
                // Out of order (or message to a finished session): the
                // session dies and answers (⊥,⊥) exactly once.
                self.dead[idx] = true;
                reply.entries[idx].1 = Payload::Bot;
            }
        }
        Ok(reply)
    }
}

/// The adversarial/driving side of a run.
pub trait Driver {
    /// Produces the next bundle given the engine's replies to the previous
    /// one, or `None` when the driver is finished.
    fn next_bundle(&mut self, replies: &BundledMessage) -> Option<BundledMessage>;
}

/// Session-picking policies for the driver library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    RoundRobin,
    RandomInterleave,
    /// Stay on one session for `span` of its turns, then rotate.
    BlockStaggered { span: u32 },
    /// Round-robin, aborting each session turn with the given probability.
    Abortive { p_abort: f64 },
}

/// Drives the engine to completion. `budget` bounds the number of steps
/// (the callers use 2·prot_len·q); exceeding it is a stall error.
pub fn run<M: HostedMachine, D: Driver>(
    engine: &mut Engine<M>,
    driver: &mut D,
    rng: &mut LabRng,
    budget: u64,
    seed: u64,
) -> Result<TranscriptSet> {
    let mut replies = BundledMessage::all_na(engine.q());
    let mut steps = 0u64;
    while let Some(bundle) = driver.next_bundle(&replies) {
        steps += 1;
        if steps > budget {
            return Err(Error::Stall(format!("step budget {budget} exceeded")));
        }
        replies = engine.step(&bundle, rng)?;
    }
    Ok(engine.transcript_set(seed))
}

/// A contiguous span of the global transcript order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub index: usize,
    /// Half-open range [start, end) of global-order positions.
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Partitions `total` global messages into `params.blocks` blocks of
/// `params.block_len` messages; the last block absorbs the remainder.
pub fn block_view(total: usize, params: &ProtocolParams) -> Vec<Block> {
    let l = params.blocks as usize;
    let bl = params.block_len as usize;
    let mut out = Vec::with_capacity(l);
    for i in 0..l {
        let start = (i * bl).min(total);
        let end = if i + 1 == l { total } else { ((i + 1) * bl).min(total) };
        out.push(Block {
            index: i,
            start,
            end: end.max(start),
        });
    }
    out
}
