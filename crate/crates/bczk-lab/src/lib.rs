//! Desk-scale laboratory for bounded-concurrent zero-knowledge protocols.
//!
//! The crate implements a slot-based bounded-concurrent ZK protocol together
//! with the machinery needed to study it empirically at small parameter
//! scales:
//!
//! * [`params`] — protocol parameter derivation plus exact-rational
//!   verification of the combinatorial bound chains the parameters rely on.
//! * [`commitment`] — two-message statistically-binding bit commitments
//!   (Naor-style, PRG from a hash in counter mode).
//! * [`proof_backends`] — relation predicates for every statement the
//!   protocols prove, an ideal proof backend, and a CRS-from-coin-flipping
//!   subprotocol.
//! * [`engine`] — the Q-session concurrent message fabric: bundled messages,
//!   per-session round bookkeeping and adversarial scheduling.
//! * [`bczk`] — prover/verifier state machines for the slot protocol and a
//!   library of adversarial verifier strategies.
//! * [`simulator`] — the block-rewinding simulator with full statistics.
//! * [`soundness`] — exact binomial tail arithmetic and cheating-prover
//!   Monte Carlo.
//! * [`ot`] — ideal statistical sender-private OT and the receiver-private
//!   OT built on top of it, with both privacy games.
//! * [`pok`] — the OT-based proof of knowledge and its rewinding extractor.
//! * [`coinflip`] — commit-then-reveal coin flipping and its simulators.
//! * [`quantum`] — dense statevector toolkit, the measure-and-reflect
//!   rewinding amplifier, and the adaptive cloning-oracle attack.
//! * [`exp`] — seeded, reproducible experiment runner behind the CLI.

pub mod bczk;
pub mod coinflip;
pub mod commitment;
pub mod engine;
pub mod error;
pub mod exp;
pub mod ot;
pub mod params;
pub mod pok;
pub mod proof_backends;
pub mod quantum;
pub mod simulator;
pub mod soundness;
pub mod util;

pub use error::{Error, Result};
