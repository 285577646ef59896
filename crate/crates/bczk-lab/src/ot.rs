//! Oblivious transfer: an ideal two-round statistical sender-private OT
//! (SSOT) and the statistical receiver-private OT (SROT) built from it.
//!
//! The SSOT is an ideal functionality behind a stable transcript interface:
//! `ot1` is an opaque receiver nonce (statistically independent of the
//! choice bit), `ot2` is a digest binding the sender's randomness and input
//! pair, and reconstruction returns `m_β` exactly. A test-only tap
//! [`extract_receiver_bit`] exposes the hidden choice bit to harnesses that
//! model unbounded extraction; protocol code never reads it.
//!
//! The SROT wraps (λ+2)·λ extraction-phase SSOTs (receiver secret-shares
//! `w = (r', β, main-execution randomness)` row-wise and plays SSOT sender,
//! placing each share next to a mask according to a random location bit it
//! later reveals), one main SSOT with inputs `(r', r'⊕β)` against the
//! sender's random choice `r`, a consistency proof, and the final masked
//! pair `(r̃⊕m0, r̃⊕r⊕m1)`.

use num::rational::BigRational;
use num::BigInt;
use rand::Rng;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::proof_backends::{self, Backend, Instance, ProofToken, SrotInstance, SrotWitness, Witness};
use crate::util::bits::BitString;
use crate::util::rng::LabRng;
use crate::util::stats;

/// Bits of sender randomness in a standalone SSOT execution.
pub const SSOT_RAND_BITS: usize = 128;

/// Opaque SSOT transcript: a receiver nonce and a sender-side binding
/// digest. The receiver's choice bit is hidden state, reachable only via
/// the test tap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SsotTranscript {
    pub ot1: [u8; 16],
    pub ot2: [u8; 32],
    receiver_bit: bool,
}

impl SsotTranscript {
    pub fn ot2_digest(sender_randomness: &BitString, m0: bool, m1: bool, ot1: &[u8; 16]) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"ssot2");
        h.update((sender_randomness.len() as u32).to_be_bytes());
        h.update(sender_randomness.as_bytes());
        h.update([m0 as u8, m1 as u8]);
        h.update(ot1);
        h.finalize().into()
    }

    /// Whether this transcript could have been produced by a sender using
    /// the given randomness and input pair.
    pub fn valid_for(&self, sender_randomness: &BitString, m0: bool, m1: bool) -> bool {
        self.ot2 == Self::ot2_digest(sender_randomness, m0, m1, &self.ot1)
    }
}

/// One SSOT execution record.
#[derive(Debug, Clone)]
pub struct SsotSession {
    pub receiver_bit: bool,
    pub sender_inputs: (bool, bool),
    pub sender_randomness: BitString,
    pub transcript: SsotTranscript,
    /// Receiver's reconstructed message, exactly `m_β`.
    pub output: bool,
}

/// Runs one ideal SSOT with explicit sender randomness.
pub fn ssot_run_with_randomness(
    beta: bool,
    m0: bool,
    m1: bool,
    sender_randomness: BitString,
    rng: &mut LabRng,
) -> SsotSession {
    let mut ot1 = [0u8; 16];
    rng.fill(&mut ot1);
    let ot2 = SsotTranscript::ot2_digest(&sender_randomness, m0, m1, &ot1);
    let transcript = SsotTranscript {
        ot1,
        ot2,
        receiver_bit: beta,
    };
    let output = if beta { m1 } else { m0 };
    SsotSession {
        receiver_bit: beta,
        sender_inputs: (m0, m1),
        sender_randomness,
        transcript,
        output,
    }
}

/// Runs one ideal SSOT with fresh sender randomness.
pub fn ssot_run(beta: bool, m0: bool, m1: bool, rng: &mut LabRng) -> SsotSession {
    let r = BitString::random(rng, SSOT_RAND_BITS);
    ssot_run_with_randomness(beta, m0, m1, r, rng)
}

/// Test-only tap: reveals the receiver's hidden choice bit. Excluded from
/// every protocol surface; harnesses that model unbounded parties use it.
pub fn extract_receiver_bit(t: &SsotTranscript) -> bool {
    t.receiver_bit
}

/// How the SROT receiver behaves; the non-honest settings model the
/// adversaries of the privacy games.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverBehavior {
    pub beta: bool,
    /// β value encoded into the extraction-phase shares (row 2 of `w`).
    /// Honest receivers use `beta`.
    pub extraction_beta: bool,
    /// Flip one revealed location bit (cell (0,0)) after sharing.
    pub lie_about_location: bool,
    /// Flip one share (cell (0,0)) after the XOR constraint was set.
    pub corrupt_share: bool,
}

impl ReceiverBehavior {
    pub fn honest(beta: bool) -> Self {
        ReceiverBehavior {
            beta,
            extraction_beta: beta,
            lie_about_location: false,
            corrupt_share: false,
        }
    }
}

/// Full record of one SROT run, sufficient to replay and re-verify it.
#[derive(Debug, Clone)]
pub struct SrotRun {
    pub lambda: usize,
    pub m0: bool,
    pub m1: bool,
    pub beta: bool,
    /// Receiver side: shares, masks, location bits; row i shares XOR to
    /// `w_i` where `w = (r', β, main sender randomness)`.
    pub shares: Vec<BitString>,
    pub masks: Vec<BitString>,
    pub locations: Vec<BitString>,
    pub cell_randomness: Vec<Vec<BitString>>,
    pub cell_transcripts: Vec<Vec<SsotTranscript>>,
    /// Sender side: its per-cell probe bits and what it recovered.
    pub sender_probes: Vec<BitString>,
    pub sender_recovered: Vec<BitString>,
    pub r_prime: bool,
    pub main_sender_randomness: BitString,
    pub r: bool,
    pub r_tilde: bool,
    pub main_transcript: SsotTranscript,
    pub zk_token: ProofToken,
    pub final_pair: (bool, bool),
    pub output: bool,
}

impl SrotRun {
    /// Structured replay record, hex fields.
    pub fn to_record(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda": self.lambda,
            "m0": self.m0 as u8,
            "m1": self.m1 as u8,
            "beta": self.beta as u8,
            "shares": self.shares.iter().map(BitString::to_hex).collect::<Vec<_>>(),
            "masks": self.masks.iter().map(BitString::to_hex).collect::<Vec<_>>(),
            "locations": self.locations.iter().map(BitString::to_hex).collect::<Vec<_>>(),
            "sender_probes": self.sender_probes.iter().map(BitString::to_hex).collect::<Vec<_>>(),
            "r_prime": self.r_prime as u8,
            "r": self.r as u8,
            "r_tilde": self.r_tilde as u8,
            "main_ot1": hex::encode(self.main_transcript.ot1),
            "main_ot2": hex::encode(self.main_transcript.ot2),
            "zk_token": hex::encode(self.zk_token.to_bytes()),
            "final_pair": [self.final_pair.0 as u8, self.final_pair.1 as u8],
            "output": self.output as u8,
        })
    }
}

/// Shares `w_i` into `lambda` bits XOR-ing to it.
fn share_bit<R: Rng>(rng: &mut R, w_i: bool, lambda: usize) -> BitString {
    let mut row = BitString::random(rng, lambda);
    let parity = row.parity();
    if parity != w_i {
        let last = lambda - 1;
        let flipped = !row.get(last);
        row.set(last, flipped);
    }
    row
}

/// Runs the SROT with an honest sender and the given receiver behavior.
/// Returns the receiver's output and the run record, or an abort if the
/// consistency proof fails.
pub fn srot_run_with(
    m0: bool,
    m1: bool,
    behavior: ReceiverBehavior,
    lambda: usize,
    rng: &mut LabRng,
) -> Result<(bool, SrotRun)> {
    if lambda < 2 {
        return Err(Error::InvalidParams(format!("srot lambda must be >= 2, got {lambda}")));
    }
    let rows = lambda + 2;
    let beta = behavior.beta;

    // Receiver secrets.
    let r_prime = rng.gen::<bool>();
    let main_sender_randomness = BitString::random(rng, lambda);
    let mut w = BitString::zero(rows);
    w.set(0, r_prime);
    w.set(1, behavior.extraction_beta);
    for i in 0..lambda {
        w.set(2 + i, main_sender_randomness.get(i));
    }

    let mut shares: Vec<BitString> = (0..rows).map(|i| share_bit(rng, w.get(i), lambda)).collect();
    if behavior.corrupt_share {
        let v = !shares[0].get(0);
        shares[0].set(0, v);
    }
    let masks: Vec<BitString> = (0..rows).map(|_| BitString::random(rng, lambda)).collect();
    let mut locations: Vec<BitString> = (0..rows).map(|_| BitString::random(rng, lambda)).collect();

    // Extraction phase: receiver plays SSOT sender cell by cell; the SROT
    // sender probes with a fresh random choice bit per cell.
    let mut cell_randomness = Vec::with_capacity(rows);
    let mut cell_transcripts = Vec::with_capacity(rows);
    let mut sender_probes = Vec::with_capacity(rows);
    let mut sender_recovered = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut rnds = Vec::with_capacity(lambda);
        let mut trs = Vec::with_capacity(lambda);
        let mut probes = BitString::zero(lambda);
        let mut recovered = BitString::zero(lambda);
        for j in 0..lambda {
            let b = locations[i].get(j);
            let (cell_m0, cell_m1) = if b {
                (masks[i].get(j), shares[i].get(j))
            } else {
                (shares[i].get(j), masks[i].get(j))
            };
            let probe = rng.gen::<bool>();
            let rand = BitString::random(rng, lambda);
            let sess = ssot_run_with_randomness(probe, cell_m0, cell_m1, rand.clone(), rng);
            probes.set(j, probe);
            recovered.set(j, sess.output);
            rnds.push(rand);
            trs.push(sess.transcript);
        }
        cell_randomness.push(rnds);
        cell_transcripts.push(trs);
        sender_probes.push(probes);
        sender_recovered.push(recovered);
    }
    if behavior.lie_about_location {
        let v = !locations[0].get(0);
        locations[0].set(0, v);
    }

    // Main execution: roles as in the extraction phase, the receiver again
    // the SSOT sender, now with inputs (r', r'⊕β) against the sender's r.
    let r = rng.gen::<bool>();
    let main = ssot_run_with_randomness(
        r,
        r_prime,
        r_prime ^ beta,
        main_sender_randomness.clone(),
        rng,
    );
    let r_tilde = main.output;

    // Consistency proof, receiver proving.
    let instance = Instance::Srot(SrotInstance {
        lambda,
        main_transcript: main.transcript.clone(),
        cell_transcripts: cell_transcripts.clone(),
        locations: locations.clone(),
    });
    let witness = Witness::Srot(SrotWitness {
        r_prime,
        beta: behavior.extraction_beta,
        main_sender_randomness: main_sender_randomness.clone(),
        cell_randomness: cell_randomness.clone(),
        shares: shares.clone(),
        masks: masks.clone(),
    });
    let zk_token = proof_backends::prove(Backend::Ideal, &instance, &witness)?;
    if !proof_backends::verify(Backend::Ideal, &instance, &zk_token) {
        return Err(Error::AbortAt {
            what: "srot consistency proof".into(),
            index: 0,
        });
    }

    let final_pair = (r_tilde ^ m0, r_tilde ^ r ^ m1);
    let output = if beta { final_pair.1 } else { final_pair.0 } ^ r_prime;
    let run = SrotRun {
        lambda,
        m0,
        m1,
        beta,
        shares,
        masks,
        locations,
        cell_randomness,
        cell_transcripts,
        sender_probes,
        sender_recovered,
        r_prime,
        main_sender_randomness,
        r,
        r_tilde,
        main_transcript: main.transcript,
        zk_token,
        final_pair,
        output,
    };
    Ok((output, run))
}

/// Honest SROT run.
pub fn srot_run(
    m0: bool,
    m1: bool,
    beta: bool,
    lambda: usize,
    rng: &mut LabRng,
) -> Result<(bool, SrotRun)> {
    srot_run_with(m0, m1, ReceiverBehavior::honest(beta), lambda, rng)
}

// ---------------------------------------------------------------------------
// Receiver privacy.
// ---------------------------------------------------------------------------

/// The sender's view reduced to its sufficient statistic: per extraction
/// row, whether every cell was recovered (probe matched the location) and,
/// if so, the XOR of the recovered values; plus the sender's main choice and
/// the bit it reconstructed. Everything else in the view is noise that is
/// independent of the receiver's bit: unmatched cells return uniform masks,
/// matched proper subsets of a share row are marginally uniform, and the
/// ideal transcripts are opaque.
fn reduced_sender_view(run: &SrotRun) -> Vec<u8> {
    let mut key = Vec::with_capacity(run.shares.len() + 2);
    for i in 0..run.shares.len() {
        let matched_all = (0..run.lambda)
            .all(|j| run.sender_probes[i].get(j) == run.locations[i].get(j));
        if matched_all {
            key.push(1 + run.sender_recovered[i].parity() as u8);
        } else {
            key.push(0);
        }
    }
    key.push(run.r as u8);
    key.push(run.r_tilde as u8);
    key
}

/// Empirical total-variation distance between the sender's view with β = 0
/// and β = 1, over `trials` honest runs per side.
pub fn receiver_privacy_tv(lambda: usize, trials: u64, rng: &mut LabRng) -> Result<f64> {
    let mut h0: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    let mut h1: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    for _ in 0..trials {
        let (_, run0) = srot_run(false, true, false, lambda, rng)?;
        let (_, run1) = srot_run(false, true, true, lambda, rng)?;
        *h0.entry(reduced_sender_view(&run0)).or_default() += 1;
        *h1.entry(reduced_sender_view(&run1)).or_default() += 1;
    }
    Ok(stats::empirical_tv(&h0, &h1))
}

/// Exact total-variation distance between the two sender-view distributions
/// at small λ, by enumeration over the reduced view with exact dyadic
/// probabilities.
///
/// Per row the view symbol is N (not fully recovered), or Z/O (fully
/// recovered with XOR 0/1); full recovery has probability 2^-λ and then the
/// XOR equals the shared bit. Rows are independent given `w`; `r̃` equals
/// `r' ⊕ (r ∧ β)`.
pub fn receiver_privacy_tv_exact(lambda: usize) -> Result<BigRational> {
    if !(2..=8).contains(&lambda) {
        return Err(Error::TooLarge(format!(
            "exact receiver-privacy enumeration supports 2 <= lambda <= 8, got {lambda}"
        )));
    }
    let rows = lambda + 2;
    // Row-symbol probabilities scaled by 2^lambda: P(N | w) = 2^lambda − 1,
    // P(full with XOR x | w) = [x == w].
    let p_not_full = (1u64 << lambda) - 1;
    let row_prob = |symbol: u8, w_i: bool| -> u64 {
        match symbol {
            0 => p_not_full,
            1 => u64::from(!w_i),
            2 => u64::from(w_i),
            _ => unreachable!(),
        }
    };

    // Enumerate every view atom (s_1..s_rows, r, r̃), summing over the hidden
    // r'; the r*-rows carry a uniform hidden bit that is marginalized by a
    // (row_prob(s,0) + row_prob(s,1)) factor. All probabilities share the
    // denominator 2^(rows·λ) · 2 (r') · 2 (r) · 2^(rows−2) (marginalized
    // hidden bits); the leading 1/2 of the TV adds one more power.
    let denom = BigInt::from(2).pow((rows * lambda + 2 + (rows - 2) + 1) as u32);
    let mut abs_diff_num = BigInt::from(0);
    let n_atoms = 3usize.pow(rows as u32);
    for atom in 0..n_atoms {
        let mut symbols = Vec::with_capacity(rows);
        let mut a = atom;
        for _ in 0..rows {
            symbols.push((a % 3) as u8);
            a /= 3;
        }
        for r in [false, true] {
            for r_tilde in [false, true] {
                let mut p = [BigInt::from(0), BigInt::from(0)];
                for (bi, beta) in [false, true].into_iter().enumerate() {
                    let mut acc = BigInt::from(0);
                    for r_prime in [false, true] {
                        if r_tilde != (r_prime ^ (r & beta)) {
                            continue;
                        }
                        let mut term = BigInt::from(row_prob(symbols[0], r_prime))
                            * BigInt::from(row_prob(symbols[1], beta));
                        for &s in &symbols[2..] {
                            term *= BigInt::from(row_prob(s, false) + row_prob(s, true));
                        }
                        acc += term;
                    }
                    p[bi] = acc;
                }
                let d = if p[0] >= p[1] {
                    p[0].clone() - p[1].clone()
                } else {
                    p[1].clone() - p[0].clone()
                };
                abs_diff_num += d;
            }
        }
    }
    Ok(BigRational::new(abs_diff_num, denom))
}

// ---------------------------------------------------------------------------
// Sender privacy.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverStrategy {
    Honest(bool),
    /// Corrupts one extraction share, so the consistency proof fails.
    ShareWithholder,
    /// Lies about a revealed location with probability 1/2 per run.
    LocationLiar,
}

/// Outcome of the two sender-privacy games.
#[derive(Debug, Clone)]
pub struct SenderPrivacyReport {
    pub p0_hat: f64,
    pub p1_hat: f64,
    /// min(p0, p1), the scheme's advantage estimate.
    pub advantage: f64,
    pub aborted_runs: u64,
    pub counted_runs: u64,
}

/// Plays games G0 (randomize the m0 slot) and G1 (randomize the m1 slot)
/// against the given receiver strategy. The distinguisher is the natural
/// one: reconstruct through the receiver's state and compare with the known
/// message pair. Aborted runs are excluded from the win-rate denominators
/// and reported separately.
pub fn sender_privacy_game(
    strategy: ReceiverStrategy,
    m0: bool,
    m1: bool,
    lambda: usize,
    trials: u64,
    rng: &mut LabRng,
) -> Result<SenderPrivacyReport> {
    let mut wins0 = 0u64;
    let mut wins1 = 0u64;
    let mut counted = 0u64;
    let mut aborted = 0u64;
    for _ in 0..trials {
        let behavior = match strategy {
            ReceiverStrategy::Honest(beta) => ReceiverBehavior::honest(beta),
            ReceiverStrategy::ShareWithholder => ReceiverBehavior {
                beta: false,
                extraction_beta: false,
                lie_about_location: false,
                corrupt_share: true,
            },
            ReceiverStrategy::LocationLiar => {
                let lie = rng.gen::<bool>();
                ReceiverBehavior {
                    beta: false,
                    extraction_beta: false,
                    lie_about_location: lie,
                    corrupt_share: false,
                }
            }
        };
        // Interactive phase under the real inputs; the games replace the
        // final pair only.
        let run = match srot_run_with(m0, m1, behavior, lambda, rng) {
            Ok((_, run)) => run,
            Err(Error::AbortAt { .. }) => {
                aborted += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        counted += 1;

        // Game G0: final pair carries (m_{b0}, m1).
        let b0 = rng.gen::<bool>();
        let g0_pair = (
            run.r_tilde ^ if b0 { m1 } else { m0 },
            run.r_tilde ^ run.r ^ m1,
        );
        let guess0 = receiver_guess(&run, g0_pair, (m0, m1), 0, rng);
        wins0 += u64::from(guess0 == b0);

        // Game G1: final pair carries (m0, m_{b1}).
        let b1 = rng.gen::<bool>();
        let g1_pair = (
            run.r_tilde ^ m0,
            run.r_tilde ^ run.r ^ if b1 { m1 } else { m0 },
        );
        let guess1 = receiver_guess(&run, g1_pair, (m0, m1), 1, rng);
        wins1 += u64::from(guess1 == b1);
    }
    if counted == 0 {
        return Ok(SenderPrivacyReport {
            p0_hat: 0.0,
            p1_hat: 0.0,
            advantage: 0.0,
            aborted_runs: aborted,
            counted_runs: 0,
        });
    }
    let p0_hat = (wins0 as f64 / counted as f64 - 0.5).abs();
    let p1_hat = (wins1 as f64 / counted as f64 - 0.5).abs();
    Ok(SenderPrivacyReport {
        p0_hat,
        p1_hat,
        advantage: p0_hat.min(p1_hat),
        aborted_runs: aborted,
        counted_runs: counted,
    })
}

/// The distinguisher attached to the receiver strategies: reconstruct
/// `pair[β] ⊕ r'`; if the recovered message pins the randomized slot, answer
/// it, otherwise guess.
fn receiver_guess(
    run: &SrotRun,
    pair: (bool, bool),
    known: (bool, bool),
    game: u8,
    rng: &mut LabRng,
) -> bool {
    let recovered = if run.beta { pair.1 } else { pair.0 } ^ run.r_prime;
    let informative = (game == 0 && !run.beta) || (game == 1 && run.beta);
    if informative && known.0 != known.1 {
        // recovered = m_b; with distinct messages m_b identifies b.
        recovered == known.1
    } else {
        rng.gen::<bool>()
    }
}
