//! The classical block-rewinding simulator.
//!
//! The global transcript is partitioned into blocks. Per block the simulator
//! runs the adversary forward with fresh prover randomness; at the block
//! boundary it looks at the slots completed inside the block (commitment and
//! response both inside). If there is at least one, it picks one uniformly
//! at random: a matched pick continues, an unmatched pick discards the
//! block's transcript and retries. If the block contains no complete slot it
//! flips a fair coin and rewinds on tails, so the rewind rate stays 1/2
//! whether or not slots (or the adversary) survived the block. Retries are
//! capped; hitting the cap forces a continue and is counted, never hidden.
//!
//! Discarded attempts leave no trace: the final transcript consists of
//! exactly one segment per block.

use rand::Rng;

use crate::bczk::{self, AdversaryDriver, AdversaryKind, ProverKind, ProverMachine};
use crate::engine::{
    self, BundledMessage, Driver, Engine, HostedMachine, SessionId, TranscriptSet,
};
use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::proof_backends::BaseRelation;
use crate::util::rng::{self, LabRng};

/// Per-session tallies.
#[derive(Debug, Clone, Default)]
pub struct SessionStats {
    /// Blocks of the final transcript containing at least one complete slot
    /// of this session.
    pub blocks_with_slot: u64,
    /// Slots matched because the simulator picked them in their block.
    pub rigged_matches: u64,
    /// Slots matched by chance without being picked.
    pub lucky_matches: u64,
    pub total_matched: u64,
    pub stage2_success: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SimStats {
    pub per_session: Vec<SessionStats>,
    /// Attempts per block (>= 1 each).
    pub rewind_attempts: Vec<u32>,
    /// Rewinds taken after a chosen-slot mismatch.
    pub slot_rewinds: u64,
    /// Rewinds taken on a dummy coin.
    pub dummy_rewinds: u64,
    /// Total decisions of each kind, final continues included.
    pub slot_decisions: u64,
    pub dummy_decisions: u64,
    pub forced_continues: u64,
    /// Sessions that never completed the protocol.
    pub aborts: u64,
}

impl SimStats {
    pub fn rewind_rate(&self) -> f64 {
        let rewinds = self.slot_rewinds + self.dummy_rewinds;
        let decisions = self.slot_decisions + self.dummy_decisions;
        if decisions == 0 {
            return f64::NAN;
        }
        rewinds as f64 / decisions as f64
    }

    pub fn all_stage2_succeeded(&self) -> bool {
        self.per_session.iter().all(|s| s.stage2_success)
    }

    pub fn csv_header(q: usize) -> String {
        let mut cols = vec![
            "blocks".to_string(),
            "slot_rewinds".into(),
            "dummy_rewinds".into(),
            "slot_decisions".into(),
            "dummy_decisions".into(),
            "forced_continues".into(),
            "aborts".into(),
        ];
        for i in 1..=q {
            for f in ["blocks_with_slot", "rigged", "lucky", "matched", "stage2"] {
                cols.push(format!("s{i}_{f}"));
            }
        }
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.rewind_attempts.len().to_string(),
            self.slot_rewinds.to_string(),
            self.dummy_rewinds.to_string(),
            self.slot_decisions.to_string(),
            self.dummy_decisions.to_string(),
            self.forced_continues.to_string(),
            self.aborts.to_string(),
        ];
        for s in &self.per_session {
            cols.push(s.blocks_with_slot.to_string());
            cols.push(s.rigged_matches.to_string());
            cols.push(s.lucky_matches.to_string());
            cols.push(s.total_matched.to_string());
            cols.push((s.stage2_success as u8).to_string());
        }
        cols.join(",")
    }
}

/// How one block was resolved.
#[derive(Debug, Clone)]
pub struct BlockOutcome {
    pub block: usize,
    /// The slot whose match the simulator enforced, or `None` for a dummy
    /// coin resolution.
    pub chosen: Option<(SessionId, usize)>,
    pub attempts: u32,
    pub forced: bool,
    /// Final transcript segment [start, end) contributed by this block.
    pub segment: (usize, usize),
}

/// Runs the block-rewinding simulator against one adversary. The simulator
/// holds no base witness: its provers prove through matched openings only.
pub fn simulate(
    params: &ProtocolParams,
    adversary: AdversaryKind,
    seed_bits: usize,
    base: BaseRelation,
    x: &[u8],
    seed: u64,
    retry_cap: u32,
) -> Result<(TranscriptSet, SimStats, Vec<BlockOutcome>)> {
    if retry_cap < 1 {
        return Err(Error::InvalidParams("retry_cap must be >= 1".into()));
    }
    let q = params.q as usize;
    let machines: Vec<ProverMachine> = (0..q)
        .map(|_| {
            ProverMachine::new(*params, seed_bits, base, x.to_vec(), ProverKind::OpeningsOnly)
        })
        .collect();
    let mut eng = Engine::new(machines);
    let mut driver = AdversaryDriver::new(adversary, *params, seed_bits, base, x.to_vec(), seed);
    let mut replies = BundledMessage::all_na(q);
    let mut decision_rng: LabRng = rng::derive(seed, "sim-decision", 0);
    let mut driver_done = false;

    let l = params.blocks as usize;
    let block_len = params.block_len as usize;
    let per_attempt_budget = 2 * params.prot_len * params.q + 16;

    let mut stats = SimStats::default();
    let mut outcomes: Vec<BlockOutcome> = Vec::with_capacity(l);
    let mut rigged: Vec<Vec<usize>> = vec![Vec::new(); q];

    for block in 0..l {
        let block_start = eng.transcript_len();
        let block_end = if block + 1 < l {
            (block + 1) * block_len
        } else {
            usize::MAX
        };
        let checkpoint = (eng.clone(), driver.clone(), replies.clone(), driver_done);
        let mut attempts = 0u32;
        let (chosen, forced) = loop {
            attempts += 1;
            let mut prover_rng = rng::derive(
                seed,
                "sim-prover",
                ((block as u64) << 20) | u64::from(attempts),
            );
            let mut steps = 0u64;
            while !driver_done && eng.transcript_len() < block_end {
                steps += 1;
                if steps > per_attempt_budget {
                    return Err(Error::Stall(format!(
                        "block {block} attempt {attempts} exceeded {per_attempt_budget} steps"
                    )));
                }
                match driver.next_bundle(&replies) {
                    Some(bundle) => {
                        replies = eng.step(&bundle, &mut prover_rng)?;
                    }
                    None => driver_done = true,
                }
            }
            let seg_end = eng.transcript_len();

            let mut complete: Vec<(SessionId, usize)> = Vec::new();
            for sid in 1..=q {
                for slot in bczk::complete_slots_in_range(
                    eng.transcript_entries(),
                    sid,
                    params.slots,
                    block_start,
                    seg_end,
                ) {
                    complete.push((sid, slot));
                }
            }

            if complete.is_empty() {
                stats.dummy_decisions += 1;
                let coin: bool = decision_rng.gen();
                if coin {
                    break (None, false);
                }
                if attempts >= retry_cap {
                    stats.forced_continues += 1;
                    break (None, true);
                }
                stats.dummy_rewinds += 1;
            } else {
                stats.slot_decisions += 1;
                let pick = complete[decision_rng.gen_range(0..complete.len())];
                let secrets = eng.machines()[pick.0 - 1].secrets_handle();
                let slot = &secrets.slots[pick.1];
                let matched = slot.verifier_bit == Some(slot.bit);
                if matched {
                    break (Some(pick), false);
                }
                if attempts >= retry_cap {
                    stats.forced_continues += 1;
                    break (Some(pick), true);
                }
                stats.slot_rewinds += 1;
            }
            // Discard the attempt: no recording.
            let (e2, d2, r2, dd2) = checkpoint.clone();
            eng = e2;
            driver = d2;
            replies = r2;
            driver_done = dd2;
        };
        if let (Some((sid, slot)), false) = (chosen, forced) {
            rigged[sid - 1].push(slot);
        }
        stats.rewind_attempts.push(attempts);
        outcomes.push(BlockOutcome {
            block,
            chosen,
            attempts,
            forced,
            segment: (block_start, eng.transcript_len()),
        });
    }

    // The last block runs to driver completion inside the loop; nothing is
    // left to drain here by construction.
    let transcript = eng.transcript_set(seed);
    let blocks = engine::block_view(transcript.len(), params);
    let mut per_session = Vec::with_capacity(q);
    for (i, machine) in eng.machines().iter().enumerate() {
        let sid = i + 1;
        let secrets = machine.secrets_handle();
        let mut s = SessionStats {
            stage2_success: machine.stage2_success.unwrap_or(false),
            ..SessionStats::default()
        };
        for b in &blocks {
            let found = bczk::complete_slots_in_range(
                &transcript.global,
                sid,
                params.slots,
                b.start,
                b.end,
            );
            s.blocks_with_slot += u64::from(!found.is_empty());
        }
        let rigged_set: std::collections::BTreeSet<usize> = rigged[i].iter().copied().collect();
        for (j, slot) in secrets.slots.iter().enumerate() {
            if slot.verifier_bit == Some(slot.bit) {
                s.total_matched += 1;
                if rigged_set.contains(&j) {
                    s.rigged_matches += 1;
                } else {
                    s.lucky_matches += 1;
                }
            }
        }
        stats.aborts += u64::from(!machine.is_complete());
        per_session.push(s);
    }
    stats.per_session = per_session;
    Ok((transcript, stats, outcomes))
}

/// Per-strategy rewind frequency over repeated simulations, and the largest
/// pairwise deviation across the suite.
#[derive(Debug, Clone)]
pub struct RewindProfile {
    pub per_strategy: Vec<(AdversaryKind, f64, u64)>,
    pub max_pairwise_deviation: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn rewind_probability_profile(
    suite: &[AdversaryKind],
    params: &ProtocolParams,
    trials: u64,
    seed_bits: usize,
    base: BaseRelation,
    x: &[u8],
    seed: u64,
    retry_cap: u32,
) -> Result<RewindProfile> {
    let mut per_strategy = Vec::new();
    for (si, &kind) in suite.iter().enumerate() {
        let mut rewinds = 0u64;
        let mut decisions = 0u64;
        for t in 0..trials {
            let run_seed = seed ^ ((si as u64) << 40) ^ t;
            let (_, stats, _) = simulate(params, kind, seed_bits, base, x, run_seed, retry_cap)?;
            rewinds += stats.slot_rewinds + stats.dummy_rewinds;
            decisions += stats.slot_decisions + stats.dummy_decisions;
        }
        per_strategy.push((kind, rewinds as f64 / decisions as f64, decisions));
    }
    let mut max_dev = 0.0f64;
    for a in &per_strategy {
        for b in &per_strategy {
            max_dev = max_dev.max((a.1 - b.1).abs());
        }
    }
    Ok(RewindProfile {
        per_strategy,
        max_pairwise_deviation: max_dev,
    })
}

/// Empirical summaries of the per-session counting quantities.
#[derive(Debug, Clone, Default)]
pub struct ClaimStats {
    pub trials: u64,
    pub mean_blocks_with_slot: Vec<f64>,
    pub mean_rigged: Vec<f64>,
    pub mean_lucky: Vec<f64>,
    pub min_matched: Vec<u64>,
    /// Matched fraction among slots never chosen by the simulator.
    pub luck_rate_unchosen: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn claim_stats(
    params: &ProtocolParams,
    adversary: AdversaryKind,
    trials: u64,
    seed_bits: usize,
    base: BaseRelation,
    x: &[u8],
    seed: u64,
    retry_cap: u32,
) -> Result<ClaimStats> {
    let q = params.q as usize;
    let mut out = ClaimStats {
        trials,
        mean_blocks_with_slot: vec![0.0; q],
        mean_rigged: vec![0.0; q],
        mean_lucky: vec![0.0; q],
        min_matched: vec![u64::MAX; q],
        luck_rate_unchosen: 0.0,
    };
    let mut unchosen_matched = 0u64;
    let mut unchosen_total = 0u64;
    for t in 0..trials {
        let (_, stats, _) =
            simulate(params, adversary, seed_bits, base, x, seed ^ t, retry_cap)?;
        for i in 0..q {
            let s = &stats.per_session[i];
            out.mean_blocks_with_slot[i] += s.blocks_with_slot as f64;
            out.mean_rigged[i] += s.rigged_matches as f64;
            out.mean_lucky[i] += s.lucky_matches as f64;
            out.min_matched[i] = out.min_matched[i].min(s.total_matched);
            unchosen_matched += s.lucky_matches;
            unchosen_total += params.slots - s.rigged_matches;
        }
    }
    for i in 0..q {
        out.mean_blocks_with_slot[i] /= trials as f64;
        out.mean_rigged[i] /= trials as f64;
        out.mean_lucky[i] /= trials as f64;
    }
    out.luck_rate_unchosen = unchosen_matched as f64 / unchosen_total as f64;
    Ok(out)
}
