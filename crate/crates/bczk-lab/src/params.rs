//! Protocol parameters and exact verification of the combinatorial bound
//! chains they are chosen to satisfy.
//!
//! Two profiles exist. The `Paper` profile uses the polynomial formulas
//! (slots = 120·Q⁷·λ and friends), whose message counts are astronomically
//! large for Q ≥ 2 and are used only for arithmetic checks. The `Desk`
//! profile keeps the structural relation the analysis relies on — a matched
//! slot threshold of slots/2 plus a positive gap — at sizes a simulation can
//! actually run. Every experiment result records which profile produced it.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Paper,
    Desk,
}

/// Validated protocol parameters.
///
/// Invariants (enforced at construction):
/// * Paper profile: `slots = 120·q⁷·λ`, `blocks = 24·q⁶·λ`,
///   `prot_len = 3·slots + 4`, `block_len = ⌊prot_len·q / blocks⌋`,
///   `threshold = 60·q⁷·λ + q⁴·λ`.
/// * Desk profile: `slots` even, `blocks ≥ q`, `threshold = slots/2 + gap`
///   with `1 ≤ gap < slots/2`, `block_len = ⌊(3·slots+4)·q / blocks⌋ ≥ 4`.
/// * All fields strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub q: u64,
    pub lambda: u64,
    /// Stage-1 slot count per session.
    pub slots: u64,
    /// Number of blocks the global transcript is partitioned into.
    pub blocks: u64,
    /// Messages per block (the final block absorbs the remainder).
    pub block_len: u64,
    /// Messages per protocol session: 3·slots + 4.
    pub prot_len: u64,
    /// Matched-slot threshold for the disjunctive proof statement.
    pub threshold: u64,
    pub profile: Profile,
}

fn checked_poly(q: u64, lambda: u64, coeff: u64, q_pow: u32) -> Result<u64> {
    q.checked_pow(q_pow)
        .and_then(|p| p.checked_mul(coeff))
        .and_then(|p| p.checked_mul(lambda))
        .ok_or_else(|| {
            Error::OutOfRange(format!(
                "{coeff}*q^{q_pow}*lambda overflows u64 at q={q}, lambda={lambda}"
            ))
        })
}

/// Paper-profile parameters from the session bound and security parameter.
pub fn derive_params(q: u64, lambda: u64) -> Result<ProtocolParams> {
    if q < 1 || lambda < 1 {
        return Err(Error::InvalidParams(format!(
            "q and lambda must be >= 1, got q={q}, lambda={lambda}"
        )));
    }
    let slots = checked_poly(q, lambda, 120, 7)?;
    let blocks = checked_poly(q, lambda, 24, 6)?;
    let prot_len = slots
        .checked_mul(3)
        .and_then(|v| v.checked_add(4))
        .ok_or_else(|| Error::OutOfRange("prot_len overflows u64".into()))?;
    let block_len = prot_len
        .checked_mul(q)
        .ok_or_else(|| Error::OutOfRange("prot_len*q overflows u64".into()))?
        / blocks;
    let threshold = checked_poly(q, lambda, 60, 7)?
        .checked_add(checked_poly(q, lambda, 1, 4)?)
        .ok_or_else(|| Error::OutOfRange("threshold overflows u64".into()))?;
    Ok(ProtocolParams {
        q,
        lambda,
        slots,
        blocks,
        block_len,
        prot_len,
        threshold,
        profile: Profile::Paper,
    })
}

/// Scaled parameters preserving the slots/2-plus-gap structure.
pub fn desk_profile(slots: u64, blocks: u64, gap: u64, q: u64) -> Result<ProtocolParams> {
    if q < 1 {
        return Err(Error::InvalidParams("q must be >= 1".into()));
    }
    if slots == 0 || slots % 2 != 0 {
        return Err(Error::InvalidParams(format!(
            "slots must be positive and even, got {slots}"
        )));
    }
    if blocks < q {
        return Err(Error::InvalidParams(format!(
            "blocks ({blocks}) must be >= q ({q})"
        )));
    }
    if gap < 1 || gap >= slots / 2 {
        return Err(Error::InvalidParams(format!(
            "gap must satisfy 1 <= gap < slots/2, got gap={gap}, slots={slots}"
        )));
    }
    let prot_len = 3 * slots + 4;
    let block_len = prot_len * q / blocks;
    if block_len < 4 {
        return Err(Error::InvalidParams(format!(
            "block_len = floor(prot_len*q/blocks) = {block_len} < 4"
        )));
    }
    Ok(ProtocolParams {
        q,
        lambda: 1,
        slots,
        blocks,
        block_len,
        prot_len,
        threshold: slots / 2 + gap,
        profile: Profile::Desk,
    })
}

impl ProtocolParams {
    /// Flat key-value record with decimal strings, for experiment reports.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let profile = match self.profile {
            Profile::Paper => "paper",
            Profile::Desk => "desk",
        };
        vec![
            ("profile".into(), profile.into()),
            ("q".into(), self.q.to_string()),
            ("lambda".into(), self.lambda.to_string()),
            ("slots".into(), self.slots.to_string()),
            ("blocks".into(), self.blocks.to_string()),
            ("block_len".into(), self.block_len.to_string()),
            ("prot_len".into(), self.prot_len.to_string()),
            ("threshold".into(), self.threshold.to_string()),
        ]
    }

    /// Threshold lowered by the message count `m` an embedded subprotocol
    /// consumes, for running the proof-of-knowledge variant concurrently.
    pub fn with_threshold_adjustment(&self, m: u64) -> Result<ProtocolParams> {
        if m >= self.threshold {
            return Err(Error::InvalidParams(format!(
                "adjustment {m} consumes the whole threshold {}",
                self.threshold
            )));
        }
        let mut p = *self;
        p.threshold -= m;
        Ok(p)
    }
}

/// One exact-arithmetic record of the bound chain at a grid point.
#[derive(Debug, Clone)]
pub struct GridBound {
    pub q: u64,
    pub lambda: u64,
    /// Lower bound on blocks containing a full slot of a fixed session:
    /// (prot_len/2 − 3·blocks) / (block_len − 3), as an exact rational.
    pub mu_lower: BigRational,
    pub six_q5_lambda: BigInt,
    /// Lower bound on the expected number of simulator-picked slots for a
    /// fixed session: mu_lower / q.
    pub rig_expectation: BigRational,
    pub six_q4_lambda: BigInt,
    /// 60·q⁷·λ − 2·q⁴·λ, the slots a session must match by chance.
    pub luck_threshold: BigInt,
    /// mu_lower ≥ 6·q⁵·λ.
    pub coverage_holds: bool,
    /// rig_expectation ≥ 6·q⁴·λ.
    pub rigging_holds: bool,
    /// 3·q⁴·λ + luck_threshold ≥ threshold.
    pub combination_holds: bool,
}

impl GridBound {
    pub fn all_hold(&self) -> bool {
        self.coverage_holds && self.rigging_holds && self.combination_holds
    }
}

#[derive(Debug, Clone, Default)]
pub struct BoundReport {
    pub points: Vec<GridBound>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.points.iter().all(GridBound::all_hold)
    }
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

fn rat(v: u64) -> BigRational {
    BigRational::from_integer(big(v))
}

/// Evaluates the block-coverage, rigging-expectation, and luck-threshold
/// inequalities with exact integer/rational arithmetic at each grid point.
/// Floating point is deliberately not used anywhere in this path.
pub fn check_claim_bounds(grid: &[(u64, u64)]) -> Result<BoundReport> {
    let mut points = Vec::with_capacity(grid.len());
    for &(q, lambda) in grid {
        let p = derive_params(q, lambda)?;
        if p.block_len <= 3 {
            return Err(Error::InvalidParams(format!(
                "block_len {} <= 3 makes the coverage bound vacuous",
                p.block_len
            )));
        }
        let mu_lower = (rat(p.prot_len) / rat(2) - rat(3) * rat(p.blocks))
            / (rat(p.block_len) - rat(3));
        let six_q5_lambda = big(6) * big(q).pow(5) * big(lambda);
        let rig_expectation = mu_lower.clone() / rat(q);
        let six_q4_lambda = big(6) * big(q).pow(4) * big(lambda);
        let luck_threshold = big(60) * big(q).pow(7) * big(lambda) - big(2) * big(q).pow(4) * big(lambda);
        let coverage_holds = mu_lower >= BigRational::from_integer(six_q5_lambda.clone());
        let rigging_holds = rig_expectation >= BigRational::from_integer(six_q4_lambda.clone());
        let combination_holds = big(3) * big(q).pow(4) * big(lambda) + luck_threshold.clone()
            >= big(p.threshold);
        debug_assert!(mu_lower.is_positive());
        points.push(GridBound {
            q,
            lambda,
            mu_lower,
            six_q5_lambda,
            rig_expectation,
            six_q4_lambda,
            luck_threshold,
            coverage_holds,
            rigging_holds,
            combination_holds,
        });
    }
    Ok(BoundReport { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    #[test]
    fn paper_formulas_q1_lambda1() {
        let p = derive_params(1, 1).unwrap();
        assert_eq!(p.slots, 120);
        assert_eq!(p.blocks, 24);
        assert_eq!(p.prot_len, 364);
        assert_eq!(p.block_len, 15);
        assert_eq!(p.threshold, 61);
    }

    #[test]
    fn paper_formulas_q2_lambda4() {
        let p = derive_params(2, 4).unwrap();
        assert_eq!(p.slots, 61440);
        assert_eq!(p.blocks, 6144);
        assert_eq!(p.prot_len, 184324);
        assert_eq!(p.block_len, 60);
        assert_eq!(p.threshold, 30784);
    }

    #[test]
    fn zero_q_rejected() {
        assert!(derive_params(0, 1).is_err());
    }

    #[test]
    fn overflow_is_an_explicit_error() {
        assert!(matches!(
            derive_params(1 << 13, 1 << 20),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn desk_profile_example() {
        let p = desk_profile(64, 16, 6, 2).unwrap();
        assert_eq!(p.threshold, 38);
        assert_eq!(p.prot_len, 196);
        assert_eq!(p.block_len, 24);
    }

    #[test]
    fn desk_profile_rejects_odd_slots() {
        assert!(desk_profile(63, 16, 6, 2).is_err());
    }

    #[test]
    fn desk_profile_rejects_small_blocks() {
        // floor(196*1/200) = 0 < 4.
        assert!(desk_profile(64, 200, 6, 1).is_err());
    }

    #[test]
    fn desk_threshold_strictly_between_half_and_full() {
        for (slots, blocks, gap, q) in [(64u64, 16u64, 6u64, 2u64), (200, 25, 20, 1), (1000, 50, 1, 3)] {
            let p = desk_profile(slots, blocks, gap, q).unwrap();
            assert!(p.threshold > p.slots / 2);
            assert!(p.threshold < p.slots);
        }
    }

    #[test]
    fn bound_chain_q2_lambda4() {
        let r = check_claim_bounds(&[(2, 4)]).unwrap();
        let g = &r.points[0];
        // (184324/2 − 3·6144) / (60 − 3) = 73730/57 ≈ 1293.5.
        assert_eq!(g.mu_lower, BigRational::new(BigInt::from(73730), BigInt::from(57)));
        assert_eq!(g.six_q5_lambda, BigInt::from(768));
        assert!(g.all_hold());
        let approx = g.mu_lower.to_f64().unwrap();
        assert!((approx - 1293.5).abs() < 0.05);
    }

    #[test]
    fn bound_chain_q1_lambda1() {
        let r = check_claim_bounds(&[(1, 1)]).unwrap();
        let g = &r.points[0];
        // (182 − 72) / 12 = 110/12.
        assert_eq!(g.mu_lower, BigRational::new(BigInt::from(110), BigInt::from(12)));
        assert_eq!(g.six_q5_lambda, BigInt::from(6));
        assert!(g.all_hold());
    }

    #[test]
    fn bound_chain_q3_lambda2_all_flags() {
        let r = check_claim_bounds(&[(3, 2)]).unwrap();
        assert!(r.points[0].coverage_holds);
        assert!(r.points[0].rigging_holds);
        assert!(r.points[0].combination_holds);
    }

    #[test]
    fn coverage_holds_across_full_grid() {
        let grid: Vec<(u64, u64)> = (1..=8u64)
            .flat_map(|q| (1..=16u64).map(move |l| (q, l)))
            .collect();
        let r = check_claim_bounds(&grid).unwrap();
        assert_eq!(r.points.len(), 128);
        assert!(r.all_hold());
    }

    #[test]
    fn kv_record_uses_decimal_strings() {
        let p = derive_params(8, 16).unwrap();
        let kv = p.to_kv();
        assert!(kv.contains(&("slots".into(), "4026531840".into())));
        assert!(kv.contains(&("profile".into(), "paper".into())));
    }

    #[test]
    fn threshold_adjustment_is_exact_subtraction() {
        let p = desk_profile(64, 16, 6, 2).unwrap();
        let adj = p.with_threshold_adjustment(5).unwrap();
        assert_eq!(adj.threshold, p.threshold - 5);
        assert!(p.with_threshold_adjustment(p.threshold).is_err());
    }
}
