//! Property-based invariants.

use proptest::prelude::*;

use bczk_lab::commitment::{self, Opening, ReceiverString};
use bczk_lab::engine::block_view;
use bczk_lab::ot;
use bczk_lab::params;
use bczk_lab::proof_backends::{relation_rwi, BaseRelation, RwiInstance, RwiWitness, SlotStatement};
use bczk_lab::quantum::cloning::closed_form_delta;
use bczk_lab::util::bits::BitString;
use bczk_lab::util::rng;

proptest! {
    #[test]
    fn bitstring_hex_roundtrips(len in 0usize..200, seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let s = BitString::random(&mut r, len);
        let back = BitString::from_hex(&s.to_hex(), len).unwrap();
        prop_assert_eq!(s, back);
    }

    #[test]
    fn commitment_roundtrip_always_verifies(bit: bool, seed in any::<u64>(), n in 1usize..24) {
        let mut r = rng::seeded(seed);
        let rstring = ReceiverString::sample(&mut r, n);
        let seed_bits = BitString::random(&mut r, n);
        let c = commitment::commit(&rstring, bit, &seed_bits).unwrap();
        let opening = Opening { bit, seed: seed_bits };
        let ok = commitment::verify_open(&rstring, &c, &opening).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn derive_params_is_pure(q in 1u64..6, lambda in 1u64..32) {
        let a = params::derive_params(q, lambda).unwrap();
        let b = params::derive_params(q, lambda).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn block_partition_covers_exactly(total in 0usize..2000, slots in 2u64..40, blocks in 1u64..30, q in 1u64..4) {
        prop_assume!(slots % 2 == 0);
        prop_assume!(blocks >= q);
        let Ok(p) = params::desk_profile(slots, blocks, 1.max(slots / 4), q) else {
            return Ok(());
        };
        let view = block_view(total, &p);
        prop_assert_eq!(view.len(), p.blocks as usize);
        let mut pos = 0usize;
        for b in &view {
            prop_assert_eq!(b.start, pos);
            prop_assert!(b.end >= b.start);
            pos = b.end;
        }
        prop_assert_eq!(pos, total);
    }

    #[test]
    fn rwi_is_monotone_in_openings(seed in any::<u64>(), threshold in 1u64..6, drop_mask in any::<u8>()) {
        let mut r = rng::seeded(seed);
        let n = 8;
        let mut slots = Vec::new();
        let mut full: Vec<Option<Opening>> = Vec::new();
        for _ in 0..8 {
            let rstring = ReceiverString::sample(&mut r, n);
            let s = BitString::random(&mut r, n);
            let bit = rand::Rng::gen::<bool>(&mut r);
            let c = commitment::commit(&rstring, bit, &s).unwrap();
            slots.push(SlotStatement { rstring, commitment: c, verifier_bit: bit });
            full.push(Some(Opening { bit, seed: s }));
        }
        let inst = RwiInstance { base: BaseRelation::Never, x: vec![], threshold, slots };
        let mut partial = full.clone();
        for i in 0..8 {
            if drop_mask >> i & 1 == 1 {
                partial[i] = None;
            }
        }
        let before = relation_rwi(&inst, &RwiWitness { base_witness: None, openings: partial.clone() }).unwrap();
        // Add back one dropped opening, if any.
        if let Some(i) = (0..8).find(|&i| partial[i].is_none()) {
            partial[i] = full[i].clone();
            let after = relation_rwi(&inst, &RwiWitness { base_witness: None, openings: partial }).unwrap();
            prop_assert!(!before || after);
        }
    }

    #[test]
    fn srot_final_pair_identity(m0: bool, m1: bool, beta: bool, seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let (out, run) = ot::srot_run(m0, m1, beta, 3, &mut r).unwrap();
        prop_assert_eq!(run.final_pair.0 ^ run.final_pair.1, run.r ^ m0 ^ m1);
        prop_assert_eq!(out, if beta { m1 } else { m0 });
    }

    #[test]
    fn closed_form_product_recurrence(i in 0u32..12, k in 0u64..64) {
        // δ_i · Πα · 2^i = δ₀ algebraically.
        let eps = k as f64 / 64.0;
        let (delta, prod) = closed_form_delta(eps, i);
        let lhs = delta * prod * 2f64.powi(i as i32);
        prop_assert!((lhs - (1.0 - eps)).abs() < 1e-10);
    }
}
