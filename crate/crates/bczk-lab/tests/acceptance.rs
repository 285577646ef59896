//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with the measured value against its pinned tolerance.
//!
//! Criterion 4 runs at desk profiles tuned by a pre-build oracle run
//! (500-trial Monte Carlo over candidate (slots, blocks, gap) triples,
//! reproducible via the `bczk-sim` experiment): Q=1 uses (64, 32, 2) and
//! Q=2 uses (128, 64, 2).

use num::bigint::BigInt;
use num::rational::BigRational;

use bczk_lab::bczk::AdversaryKind;
use bczk_lab::coinflip::{self, P1Strategy, P2Strategy};
use bczk_lab::exp::{self, ExperimentConfig};
use bczk_lab::ot::{self, ReceiverStrategy};
use bczk_lab::params::{check_claim_bounds, derive_params, desk_profile};
use bczk_lab::pok::{self, PokShape, ProverBehavior};
use bczk_lab::proof_backends::BaseRelation;
use bczk_lab::quantum::amplifier::{amplifier_suite, RewindAmplifier};
use bczk_lab::quantum::cloning::{self, ClassicalPredicate};
use bczk_lab::quantum::measure::MeasurementOp;
use bczk_lab::quantum::StateVector;
use bczk_lab::simulator;
use bczk_lab::soundness;
use bczk_lab::util::bits::BitString;
use bczk_lab::util::{rng, stats};

const SEED: u64 = 20260810;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_parameter_bounds() {
    let grid: Vec<(u64, u64)> = (1..=8u64)
        .flat_map(|q| (1..=16u64).map(move |l| (q, l)))
        .collect();
    let rep = check_claim_bounds(&grid).unwrap();
    let mut identities = true;
    for &(q, lambda) in &grid {
        let p = derive_params(q, lambda).unwrap();
        identities &= p.slots == 120 * q.pow(7) * lambda;
        identities &= p.blocks == 24 * q.pow(6) * lambda;
        identities &= p.prot_len == 3 * p.slots + 4;
        identities &= p.block_len == p.prot_len * q / p.blocks;
        identities &= p.threshold == 60 * q.pow(7) * lambda + q.pow(4) * lambda;
    }
    let pass = rep.all_hold() && identities && rep.points.len() == 128;
    report(
        "1|parameter-bounds",
        pass,
        &format!(
            "128 grid points, coverage/rigging/combination inequalities all hold = {}, identities hold = {identities}",
            rep.all_hold()
        ),
    );
}

#[test]
fn criterion_02_soundness_tail() {
    // Exact tails over (1, 1..=64) and (2, 1..=4).
    let mut grid: Vec<(u64, u64)> = (1..=64).map(|l| (1u64, l)).collect();
    grid.extend((1..=4).map(|l| (2u64, l)));
    let start = std::time::Instant::now();
    let results = soundness::verify_soundness_inequality(&grid).unwrap();
    let all = results.iter().all(|r| r.satisfied && !r.approximate);
    let elapsed = start.elapsed();

    // Cheating-prover Monte Carlo at Desk(slots=200, gap=20).
    let p = desk_profile(200, 25, 20, 1).unwrap();
    let trials = 10_000u64;
    let rate =
        soundness::cheating_prover_mc(&p, soundness::CheatingStrategy::UniformGuess, trials, 8, SEED)
            .unwrap();
    let tail = soundness::binom_tail_half_exact(200, 120).unwrap().exp();
    let ci = stats::binomial_se(tail.max(rate), trials);
    let mc_pass = rate <= tail + 3.0 * ci;

    let pass = all && mc_pass && elapsed.as_secs() < 30;
    report(
        "2|soundness-tail",
        pass,
        &format!(
            "{} exact grid points satisfied in {:.2?}; cheating MC rate {rate:.5} <= exact tail {tail:.5} + 3ci {:.5}",
            results.len(),
            elapsed,
            3.0 * ci
        ),
    );
}

#[test]
fn criterion_03_obliviousness() {
    let start = std::time::Instant::now();
    let p = desk_profile(16, 8, 2, 2).unwrap();
    let suite = bczk_lab::bczk::adversary_library();
    // 8 blocks per run; 1250 trials gives 10^4 blocks per strategy.
    let profile = simulator::rewind_probability_profile(
        &suite,
        &p,
        1250,
        8,
        BaseRelation::Never,
        &[0u8; 32],
        SEED,
        200,
    )
    .unwrap();
    let mut all_near_half = true;
    let mut detail = String::new();
    for (kind, rate, decisions) in &profile.per_strategy {
        all_near_half &= (rate - 0.5).abs() <= 0.02;
        detail.push_str(&format!("{kind:?}={rate:.4}({decisions}) "));
    }
    let pass = all_near_half
        && profile.max_pairwise_deviation <= 0.03
        && start.elapsed().as_secs() < 120;
    report(
        "3|obliviousness",
        pass,
        &format!(
            "{detail}max pairwise dev {:.4}, elapsed {:.2?}",
            profile.max_pairwise_deviation,
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_04_simulator_success() {
    // Profiles fixed by the pre-build oracle run (see module docs).
    let cases = [
        (desk_profile(64, 32, 2, 1).unwrap(), "q1"),
        (desk_profile(128, 64, 2, 2).unwrap(), "q2"),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (p, label) in cases {
        let mut ok = 0u32;
        let mut forced = 0u64;
        for t in 0..500u64 {
            let (_, stats, _) = simulator::simulate(
                &p,
                AdversaryKind::HonestLike,
                8,
                BaseRelation::Never,
                &[0u8; 32],
                SEED ^ t,
                40,
            )
            .unwrap();
            ok += u32::from(stats.all_stage2_succeeded());
            forced += stats.forced_continues;
        }
        let rate = f64::from(ok) / 500.0;
        pass &= rate >= 0.95 && forced == 0;
        detail.push_str(&format!("{label}: stage2 {rate:.3}, forced {forced}; "));
    }
    report("4|simulator-success", pass, &detail);
}

#[test]
fn criterion_05_no_recording() {
    let p = desk_profile(16, 8, 2, 2).unwrap();
    let mut all = true;
    for t in 0..100u64 {
        let (ts, _, outcomes) = simulator::simulate(
            &p,
            AdversaryKind::HonestLike,
            8,
            BaseRelation::Never,
            &[0u8; 32],
            SEED ^ (t << 8),
            40,
        )
        .unwrap();
        let seg_total: usize = outcomes.iter().map(|o| o.segment.1 - o.segment.0).sum();
        all &= ts.len() == seg_total;
    }
    report(
        "5|no-recording",
        all,
        "transcript length equals single-pass segment total in 100/100 simulator runs",
    );
}

#[test]
fn criterion_06_pok_extractability() {
    let shape = PokShape { ell_w: 4, lambda: 8 };
    let trials = 10_000u64;
    let mut pass = true;
    let mut detail = String::new();
    let mut honest_attempts: Vec<u32> = Vec::new();
    for (label, behavior) in [
        ("honest", ProverBehavior::Honest),
        ("aborter(0.3)", ProverBehavior::Aborter(0.3)),
        ("share-corruptor(1)", ProverBehavior::ShareCorruptor(1)),
    ] {
        let mut accepts = 0u64;
        let mut extracts = 0u64;
        let mut exact = true;
        for t in 0..trials {
            let (x, w) = pok::demo_pok_statement(shape.ell_w, SEED ^ (t << 24));
            let prover = pok::PokProver::new(
                behavior,
                BaseRelation::Sha256Preimage,
                x,
                w.clone(),
                shape.lambda,
                SEED ^ t,
            );
            let rec = pok::extract(&prover, 40, SEED.wrapping_add(t)).unwrap();
            accepts += u64::from(rec.acceptance);
            extracts += u64::from(rec.succeeded());
            if rec.succeeded() {
                exact &= rec.witness.as_ref() == Some(&w);
            }
            if behavior == ProverBehavior::Honest {
                honest_attempts.extend(rec.cells.iter().map(|c| c.attempts));
            }
        }
        let gap = (accepts as f64 - extracts as f64).abs() / trials as f64;
        pass &= gap <= 0.02 && exact;
        detail.push_str(&format!(
            "{label}: accept {:.4} extract {:.4} gap {gap:.4} exact {exact}; ",
            accepts as f64 / trials as f64,
            extracts as f64 / trials as f64
        ));
    }
    // Per-cell attempts fit Geometric(1/2) by chi-square at 0.01.
    let observed = stats::bin_attempts(&honest_attempts, 10);
    let expected = stats::geometric_half_expected(honest_attempts.len() as u64, 10);
    let stat = stats::chi_square_stat(&observed, &expected);
    let crit = stats::chi_square_critical(10, 0.01);
    pass &= stat < crit;
    detail.push_str(&format!("attempts chi2 {stat:.2} < {crit:.2}"));
    report("6|pok-extractability", pass, &detail);
}

#[test]
fn criterion_07_ot_privacy() {
    // Exhaustive correctness at λ ∈ {2, 4, 8}.
    let mut correct = true;
    for lambda in [2usize, 4, 8] {
        let mut r = rng::derive(SEED, "acc-ot-correct", lambda as u64);
        for beta in [false, true] {
            for m0 in [false, true] {
                for m1 in [false, true] {
                    let (out, _) = ot::srot_run(m0, m1, beta, lambda, &mut r).unwrap();
                    correct &= out == if beta { m1 } else { m0 };
                }
            }
        }
    }

    // Exact TV at λ=2 equals the exhaustive-enumeration oracle (and the
    // hand-derived closed form 11/32).
    let exact = ot::receiver_privacy_tv_exact(2).unwrap();
    let oracle = enumeration_oracle_tv_lambda2();
    let closed = BigRational::new(BigInt::from(11), BigInt::from(32));
    let exact_ok = exact == oracle && exact == closed;

    // Sampled TV at λ=8 over 10^5 trials.
    let mut r = rng::derive(SEED, "acc-ot-tv8", 0);
    let tv8 = ot::receiver_privacy_tv(8, 100_000, &mut r).unwrap();
    let tv_ok = tv8 <= 0.06;

    // Honest-receiver sender-privacy advantage at 10^4 trials.
    let mut r = rng::derive(SEED, "acc-ot-game", 0);
    let rep = ot::sender_privacy_game(
        ReceiverStrategy::Honest(false),
        false,
        true,
        8,
        10_000,
        &mut r,
    )
    .unwrap();
    let adv_ok = rep.advantage <= 0.03;

    let pass = correct && exact_ok && tv_ok && adv_ok;
    report(
        "7|ot-privacy",
        pass,
        &format!(
            "correctness {correct}; exact TV(2) = {exact} == oracle {oracle}; sampled TV(8) = {tv8:.4} <= 0.06; advantage {:.4} <= 0.03",
            rep.advantage
        ),
    );
}

/// Independent enumeration oracle for the exact λ=2 receiver-privacy TV: a
/// raw walk over every hidden bit of the two informative rows and the main
/// execution (2^16 assignments per receiver bit), with the remaining rows
/// folded in through separately enumerated marginal tables. Dyadic counts
/// only; no floating point.
fn enumeration_oracle_tv_lambda2() -> BigRational {
    let lambda = 2usize;
    // Row view symbol: (probe bits, location bits, recovered values) packed
    // into 6 bits.
    let enumerate_row = |w: bool| -> Vec<u64> {
        let mut table = vec![0u64; 64];
        for hidden in 0..128u32 {
            // 1 free share bit, 2 masks, 2 locations, 2 probes.
            let free = hidden & 1 == 1;
            let s0 = free;
            let s1 = free ^ w;
            let m = [(hidden >> 1) & 1 == 1, (hidden >> 2) & 1 == 1];
            let b = [(hidden >> 3) & 1 == 1, (hidden >> 4) & 1 == 1];
            let c = [(hidden >> 5) & 1 == 1, (hidden >> 6) & 1 == 1];
            let sh = [s0, s1];
            let mut sym = 0u64;
            for j in 0..lambda {
                let v = if c[j] == b[j] { sh[j] } else { m[j] };
                sym |= (c[j] as u64) << j;
                sym |= (b[j] as u64) << (lambda + j);
                sym |= (v as u64) << (2 * lambda + j);
            }
            table[sym as usize] += 1;
        }
        table
    };
    let row_given = [enumerate_row(false), enumerate_row(true)];
    // Marginal over a uniform hidden w (the r*-rows): counts out of 256.
    let row_marginal: Vec<u64> = (0..64).map(|v| row_given[0][v] + row_given[1][v]).collect();

    // Joint over (V1, V2, r, r_tilde) with r' hidden; rows 3.. contribute
    // the factor Σ_V marginal(V) = 256 each, which cancels in the TV after
    // normalization, checked explicitly here.
    let marg_total: u64 = row_marginal.iter().sum();
    assert_eq!(marg_total, 256);

    let mut abs_diff = BigInt::from(0);
    for v1 in 0..64usize {
        for v2 in 0..64usize {
            for r in [false, true] {
                for r_tilde in [false, true] {
                    let mut p = [BigInt::from(0), BigInt::from(0)];
                    for (bi, beta) in [false, true].into_iter().enumerate() {
                        let mut acc = 0u64;
                        for r_prime in [false, true] {
                            if r_tilde != (r_prime ^ (r & beta)) {
                                continue;
                            }
                            acc += row_given[r_prime as usize][v1] * row_given[beta as usize][v2];
                        }
                        p[bi] = BigInt::from(acc);
                    }
                    let d = if p[0] >= p[1] {
                        p[0].clone() - p[1].clone()
                    } else {
                        p[1].clone() - p[0].clone()
                    };
                    abs_diff += d;
                }
            }
        }
    }
    // Denominator: 128 hidden per row × 2 rows, 2 for r', 2 for r, and the
    // leading 1/2 of the TV.
    BigRational::new(abs_diff, BigInt::from(2u64.pow(7) * 2u64.pow(7) * 2 * 2 * 2))
}

#[test]
fn criterion_08_coinflip() {
    let runs = 100_000u64;
    let mut r = rng::derive(SEED, "acc-coinflip", 0);
    let mut ones = 0u64;
    for _ in 0..runs {
        let (s, _) = coinflip::coinflip_run(P1Strategy::Honest, P2Strategy::Honest, 8, &mut r)
            .unwrap();
        ones += u64::from(s);
    }
    let freq = ones as f64 / runs as f64;
    let uniform_ok = (0.497..=0.503).contains(&freq);

    let mut force_ok = true;
    for target in [false, true] {
        for p2 in [
            P2Strategy::Honest,
            P2Strategy::FixedB(false),
            P2Strategy::FixedB(true),
            P2Strategy::AdaptiveAfterCommit,
        ] {
            for _ in 0..500 {
                let t = coinflip::coinflip_force_output(target, p2, 8, &mut r).unwrap();
                force_ok &= t.output == target;
            }
        }
    }
    report(
        "8|coinflip",
        uniform_ok && force_ok,
        &format!("honest frequency {freq:.5} in [0.497, 0.503]; forcing hit 100% across the suite = {force_ok}"),
    );
}

#[test]
fn criterion_09_watrous_amplifier() {
    let start = std::time::Instant::now();
    let eps = 2f64.powi(-20);
    let p0 = 0.49;
    let mut r = rng::derive(SEED, "acc-watrous", 0);
    let mut min_fid = f64::INFINITY;
    let mut bound = 0.0;
    for (circuit, n, k) in amplifier_suite(20, 10, SEED) {
        let amp = RewindAmplifier::new(circuit, k, p0, eps).unwrap();
        bound = amp.lemma_bound();
        let psi = StateVector::random(&mut r, n).unwrap();
        let profile = amp.profile(&psi).unwrap();
        min_fid = min_fid.min(profile.expected_fidelity);
    }
    let pass = min_fid >= bound && start.elapsed().as_secs() < 60;
    report(
        "9|watrous-amplifier",
        pass,
        &format!(
            "20 circuits: min fidelity {min_fid:.9} >= lemma bound {bound:.9}, elapsed {:.2?}",
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_10_cloning_attack() {
    // (a) Recurrence exactness for n <= 6, every witness count, 1e-9.
    let mut recurrence_ok = true;
    for n in 1..=6usize {
        for count in 0..=(1u64 << n) {
            let eps = count as f64 / (1u64 << n) as f64;
            let scale = 1.0 / ((1u64 << n) as f64).sqrt();
            let dim = 1usize << (n + 1);
            let mut amps = vec![num::complex::Complex64::new(0.0, 0.0); dim];
            for y in 0..1u64 << n {
                let witness = y < count;
                let idx = y as usize | (usize::from(witness) << n);
                amps[idx] = num::complex::Complex64::new(scale, 0.0);
            }
            let mut state = StateVector::from_amplitudes(amps).unwrap();
            let op = MeasurementOp::attack_pair(n);
            for i in 1..=n as u32 {
                let (p0, post) = op.apply_operator(&state, false);
                if p0 == 0.0 {
                    break;
                }
                state = post;
                let delta = state.prob_qubit(n, false);
                let (want, _) = cloning::closed_form_delta(eps, i);
                recurrence_ok &= (delta - want).abs() < 1e-9;
            }
        }
    }

    // (b) Success frequency >= 1/3 over 10^4 runs at n=3, one witness.
    let target = BitString::from_u64(0b011, 3);
    let pred = ClassicalPredicate::equality(&target).unwrap();
    let mut r = rng::derive(SEED, "acc-cloning", 0);
    let mut wins = 0u32;
    let runs = 10_000u32;
    for _ in 0..runs {
        let trace = cloning::cloning_attack(&pred, 8, &mut r).unwrap();
        wins += u32::from(trace.found_witness());
    }
    let rate = f64::from(wins) / f64::from(runs);

    // (c) δ_n <= 2/3 per closed form at one-witness instances.
    let mut final_bound_ok = true;
    for n in 1..=12u32 {
        let eps = 2f64.powi(-(n as i32));
        let (dn, _) = cloning::closed_form_delta(eps, n);
        final_bound_ok &= dn <= 2.0 / 3.0 + 1e-12;
    }

    let pass = recurrence_ok && rate >= 1.0 / 3.0 && final_bound_ok;
    report(
        "10|cloning-attack",
        pass,
        &format!(
            "recurrence exact (n<=6, all counts) = {recurrence_ok}; success rate {rate:.4} >= 1/3; final delta bound = {final_bound_ok}"
        ),
    );
}

#[test]
fn criterion_11_determinism() {
    let toml = r#"
experiment = "bczk-sim"
seed = 20260810
trials = 8

[profile]
kind = "desk"
q = 1
slots = 16
blocks = 8
gap = 2
lambda = 0

[bczk_sim]
adversary = "honest-like"
aborter_p = 0.0
abort_block = 0
retry_cap = 40
seed_bits = 8
"#;
    let config = ExperimentConfig::parse(toml).unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    exp::run_experiment(&config, d1.path(), 1).unwrap();
    exp::run_experiment(&config, d2.path(), 2).unwrap();
    let mut pass = true;
    for f in ["results.jsonl", "summary.csv"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        let b = std::fs::read(d2.path().join(f)).unwrap();
        pass &= a == b;
    }
    report(
        "11|determinism",
        pass,
        "identical config+seed reproduce byte-identical outputs across worker counts",
    );
}
