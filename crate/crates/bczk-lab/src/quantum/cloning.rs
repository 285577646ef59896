//! The adaptive attack that solves NP search given free state duplication.
//!
//! Prepare Σ_y |y⟩|C(x,y)⟩/√2ⁿ with the predicate value in a flag qubit
//! (highest index). Each outer iteration makes up to `inner_attempts`
//! tries of the weak measurement pair M0 = |0⟩⟨0|/√2 + |1⟩⟨1|,
//! M1 = |0⟩⟨0|/√2 on fresh copies of the state — the cloning oracle is
//! literal duplication, which a classical statevector gets for free, so the
//! tries are sampled as independent branches. Outcome 0 keeps the damped
//! state and moves on; `inner_attempts` consecutive outcome-1 results abort.
//! After n surviving iterations the register is measured and the result is
//! tested against the predicate.
//!
//! With witness density ε = (#witnesses)/2ⁿ, the conditioned non-witness
//! mass follows
//!   Πα_j = (1 + (2^i − 1)ε)/2^i,   δ_i = (1 − ε)/(1 + (2^i − 1)ε),
//! and each iteration aborts with probability (δ_{i−1}/2)^attempts — which
//! is at most 2^(−attempts), the looser constant sometimes quoted.

use num::complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::circuit::Circuit;
use crate::quantum::measure::MeasurementOp;
use crate::quantum::state::StateVector;
use crate::util::bits::BitString;
use crate::util::rng::LabRng;

/// Cap on brute-forceable witness registers.
pub const MAX_WITNESS_BITS: usize = 12;

/// A reversible classical verification circuit with a designated witness
/// register and flag wire. Instance bits are baked into the circuit.
#[derive(Debug, Clone)]
pub struct ClassicalPredicate {
    circuit: Circuit,
    n_witness: usize,
    flag: usize,
}

impl ClassicalPredicate {
    /// Wires [0, n_witness) carry the witness; `flag` is the output wire;
    /// any other wires are work ancillas starting at 0.
    pub fn new(circuit: Circuit, n_witness: usize, flag: usize) -> Result<Self> {
        if !circuit.is_classical() {
            return Err(Error::Protocol(
                "verification circuit must be reversible-classical".into(),
            ));
        }
        if n_witness > MAX_WITNESS_BITS {
            return Err(Error::TooLarge(format!(
                "{n_witness} witness bits exceeds {MAX_WITNESS_BITS}"
            )));
        }
        if flag >= circuit.n_qubits || flag < n_witness {
            return Err(Error::Domain(format!(
                "flag wire {flag} must be outside the witness register"
            )));
        }
        Ok(ClassicalPredicate {
            circuit,
            n_witness,
            flag,
        })
    }

    /// The predicate that accepts exactly the given assignment: X-conjugate
    /// the zero bits, then one multi-controlled X onto the flag.
    pub fn equality(target: &BitString) -> Result<Self> {
        let n = target.len();
        let mut c = Circuit::new(n + 1);
        for i in 0..n {
            if !target.get(i) {
                c.push(crate::quantum::circuit::Gate::X(i));
            }
        }
        c.push(crate::quantum::circuit::Gate::Mcx((0..n).collect(), n));
        for i in 0..n {
            if !target.get(i) {
                c.push(crate::quantum::circuit::Gate::X(i));
            }
        }
        ClassicalPredicate::new(c, n, n)
    }

    /// A predicate accepting everything (flag is simply set).
    pub fn tautology(n_witness: usize) -> Result<Self> {
        let mut c = Circuit::new(n_witness + 1);
        c.push(crate::quantum::circuit::Gate::X(n_witness));
        ClassicalPredicate::new(c, n_witness, n_witness)
    }

    /// A predicate accepting nothing.
    pub fn contradiction(n_witness: usize) -> Result<Self> {
        let mut c = Circuit::new(n_witness + 1);
        // Flag wire untouched; identity on it needs at least one gate for a
        // non-empty circuit, so flip a work bit back and forth.
        c.push(crate::quantum::circuit::Gate::X(0));
        c.push(crate::quantum::circuit::Gate::X(0));
        ClassicalPredicate::new(c, n_witness, n_witness)
    }

    pub fn n_witness(&self) -> usize {
        self.n_witness
    }

    pub fn eval(&self, y: u64) -> bool {
        let mut bits = vec![false; self.circuit.n_qubits];
        for (i, bit) in bits.iter_mut().enumerate().take(self.n_witness) {
            *bit = (y >> i) & 1 == 1;
        }
        self.circuit
            .eval_classical(&mut bits)
            .expect("validated classical circuit");
        bits[self.flag]
    }

    pub fn witness_count(&self) -> u64 {
        (0..1u64 << self.n_witness)
            .filter(|&y| self.eval(y))
            .count() as u64
    }
}

/// Closed-form conditioned quantities after `i` non-aborted iterations:
/// returns (δ_i, Πα_j).
pub fn closed_form_delta(eps: f64, i: u32) -> (f64, f64) {
    assert!((0.0..=1.0).contains(&eps));
    let two_i = 2f64.powi(i as i32);
    let prod_alpha = (1.0 + (two_i - 1.0) * eps) / two_i;
    let delta = (1.0 - eps) / (1.0 + (two_i - 1.0) * eps);
    (delta, prod_alpha)
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// ‖M0 ψ‖² at the successful try of this iteration.
    pub alpha: f64,
    /// Non-witness mass of the post-iteration state.
    pub delta: f64,
    /// (δ_{i−1}/2)^attempts: the probability this iteration would abort.
    pub abort_prob: f64,
    /// Tries consumed (last one had outcome 0 unless the run aborted here).
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttackOutcome {
    Witness(BitString),
    /// Final measurement missed the witness set (or none exists).
    NotFound,
    Aborted { iteration: usize },
}

#[derive(Debug, Clone)]
pub struct AttackTrace {
    pub epsilon: f64,
    pub iterations: Vec<IterationRecord>,
    pub outcome: AttackOutcome,
}

impl AttackTrace {
    pub fn found_witness(&self) -> bool {
        matches!(self.outcome, AttackOutcome::Witness(_))
    }
}

/// Runs the adaptive attack with `inner_attempts` copies per iteration
/// (the figure uses |x| of them).
pub fn cloning_attack(
    predicate: &ClassicalPredicate,
    inner_attempts: u32,
    rng: &mut LabRng,
) -> Result<AttackTrace> {
    if inner_attempts == 0 {
        return Err(Error::InvalidParams("inner_attempts must be >= 1".into()));
    }
    let n = predicate.n_witness();
    let flag = n; // highest-index qubit of the attack register
    let count = predicate.witness_count();
    let epsilon = count as f64 / (1u64 << n) as f64;

    // Σ_y |y⟩|C(y)⟩ / √2ⁿ on n+1 qubits.
    let dim = 1usize << (n + 1);
    let scale = 1.0 / ((1u64 << n) as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for y in 0..1u64 << n {
        let idx = y as usize | (usize::from(predicate.eval(y)) << n);
        amps[idx] = Complex64::new(scale, 0.0);
    }
    let mut state = StateVector::from_amplitudes(amps)?;
    let op = MeasurementOp::attack_pair(flag);

    let mut iterations = Vec::with_capacity(n);
    for i in 1..=n {
        let beta = state.prob_qubit(flag, false) / 2.0; // ‖M1ψ‖² = δ/2
        let abort_prob = beta.powi(inner_attempts as i32);
        let mut succeeded = false;
        let mut attempts = 0u32;
        let mut alpha = 0.0;
        for _ in 0..inner_attempts {
            attempts += 1;
            // Fresh copy per try: duplication is free on a statevector.
            let (p0, post0) = op.apply_operator(&state, false);
            let draw: f64 = rng.gen();
            if draw < p0 {
                alpha = p0;
                state = post0;
                succeeded = true;
                break;
            }
        }
        if !succeeded {
            iterations.push(IterationRecord {
                alpha: 0.0,
                delta: state.prob_qubit(flag, false),
                abort_prob,
                attempts,
            });
            return Ok(AttackTrace {
                epsilon,
                iterations,
                outcome: AttackOutcome::Aborted { iteration: i },
            });
        }
        iterations.push(IterationRecord {
            alpha,
            delta: state.prob_qubit(flag, false),
            abort_prob,
            attempts,
        });
    }

    let idx = state.sample_basis(rng);
    let y = (idx & ((1 << n) - 1)) as u64;
    let outcome = if predicate.eval(y) {
        AttackOutcome::Witness(BitString::from_u64(y, n))
    } else {
        AttackOutcome::NotFound
    };
    Ok(AttackTrace {
        epsilon,
        iterations,
        outcome,
    })
}
