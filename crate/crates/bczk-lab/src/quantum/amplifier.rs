//! Measure-and-reflect rewinding amplification in the style of Watrous's
//! rewinding lemma.
//!
//! Given a circuit Q on n+k qubits mapping |ψ⟩|0^k⟩ to
//! √p |0⟩|φ₀(ψ)⟩ + √(1−p) |1⟩|φ₁(ψ)⟩ (qubit 0 is the success flag), the
//! amplifier measures the flag and, on failure, recovers by applying Q†,
//! reflecting about |0^k⟩ on the ancilla register, and applying Q again,
//! for up to t = ⌈ln(1/ε) / (p₀(1−p₀))⌉ rounds. When p is within ε of a
//! state-independent value and p₀(1−p₀) lower-bounds its variance product,
//! the output lands on the success branch with fidelity at least
//! 1 − 16·ε·ln²(1/ε)/(p₀²(1−p₀)²).

use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::circuit::{gates, Circuit, Gate};
use crate::quantum::state::StateVector;
use crate::util::rng::LabRng;

#[derive(Debug, Clone)]
pub struct RewindAmplifier {
    circuit: Circuit,
    /// Ancilla count: the last `k` qubits of the circuit's register.
    k_ancilla: usize,
    p0: f64,
    eps: f64,
    rounds: u32,
}

/// Deterministic branch analysis of one amplification run.
#[derive(Debug, Clone)]
pub struct AmplifierProfile {
    /// Σ over rounds of P(succeed at round r)·|⟨φ₀|out_r⟩|², plus the
    /// all-fail residue (whose success-branch fidelity is zero).
    pub expected_fidelity: f64,
    /// Success probability at each round, conditioned on reaching it.
    pub per_round_success: Vec<f64>,
    /// Probability that every round failed.
    pub fail_prob: f64,
}

impl RewindAmplifier {
    pub fn new(circuit: Circuit, k_ancilla: usize, p0: f64, eps: f64) -> Result<Self> {
        if !(0.0 < p0 && p0 < 1.0) {
            return Err(Error::Domain(format!("p0 = {p0} outside (0, 1)")));
        }
        if !(0.0 < eps && eps < 0.5) {
            return Err(Error::Domain(format!("eps = {eps} outside (0, 1/2)")));
        }
        if k_ancilla > circuit.n_qubits {
            return Err(Error::Domain(format!(
                "{k_ancilla} ancillas exceed the {}-qubit register",
                circuit.n_qubits
            )));
        }
        let rounds = ((1.0 / eps).ln() / (p0 * (1.0 - p0))).ceil() as u32;
        Ok(RewindAmplifier {
            circuit,
            k_ancilla,
            p0,
            eps,
            rounds,
        })
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// The lemma's fidelity floor: 1 − 16·ε·ln²(1/ε)/(p₀²(1−p₀)²).
    pub fn lemma_bound(&self) -> f64 {
        let l = (1.0 / self.eps).ln();
        1.0 - 16.0 * self.eps * l * l / (self.p0 * self.p0 * (1.0 - self.p0) * (1.0 - self.p0))
    }

    fn ancilla_qubits(&self) -> Vec<usize> {
        let n = self.circuit.n_qubits - self.k_ancilla;
        (n..self.circuit.n_qubits).collect()
    }

    fn prepare(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.n_qubits() + self.k_ancilla != self.circuit.n_qubits {
            return Err(Error::LengthMismatch(format!(
                "input has {} qubits, circuit wants {}",
                psi.n_qubits(),
                self.circuit.n_qubits - self.k_ancilla
            )));
        }
        psi.tensor_zeros(self.k_ancilla)
    }

    /// The target branch |φ₀(ψ)⟩: Q(|ψ⟩|0^k⟩) projected onto flag = 0.
    pub fn success_branch(&self, psi: &StateVector) -> Result<StateVector> {
        let mut s = self.prepare(psi)?;
        self.circuit.apply(&mut s)?;
        s.collapse_qubit(0, false);
        Ok(s)
    }

    fn recover(&self, state: &mut StateVector) -> Result<()> {
        self.circuit.apply_inverse(state)?;
        state.reflect_about_zero(&self.ancilla_qubits());
        self.circuit.apply(state)?;
        Ok(())
    }

    /// Deterministic expectation over the measurement tree: the failure
    /// branch is a pure state at every round, so the whole tree has one
    /// success leaf per round plus a single all-fail leaf.
    pub fn profile(&self, psi: &StateVector) -> Result<AmplifierProfile> {
        let target = self.success_branch(psi)?;
        let mut state = self.prepare(psi)?;
        self.circuit.apply(&mut state)?;
        let mut weight = 1.0f64;
        let mut fidelity = 0.0f64;
        let mut per_round = Vec::with_capacity(self.rounds as usize);
        for round in 0..self.rounds {
            let p = state.prob_qubit(0, false);
            per_round.push(p);
            if p > 0.0 {
                let mut success = state.clone();
                success.collapse_qubit(0, false);
                fidelity += weight * p * target.fidelity(&success);
            }
            let q = 1.0 - p;
            if q <= 1e-15 {
                weight = 0.0;
                break;
            }
            if round + 1 == self.rounds {
                weight *= q;
                break;
            }
            state.collapse_qubit(0, true);
            weight *= q;
            self.recover(&mut state)?;
        }
        Ok(AmplifierProfile {
            expected_fidelity: fidelity,
            per_round_success: per_round,
            fail_prob: weight,
        })
    }

    /// One sampled run: returns the output state, the rounds consumed, and
    /// whether a success measurement terminated it.
    pub fn run(&self, psi: &StateVector, rng: &mut LabRng) -> Result<(StateVector, u32, bool)> {
        let mut state = self.prepare(psi)?;
        self.circuit.apply(&mut state)?;
        for round in 1..=self.rounds {
            let p = state.prob_qubit(0, false);
            let draw: f64 = rng.gen();
            if draw < p {
                state.collapse_qubit(0, false);
                return Ok((state, round, true));
            }
            state.collapse_qubit(0, true);
            if round < self.rounds {
                self.recover(&mut state)?;
            }
        }
        Ok((state, self.rounds, false))
    }
}

/// Builds a randomized test suite of circuits whose success probability is
/// exactly 1/2 for every input state: the flag qubit is overwritten with a
/// fresh ancilla, scrambling gates act on the rest, a Hadamard splits the
/// flag, and only flag-controlled gates follow. Returns (circuit, n, k)
/// triples.
pub fn amplifier_suite(count: usize, max_qubits: usize, seed: u64) -> Vec<(Circuit, usize, usize)> {
    use crate::util::rng;
    let mut r = rng::derive(seed, "amp-suite", 0);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let total = r.gen_range(2..=max_qubits);
        let k = r.gen_range(1..total);
        let n = total - k;
        let mut c = Circuit::new(total);
        if n > 0 {
            // Park the input's first qubit in an ancilla so the flag wire
            // starts from |0⟩.
            c.push(Gate::Swap(0, n));
        }
        let body = r.gen_range(4..14);
        for _ in 0..body {
            let t = r.gen_range(1..total);
            match r.gen_range(0..5) {
                0 => c.push(Gate::H(t)),
                1 => c.push(Gate::X(t)),
                2 => c.push(Gate::Ry(r.gen_range(0.0..std::f64::consts::PI), t)),
                3 => {
                    let u = r.gen_range(1..total);
                    if u != t {
                        c.push(Gate::Cx(u, t));
                    }
                }
                _ => {
                    let u = r.gen_range(1..total);
                    if u != t {
                        c.push(Gate::Cz(u, t));
                    }
                }
            }
        }
        c.push(Gate::H(0));
        let tail = r.gen_range(1..4);
        for _ in 0..tail {
            let t = r.gen_range(1..total);
            if r.gen::<bool>() {
                c.push(Gate::Cx(0, t));
            } else {
                c.push(Gate::Cz(0, t));
            }
        }
        out.push((c, n, k));
    }
    out
}

#[allow(dead_code)]
fn _gate_anchor() -> [[num::complex::Complex64; 2]; 2] {
    gates::h()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::circuit::single_qubit_rotation;
    use crate::util::rng;

    #[test]
    fn half_probability_rotation_amplifies_to_near_one() {
        // Ry(π/2) sends |0⟩ to an even split; p(ψ) = 1/2 exactly.
        let c = single_qubit_rotation(std::f64::consts::FRAC_PI_2);
        let amp = RewindAmplifier::new(c, 1, 0.49, 2f64.powi(-20)).unwrap();
        let psi = StateVector::zero_state(0).unwrap();
        let profile = amp.profile(&psi).unwrap();
        assert!(
            profile.expected_fidelity >= 1.0 - 1e-3,
            "fidelity {}",
            profile.expected_fidelity
        );
        assert!(profile.expected_fidelity >= amp.lemma_bound());
        assert!((profile.per_round_success[0] - 0.5).abs() < 1e-12);
        // With p exactly 1/2 the second round succeeds with certainty.
        assert!((profile.per_round_success[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn certain_success_passes_through_identically() {
        // p(ψ) = 1: flag stays |0⟩; R acts as the identity on the branch.
        let mut c = Circuit::new(2);
        c.push(Gate::H(1));
        let amp = RewindAmplifier::new(c, 1, 0.9, 0.01).unwrap();
        let psi = StateVector::zero_state(1).unwrap();
        let profile = amp.profile(&psi).unwrap();
        assert!((profile.expected_fidelity - 1.0).abs() < 1e-12);
        assert!((profile.per_round_success[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rounds_formula() {
        let c = single_qubit_rotation(std::f64::consts::FRAC_PI_2);
        let amp = RewindAmplifier::new(c, 1, 0.49, 2f64.powi(-20)).unwrap();
        assert_eq!(amp.rounds(), 56);
    }

    #[test]
    fn domain_checks() {
        let c = single_qubit_rotation(1.0);
        assert!(RewindAmplifier::new(c.clone(), 1, 0.0, 0.1).is_err());
        assert!(RewindAmplifier::new(c.clone(), 1, 0.5, 0.7).is_err());
        assert!(RewindAmplifier::new(c, 2, 0.5, 0.1).is_err());
    }

    #[test]
    fn suite_meets_lemma_bound() {
        let mut r = rng::seeded(64);
        for (c, n, k) in amplifier_suite(5, 8, 7) {
            let amp = RewindAmplifier::new(c, k, 0.49, 2f64.powi(-20)).unwrap();
            let psi = StateVector::random(&mut r, n).unwrap();
            let profile = amp.profile(&psi).unwrap();
            assert!((profile.per_round_success[0] - 0.5).abs() < 1e-9);
            assert!(
                profile.expected_fidelity >= amp.lemma_bound(),
                "fidelity {} < bound {}",
                profile.expected_fidelity,
                amp.lemma_bound()
            );
        }
    }

    #[test]
    fn per_round_success_is_input_independent() {
        let mut r = rng::seeded(65);
        let (c, n, k) = amplifier_suite(1, 8, 11).remove(0);
        let amp = RewindAmplifier::new(c, k, 0.49, 2f64.powi(-10)).unwrap();
        let a = amp.profile(&StateVector::random(&mut r, n).unwrap()).unwrap();
        let b = amp.profile(&StateVector::random(&mut r, n).unwrap()).unwrap();
        for (x, y) in a.per_round_success.iter().zip(&b.per_round_success) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn sampled_run_reaches_success_branch() {
        let mut r = rng::seeded(66);
        let (c, n, k) = amplifier_suite(1, 6, 13).remove(0);
        let amp = RewindAmplifier::new(c, k, 0.49, 2f64.powi(-12)).unwrap();
        let psi = StateVector::random(&mut r, n).unwrap();
        let target = amp.success_branch(&psi).unwrap();
        let mut total_fid = 0.0;
        let runs = 50;
        for _ in 0..runs {
            let (out, _, success) = amp.run(&psi, &mut r).unwrap();
            assert!(success);
            total_fid += target.fidelity(&out);
        }
        assert!(total_fid / runs as f64 > 0.99);
    }
}
