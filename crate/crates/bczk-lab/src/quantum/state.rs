//! Dense complex statevectors, little-endian qubit order (qubit 0 is the
//! least significant index bit).

use num::complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::util::rng::LabRng;

/// Hard cap on register width; dense simulation beyond this is out of scope.
pub const MAX_QUBITS: usize = 20;

/// Tolerance for norm preservation and operator completeness checks.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits (n = 0 gives the scalar state).
    pub fn zero_state(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooLarge(format!("{n} qubits exceeds {MAX_QUBITS}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::Domain(format!("{len} amplitudes is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::TooLarge(format!("{n} qubits exceeds {MAX_QUBITS}")));
        }
        let s = StateVector { n, amps };
        if (s.norm_sqr() - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!(
                "state norm² = {} is not 1",
                s.norm_sqr()
            )));
        }
        Ok(s)
    }

    /// Haar-ish random state: independent complex Gaussians, normalized.
    pub fn random(rng: &mut LabRng, n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooLarge(format!("{n} qubits exceeds {MAX_QUBITS}")));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for _ in 0..1usize << n {
            // Box–Muller pairs.
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            amps.push(Complex64::new(
                r * (2.0 * std::f64::consts::PI * u2).cos(),
                r * (2.0 * std::f64::consts::PI * u2).sin(),
            ));
        }
        let mut s = StateVector { n, amps };
        s.renormalize();
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        assert!(n > 0.0, "cannot normalize the zero vector");
        for a in &mut self.amps {
            *a /= n;
        }
    }

    pub fn inner_product(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner_product(other).norm_sqr()
    }

    /// self ⊗ |0^k⟩ (the new qubits take the high indices).
    pub fn tensor_zeros(&self, k: usize) -> Result<StateVector> {
        if self.n + k > MAX_QUBITS {
            return Err(Error::TooLarge(format!(
                "{} qubits exceeds {MAX_QUBITS}",
                self.n + k
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (self.n + k)];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        Ok(StateVector {
            n: self.n + k,
            amps,
        })
    }

    pub fn apply_single(&mut self, m: &[[Complex64; 2]; 2], target: usize) {
        assert!(target < self.n);
        let step = 1usize << target;
        let mask = step - 1;
        let half = self.amps.len() / 2;
        for i in 0..half {
            let lo = ((i & !mask) << 1) | (i & mask);
            let hi = lo | step;
            let a0 = self.amps[lo];
            let a1 = self.amps[hi];
            self.amps[lo] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[hi] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    pub fn apply_controlled(&mut self, m: &[[Complex64; 2]; 2], control: usize, target: usize) {
        assert!(control < self.n && target < self.n && control != target);
        let step = 1usize << target;
        let cbit = 1usize << control;
        for lo in 0..self.amps.len() {
            if lo & step == 0 && lo & cbit != 0 {
                let hi = lo | step;
                let a0 = self.amps[lo];
                let a1 = self.amps[hi];
                self.amps[lo] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[hi] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// X on `target` controlled on every qubit in `controls` being 1.
    pub fn apply_mcx(&mut self, controls: &[usize], target: usize) {
        let cmask: usize = controls.iter().map(|&c| 1usize << c).sum();
        let step = 1usize << target;
        for lo in 0..self.amps.len() {
            if lo & step == 0 && lo & cmask == cmask {
                self.amps.swap(lo, lo | step);
            }
        }
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) {
        assert!(a < self.n && b < self.n);
        if a == b {
            return;
        }
        let (pa, pb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            let has_a = i & pa != 0;
            let has_b = i & pb != 0;
            if has_a && !has_b {
                self.amps.swap(i, (i ^ pa) | pb);
            }
        }
    }

    /// P(qubit `q` measures to `v`).
    pub fn prob_qubit(&self, q: usize, v: bool) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & bit != 0) == v)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Collapses qubit `q` to `v`, returning the branch probability.
    pub fn collapse_qubit(&mut self, q: usize, v: bool) -> f64 {
        let p = self.prob_qubit(q, v);
        assert!(p > 0.0, "collapsing onto a zero-probability branch");
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) != v {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        self.renormalize();
        p
    }

    /// Negates the amplitude of every basis state where any of `qubits` is
    /// nonzero: the reflection 2·Π₀ − 1 about their all-zero subspace.
    pub fn reflect_about_zero(&mut self, qubits: &[usize]) {
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask != 0 {
                *a = -*a;
            }
        }
    }

    /// Samples a basis state in the computational basis.
    pub fn sample_basis(&self, rng: &mut LabRng) -> usize {
        let draw: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if draw < acc {
                return i;
            }
        }
        self.amps.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::circuit::{gates, Circuit};
    use crate::util::rng;

    #[test]
    fn gates_preserve_norm() {
        let mut r = rng::seeded(60);
        for _ in 0..20 {
            let mut s = StateVector::random(&mut r, 4).unwrap();
            s.apply_single(&gates::h(), 2);
            s.apply_single(&gates::ry(0.3), 0);
            s.apply_controlled(&gates::x(), 1, 3);
            s.apply_mcx(&[0, 1, 2], 3);
            s.apply_swap(0, 2);
            assert!((s.norm_sqr() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn hadamard_splits_evenly() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_single(&gates::h(), 0);
        assert!((s.prob_qubit(0, false) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn collapse_renormalizes() {
        let mut s = StateVector::zero_state(2).unwrap();
        s.apply_single(&gates::h(), 0);
        s.apply_controlled(&gates::x(), 0, 1);
        let p = s.collapse_qubit(1, true);
        assert!((p - 0.5).abs() < 1e-12);
        assert!((s.norm_sqr() - 1.0).abs() < NORM_TOL);
        assert!((s.prob_qubit(0, true) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circuit_inverse_undoes() {
        let mut r = rng::seeded(61);
        let text = "h 0\nry 0.7 1\ncx 0 2\ncz 1 2\nswap 0 1\nccx 0 1 2";
        let c = Circuit::parse(text).unwrap();
        let s0 = StateVector::random(&mut r, 3).unwrap();
        let mut s = s0.clone();
        c.apply(&mut s).unwrap();
        c.apply_inverse(&mut s).unwrap();
        assert!(s.fidelity(&s0) > 1.0 - 1e-12);
    }

    #[test]
    fn overlarge_register_rejected() {
        assert!(StateVector::zero_state(MAX_QUBITS + 1).is_err());
    }
}
