//! Two-outcome measurement operator pairs on a designated qubit.

use num::complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::state::{StateVector, NORM_TOL};
use crate::util::rng::LabRng;

/// A pair (M0, M1) acting on one qubit with M0†M0 + M1†M1 = I.
#[derive(Debug, Clone)]
pub struct MeasurementOp {
    pub m0: [[Complex64; 2]; 2],
    pub m1: [[Complex64; 2]; 2],
    pub target: usize,
}

fn dagger_product(m: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    // M†M.
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            for k in 0..2 {
                *cell += m[k][i].conj() * m[k][j];
            }
        }
    }
    out
}

impl MeasurementOp {
    pub fn new(
        m0: [[Complex64; 2]; 2],
        m1: [[Complex64; 2]; 2],
        target: usize,
    ) -> Result<Self> {
        let p0 = dagger_product(&m0);
        let p1 = dagger_product(&m1);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let got = p0[i][j] + p1[i][j];
                if (got - want).norm() > NORM_TOL {
                    return Err(Error::Domain(format!(
                        "M0†M0 + M1†M1 deviates from identity at ({i},{j}): {got}"
                    )));
                }
            }
        }
        Ok(MeasurementOp { m0, m1, target })
    }

    /// The damping pair used by the adaptive attack:
    /// M0 = |0⟩⟨0|/√2 + |1⟩⟨1|, M1 = |0⟩⟨0|/√2.
    pub fn attack_pair(target: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero = Complex64::new(0.0, 0.0);
        let m0 = [
            [Complex64::new(s, 0.0), zero],
            [zero, Complex64::new(1.0, 0.0)],
        ];
        let m1 = [[Complex64::new(s, 0.0), zero], [zero, zero]];
        MeasurementOp::new(m0, m1, target).expect("attack pair is complete by construction")
    }

    /// Applies the chosen operator, returning the outcome probability and
    /// the normalized post-state.
    pub fn apply_operator(&self, state: &StateVector, outcome: bool) -> (f64, StateVector) {
        let m = if outcome { &self.m1 } else { &self.m0 };
        let mut post = state.clone();
        post.apply_single(m, self.target);
        let p = post.norm_sqr();
        if p > 0.0 {
            post.renormalize();
        }
        (p, post)
    }
}

/// Samples the outcome with probability ‖M_b ψ‖² and collapses.
pub fn apply_measure(
    state: &StateVector,
    op: &MeasurementOp,
    rng: &mut LabRng,
) -> (bool, StateVector) {
    let (p0, post0) = op.apply_operator(state, false);
    let draw: f64 = rng.gen();
    if draw < p0 {
        (false, post0)
    } else {
        let (_, post1) = op.apply_operator(state, true);
        (true, post1)
    }
}
