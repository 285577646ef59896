//! Soundness arithmetic: exact binomial tail bounds and cheating-prover
//! Monte Carlo.
//!
//! At p = 1/2 (the only case the soundness chain needs) the tail is computed
//! exactly: the numerator Σ_{j≥k} C(n,j) is accumulated in big-integer
//! arithmetic and only the final logarithm rounds, so the comparison against
//! the e^(−Qλ/180) bound carries no summation error at all. A log-sum-exp
//! path covers general p, and a normal approximation (flagged) covers n
//! beyond the direct range.

use num::bigint::BigUint;
use num::{One, Zero};

use crate::bczk::{AdversaryKind, CheatStrategy, ProverKind};
use crate::error::{Error, Result};
use crate::params::{derive_params, ProtocolParams};
use crate::proof_backends::BaseRelation;

/// Largest n handled by the direct (exact / summed) paths.
pub const DIRECT_N_LIMIT: u64 = 10_000_000;

/// ln P[Bin(n, 1/2) ≥ k], with the numerator computed exactly.
///
/// Returns `f64::NEG_INFINITY` for the empty tail (k = n+1).
pub fn binom_tail_half_exact(n: u64, k: u64) -> Result<f64> {
    if k > n + 1 {
        return Err(Error::Domain(format!("k = {k} exceeds n+1 = {}", n + 1)));
    }
    if n > DIRECT_N_LIMIT {
        return Err(Error::TooLarge(format!("n = {n} beyond direct range")));
    }
    if k == n + 1 {
        return Ok(f64::NEG_INFINITY);
    }
    let numerator = binom_upper_sum(n, k);
    Ok(ln_biguint(&numerator) - n as f64 * std::f64::consts::LN_2)
}

/// Σ_{j≥k} C(n,j), exactly.
pub fn binom_upper_sum(n: u64, k: u64) -> BigUint {
    // Walk the coefficients downward from C(n,n) = 1 so only the tail's own
    // terms are touched: C(n,j-1) = C(n,j)·j/(n-j+1).
    let mut acc = BigUint::zero();
    let mut coeff = BigUint::one(); // C(n, n)
    let mut j = n;
    loop {
        if j < k {
            break;
        }
        acc += &coeff;
        if j == k {
            break;
        }
        coeff = coeff * BigUint::from(j) / BigUint::from(n - j + 1);
        j -= 1;
    }
    acc
}

/// Natural log of a positive big integer, accurate to f64 rounding.
fn ln_biguint(v: &BigUint) -> f64 {
    assert!(!v.is_zero());
    let bits = v.bits();
    if bits <= 53 {
        let x = v.iter_u64_digits().next().unwrap_or(0);
        return (x as f64).ln();
    }
    // Take the top 64 bits as the mantissa m, so v ≈ m · 2^(bits−64).
    let shift = bits - 64;
    let top: BigUint = v >> shift;
    let m = top.iter_u64_digits().next().unwrap_or(0);
    (m as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// ln C(n, k) table via the incremental product, for the general-p path.
fn ln_binomials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for j in 0..n {
        acc += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
        out.push(acc);
    }
    out
}

/// ln P[Bin(n, p) ≥ k]. Exact big-integer numerator at p = 1/2; log-sum-exp
/// with compensated summation otherwise. For n beyond the direct range use
/// [`binom_tail_approx`].
pub fn binom_tail_log(n: u64, p: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    if k > n + 1 {
        return Err(Error::Domain(format!("k = {k} exceeds n+1 = {}", n + 1)));
    }
    if n > DIRECT_N_LIMIT {
        return Err(Error::TooLarge(format!(
            "n = {n} beyond direct range; use the approximate path"
        )));
    }
    if k == 0 {
        return Ok(0.0);
    }
    if k == n + 1 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 0.5 {
        return binom_tail_half_exact(n, k);
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY); // k >= 1 here
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let lnb = ln_binomials(n);
    let lp = p.ln();
    let lq = (1.0 - p).ln();
    let log_terms: Vec<f64> = (k..=n)
        .map(|j| lnb[j as usize] + j as f64 * lp + (n - j) as f64 * lq)
        .collect();
    Ok(log_sum_exp(&log_terms))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    // Neumaier-compensated sum of the exponentials.
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &t in terms {
        let v = (t - m).exp();
        let s = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - s) + v;
        } else {
            c += (v - s) + sum;
        }
        sum = s;
    }
    m + (sum + c).ln()
}

/// Continuity-corrected normal tail for n beyond the direct range.
/// The result is an approximation and callers must treat it as such.
pub fn binom_tail_approx(n: u64, p: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    let nf = n as f64;
    let mean = nf * p;
    let sd = (nf * p * (1.0 - p)).sqrt();
    let z = (k as f64 - 0.5 - mean) / sd;
    let ln_tail = if z > 8.0 {
        -0.5 * z * z - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + (-1.0 / (z * z)).ln_1p()
    } else {
        (0.5 * erfc_approx(z / std::f64::consts::SQRT_2)).ln()
    };
    Ok(ln_tail)
}

/// Abramowitz–Stegun 7.1.26-style erfc approximation (|err| < 1.5e-7).
fn erfc_approx(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc_approx(-x);
    }
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    poly * (-x * x).exp()
}

/// One grid point of the soundness-tail verification.
#[derive(Debug, Clone)]
pub struct TailResult {
    pub q: u64,
    pub lambda: u64,
    pub n: u64,
    pub k: u64,
    /// ln P[Bin(n, 1/2) ≥ k].
    pub log_tail: f64,
    /// −qλ/180, the log of the concentration bound.
    pub log_bound: f64,
    pub approximate: bool,
    pub satisfied: bool,
}

impl TailResult {
    pub fn csv_header() -> &'static str {
        "q,lambda,n,k,log_tail,log_bound,approximate,satisfied"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{:.12e},{},{}",
            self.q,
            self.lambda,
            self.n,
            self.k,
            self.log_tail,
            self.log_bound,
            self.approximate as u8,
            self.satisfied as u8
        )
    }
}

/// Slack applied to the log-domain comparison.
pub const LOG_SLACK: f64 = 1e-12;

/// For each grid point, checks
/// P[Bin(120q⁷λ, 1/2) ≥ 60q⁷λ + q⁴λ] ≤ e^(−qλ/180)
/// in the log domain with [`LOG_SLACK`] slack.
pub fn verify_soundness_inequality(grid: &[(u64, u64)]) -> Result<Vec<TailResult>> {
    let mut out = Vec::with_capacity(grid.len());
    for &(q, lambda) in grid {
        let params = derive_params(q, lambda)?;
        let n = params.slots;
        let k = params.threshold;
        let (log_tail, approximate) = if n <= DIRECT_N_LIMIT {
            (binom_tail_half_exact(n, k)?, false)
        } else {
            (binom_tail_approx(n, 0.5, k)?, true)
        };
        let log_bound = -((q * lambda) as f64) / 180.0;
        out.push(TailResult {
            q,
            lambda,
            n,
            k,
            log_tail,
            log_bound,
            approximate,
            satisfied: log_tail <= log_bound + LOG_SLACK,
        });
    }
    Ok(out)
}

/// Cheating-prover strategies for the Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheatingStrategy {
    UniformGuess,
    AllZeros,
    AdaptiveOnTranscript,
}

impl CheatingStrategy {
    fn to_kind(self) -> ProverKind {
        ProverKind::Cheating(match self {
            CheatingStrategy::UniformGuess => CheatStrategy::UniformGuess,
            CheatingStrategy::AllZeros => CheatStrategy::AllZeros,
            CheatingStrategy::AdaptiveOnTranscript => CheatStrategy::AdaptiveOnTranscript,
        })
    }
}

/// Fraction of trials in which a witnessless prover convinced the honest
/// verifier. The instance is outside the base language, so only the
/// matched-slot branch can win, and the commitments are physically sent
/// before the verifier's bits arrive.
pub fn cheating_prover_mc(
    params: &ProtocolParams,
    strategy: CheatingStrategy,
    trials: u64,
    seed_bits: usize,
    seed: u64,
) -> Result<f64> {
    let x = vec![0u8; 32];
    let mut wins = 0u64;
    for t in 0..trials {
        let run = crate::bczk::run_concurrent(
            params,
            seed_bits,
            BaseRelation::Never,
            &x,
            strategy.to_kind(),
            AdversaryKind::HonestLike,
            seed ^ t,
        )?;
        wins += u64::from(run.verifier_accepts.iter().all(|a| *a == Some(true)));
    }
    Ok(wins as f64 / trials as f64)
}
