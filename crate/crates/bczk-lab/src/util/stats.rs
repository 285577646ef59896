//! Statistics helpers for the Monte-Carlo harnesses: binomial confidence
//! intervals, chi-square tests, and total-variation estimates.

use std::collections::BTreeMap;

/// Standard error of an empirical proportion.
pub fn binomial_se(p_hat: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

/// Chi-square statistic for observed vs expected counts. Bins with expected
/// count zero must have observed zero as well.
pub fn chi_square_stat(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            if e == 0.0 {
                assert_eq!(o, 0.0, "observed mass in zero-expectation bin");
                0.0
            } else {
                (o - e) * (o - e) / e
            }
        })
        .sum()
}

/// Upper critical value of the chi-square distribution via the
/// Wilson–Hilferty cube approximation. Accurate to a fraction of a percent
/// for the degrees of freedom used here, which is plenty for test gating.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    let z = match alpha {
        a if (a - 0.01).abs() < 1e-12 => 2.3263478740408408,
        a if (a - 0.05).abs() < 1e-12 => 1.6448536269514722,
        _ => panic!("unsupported alpha {alpha}"),
    };
    let k = df as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t * t * t
}

/// Two-sample chi-square homogeneity statistic over shared bins, together
/// with its degrees of freedom. Bins where both samples are empty are
/// dropped.
pub fn two_sample_chi_square(a: &BTreeMap<Vec<u8>, u64>, b: &BTreeMap<Vec<u8>, u64>) -> (f64, usize) {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    assert!(na > 0 && nb > 0);
    let mut keys: Vec<&Vec<u8>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut stat = 0.0;
    let mut used = 0usize;
    for k in keys {
        let oa = *a.get(k).unwrap_or(&0) as f64;
        let ob = *b.get(k).unwrap_or(&0) as f64;
        let tot = oa + ob;
        if tot == 0.0 {
            continue;
        }
        let ea = tot * na as f64 / (na + nb) as f64;
        let eb = tot * nb as f64 / (na + nb) as f64;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
        used += 1;
    }
    (stat, used.saturating_sub(1))
}

/// Plug-in total-variation distance between two empirical distributions.
pub fn empirical_tv(a: &BTreeMap<Vec<u8>, u64>, b: &BTreeMap<Vec<u8>, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    assert!(na > 0 && nb > 0);
    let mut keys: Vec<&Vec<u8>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut acc = 0.0;
    for k in keys {
        let pa = *a.get(k).unwrap_or(&0) as f64 / na as f64;
        let pb = *b.get(k).unwrap_or(&0) as f64 / nb as f64;
        acc += (pa - pb).abs();
    }
    acc / 2.0
}

/// Expected bin counts for Geometric(1/2) attempts truncated into bins
/// `1, 2, …, max_bin` plus a final `> max_bin` tail bin.
pub fn geometric_half_expected(total: u64, max_bin: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_bin + 1);
    for k in 1..=max_bin {
        out.push(total as f64 * 0.5f64.powi(k as i32));
    }
    out.push(total as f64 * 0.5f64.powi(max_bin as i32));
    out
}

/// Bins attempt counts to match [`geometric_half_expected`].
pub fn bin_attempts(attempts: &[u32], max_bin: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_bin + 1];
    for &a in attempts {
        let a = a as usize;
        if a >= 1 && a <= max_bin {
            out[a - 1] += 1.0;
        } else if a > max_bin {
            out[max_bin] += 1.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_values_match_tables() {
        // Reference values: 6.635 (df=1), 23.209 (df=10), 310.457 (df=255).
        assert!((chi_square_critical(1, 0.01) - 6.635).abs() < 0.1);
        assert!((chi_square_critical(10, 0.01) - 23.209).abs() < 0.05);
        assert!((chi_square_critical(255, 0.01) - 310.457).abs() < 0.5);
    }

    #[test]
    fn tv_of_identical_histograms_is_zero() {
        let mut a = BTreeMap::new();
        a.insert(vec![0u8], 5u64);
        a.insert(vec![1u8], 5u64);
        assert_eq!(empirical_tv(&a, &a), 0.0);
    }

    #[test]
    fn geometric_bins_sum_to_total() {
        let e = geometric_half_expected(1 << 20, 12);
        let sum: f64 = e.iter().sum();
        assert!((sum - (1u64 << 20) as f64).abs() < 1e-6);
    }
}
