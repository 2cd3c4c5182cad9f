//! Paired two-sided Wilcoxon signed-rank test.
//!
//! Zero differences are dropped; tied absolute differences receive mid-ranks.
//! With [`EXACT_LIMIT`] or fewer usable pairs the p-value is exact, from a
//! dynamic program over all `2^n` sign assignments (mid-ranks are doubled so
//! every achievable rank sum is an integer). Larger samples use the normal
//! approximation with the standard tie correction of the variance and a
//! continuity correction of one half toward the mean.

use crate::descriptors::normal_cdf;
use crate::error::{Error, Result};

/// Largest number of nonzero differences for which the exact null
/// distribution is enumerated.
pub const EXACT_LIMIT: usize = 25;

/// Outcome of the signed-rank test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Sum of the ranks of the positive differences (`W+`).
    pub statistic: f64,
    /// Two-sided p-value, capped at 1.
    pub p_value: f64,
    /// Number of pairs left after dropping zero differences.
    pub n_used: usize,
    /// True when the exact null distribution was used.
    pub exact: bool,
}

/// Two-sided signed-rank test of paired samples `a` and `b`.
///
/// Requires equal lengths of at least 5 and finite values; errors when all
/// differences are zero (the test is undefined).
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Stats(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 5 {
        return Err(Error::Stats(format!(
            "need at least 5 pairs, got {}",
            a.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Stats("samples contain non-finite values".into()));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x - y)
        .filter(|&d| d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Error::Stats(
            "all differences are zero; the signed-rank test is undefined".into(),
        ));
    }
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, tie_sizes) = midranks(&abs);
    let statistic: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(&d, _)| d > 0.0)
        .map(|(_, &r)| r)
        .sum();

    let (p_value, exact) = if n <= EXACT_LIMIT {
        // Mid-ranks are multiples of one half; doubling makes them integral.
        let doubled: Vec<u64> = ranks.iter().map(|&r| (2.0 * r).round() as u64).collect();
        let w2 = (2.0 * statistic).round() as u64;
        (exact_two_sided(&doubled, w2), true)
    } else {
        (normal_two_sided(statistic, n, &tie_sizes), false)
    };
    Ok(WilcoxonResult {
        statistic,
        p_value: p_value.min(1.0),
        n_used: n,
        exact,
    })
}

/// Mid-ranks of the values (parallel to the input) and the tie-group sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // Positions i..j (0-based) share the average of ranks i+1 ..= j.
        let avg = (i + j + 1) as f64 / 2.0;
        for k in i..j {
            ranks[idx[k]] = avg;
        }
        tie_sizes.push(j - i);
        i = j;
    }
    (ranks, tie_sizes)
}

/// Exact two-sided p-value by dynamic programming over sign assignments.
///
/// `doubled` holds the doubled mid-ranks; `w2` the doubled observed `W+`.
/// Counts stay below `2^EXACT_LIMIT`, far inside exact f64 integer range.
fn exact_two_sided(doubled: &[u64], w2: u64) -> f64 {
    let total_sum: u64 = doubled.iter().sum();
    let mut counts = vec![0.0f64; total_sum as usize + 1];
    counts[0] = 1.0;
    for &dr in doubled {
        for s in (dr as usize..counts.len()).rev() {
            counts[s] += counts[s - dr as usize];
        }
    }
    let lower: f64 = counts[..=(w2 as usize).min(counts.len() - 1)].iter().sum();
    let upper: f64 = counts[(w2 as usize).min(counts.len() - 1)..].iter().sum();
    let assignments = (doubled.len() as f64).exp2();
    (2.0 * lower.min(upper) / assignments).min(1.0)
}

/// Normal approximation with tie and continuity corrections.
fn normal_two_sided(statistic: f64, n: usize, tie_sizes: &[usize]) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_correction: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            (t * t * t - t) / 48.0
        })
        .sum();
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_correction;
    let centered = statistic - mean;
    if centered == 0.0 {
        return 1.0;
    }
    // Continuity correction: half a step toward the mean.
    let z = (centered - 0.5 * centered.signum()) / variance.sqrt();
    (2.0 * (1.0 - normal_cdf(z.abs()))).min(1.0)
}
