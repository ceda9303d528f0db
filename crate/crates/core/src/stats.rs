//! Mann-Whitney U rank-sum testing with midrank tie handling, exact
//! enumeration for small tie-free samples, and a tie-corrected normal
//! approximation otherwise.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::roster::Rank;

/// Direction of the rank difference: U against its null expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

impl Sign {
    pub fn label(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
            Sign::Zero => "0",
        }
    }
}

/// How the p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactEnumeration,
    NormalApprox,
}

/// One two-sided Mann-Whitney test result for sample `a` against sample `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MwTest {
    pub n_a: usize,
    pub n_b: usize,
    /// U statistic for sample `a`; half-integral under ties.
    pub u: f64,
    pub p_value: f64,
    pub sign: Sign,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("empty input sample")]
    EmptyInput,
    #[error("non-finite value in input sample")]
    NonFinite,
    #[error("star thresholds must be strictly decreasing within (0, 1), got {0:?}")]
    BadThresholds(Vec<f64>),
}

/// Samples this small (tie-free) get an exact p-value by enumeration; the
/// count table for min(n) = 8 stays far below u128 range for pooled sizes up
/// to this cap.
const EXACT_MIN_N: usize = 8;
const EXACT_POOLED_CAP: usize = 20_000;

/// Midranks over the pooled sample, 1-based; ties share the average rank.
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].partial_cmp(&pooled[j]).expect("finite values"));
    let mut ranks = vec![0.0; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // Positions start..end (0-based) share ranks start+1..=end.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = shared;
        }
        start = end;
    }
    ranks
}

/// Sizes of tie groups in the pooled sample.
fn tie_group_sizes(pooled: &[f64]) -> Vec<usize> {
    let mut sorted: Vec<f64> = pooled.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite values"));
    let mut sizes = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        sizes.push(end - start);
        start = end;
    }
    sizes
}

/// Number of m-subsets of ranks 1..=m+n per value of U in 0..=m*n, by the
/// rank-sum counting recurrence (prefix sums with stride i, then subtraction
/// of the overflow shifted by n+i).
fn rank_sum_counts(m: usize, n: usize) -> Vec<u128> {
    let mn = m * n;
    let mut counts = vec![0u128; mn + 1];
    counts[0] = 1;
    for i in 1..=m {
        for u in i..=mn {
            counts[u] += counts[u - i];
        }
        let shift = n + i;
        for u in (shift..=mn).rev() {
            counts[u] -= counts[u - shift];
        }
    }
    counts
}

/// Exact two-sided p: the probability mass of U values at least as far from
/// the null mean as observed. Works in doubled units so half-integral means
/// stay exact.
fn exact_two_sided_p(n_a: usize, n_b: usize, u_observed: f64) -> f64 {
    let m = n_a.min(n_b);
    let n = n_a.max(n_b);
    let counts = rank_sum_counts(m, n);
    let mn = (m * n) as i64;
    // |2U - mn| is symmetric in the group choice, so counting with the
    // smaller group's distribution is counting for `a`.
    let threshold = (2.0 * u_observed - mn as f64).abs().round() as i64;
    let mut favorable: u128 = 0;
    let mut total: u128 = 0;
    for (u, &count) in counts.iter().enumerate() {
        total += count;
        if (2 * u as i64 - mn).abs() >= threshold {
            favorable += count;
        }
    }
    favorable as f64 / total as f64
}

/// Two-sided Mann-Whitney U test of `a` against `b`.
///
/// Midranks are assigned over the pooled sample; U_a = R_a - n_a(n_a+1)/2.
/// The sign compares U_a with its null expectation n_a*n_b/2. The p-value is
/// exact by enumeration for tie-free samples with min(n) <= 8, otherwise a
/// normal approximation with tie-corrected variance and a 0.5 continuity
/// correction. A pooled sample with every value identical yields sign 0 and
/// p = 1.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MwTest, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n_a = a.len();
    let n_b = b.len();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let ranks = midranks(&pooled);
    let r_a: f64 = ranks[..n_a].iter().sum();
    let u = r_a - (n_a * (n_a + 1)) as f64 / 2.0;
    let mean = (n_a * n_b) as f64 / 2.0;
    let d = u - mean;
    let sign = if d > 0.0 {
        Sign::Plus
    } else if d < 0.0 {
        Sign::Minus
    } else {
        Sign::Zero
    };

    let ties = tie_group_sizes(&pooled);
    let has_ties = ties.iter().any(|&t| t > 1);
    if !has_ties && n_a.min(n_b) <= EXACT_MIN_N && n <= EXACT_POOLED_CAP {
        let p_value = exact_two_sided_p(n_a, n_b, u);
        return Ok(MwTest { n_a, n_b, u, p_value, sign, method: Method::ExactEnumeration });
    }

    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1)) as f64;
    let variance = (n_a * n_b) as f64 / 12.0 * ((n + 1) as f64 - tie_term);
    if variance <= 0.0 {
        // Every pooled value identical.
        return Ok(MwTest { n_a, n_b, u, p_value: 1.0, sign: Sign::Zero, method: Method::NormalApprox });
    }
    let z = if d == 0.0 { 0.0 } else { (d - 0.5 * d.signum()) / variance.sqrt() };
    let normal = Normal::new(0.0, 1.0).expect("valid standard normal");
    let p_value = (2.0 * normal.cdf(-z.abs())).clamp(0.0, 1.0);
    Ok(MwTest { n_a, n_b, u, p_value, sign, method: Method::NormalApprox })
}

/// Significance marking: one star per threshold the p-value falls below.
/// Thresholds must be strictly decreasing within (0, 1); the default is
/// [0.05, 0.01, 0.001].
pub fn stars(p_value: f64, thresholds: &[f64]) -> Result<String, StatsError> {
    let monotone = thresholds.windows(2).all(|w| w[0] > w[1]);
    if thresholds.is_empty() || !monotone || thresholds.iter().any(|&t| t <= 0.0 || t >= 1.0) {
        return Err(StatsError::BadThresholds(thresholds.to_vec()));
    }
    Ok("*".repeat(thresholds.iter().filter(|&&t| p_value < t).count()))
}

pub fn default_star_thresholds() -> Vec<f64> {
    vec![0.05, 0.01, 0.001]
}

/// One rank-pair comparison; `test` is None when either cohort is empty
/// (not computable).
#[derive(Debug, Clone, PartialEq)]
pub struct RankComparison {
    pub group_a: Rank,
    pub group_b: Rank,
    pub n_a: usize,
    pub n_b: usize,
    pub test: Option<MwTest>,
}

/// The three pairings in fixed order: Full vs Associate, Associate vs
/// Assistant, Assistant vs Full.
pub fn compare_ranks(
    full: &[f64],
    associate: &[f64],
    assistant: &[f64],
) -> Result<[RankComparison; 3], StatsError> {
    let pairs = [
        (Rank::Full, full, Rank::Associate, associate),
        (Rank::Associate, associate, Rank::Assistant, assistant),
        (Rank::Assistant, assistant, Rank::Full, full),
    ];
    let mut out = Vec::with_capacity(3);
    for (rank_a, a, rank_b, b) in pairs {
        let test = if a.is_empty() || b.is_empty() { None } else { Some(mann_whitney(a, b)?) };
        out.push(RankComparison { group_a: rank_a, group_b: rank_b, n_a: a.len(), n_b: b.len(), test });
    }
    Ok(out.try_into().expect("exactly three comparisons"))
}
