//! Pearson, Spearman and Kendall (tau-b) correlation with two-sided p-values.
//!
//! Pearson and Spearman p-values refer `t = r√(n−2)/√(1−r²)` to Student's t
//! with `n − 2` degrees of freedom, evaluated through the regularized
//! incomplete beta function so tiny tails keep their precision. Kendall uses
//! the normal approximation on `S = C − D` with the tie-adjusted variance and
//! a continuity correction of one unit.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::{beta::beta_reg, erf::erfc};
use thiserror::Error;

/// Significance threshold on the two-sided p-value.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pearson,
    Spearman,
    Kendall,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Pearson, Method::Spearman, Method::Kendall];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pearson => "pearson",
            Method::Spearman => "spearman",
            Method::Kendall => "kendall",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pearson" => Ok(Method::Pearson),
            "spearman" => Ok(Method::Spearman),
            "kendall" => Ok(Method::Kendall),
            other => Err(format!("unknown correlation method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Weak,
    Moderate,
    Strong,
    VeryStrong,
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strength::Weak => "weak",
            Strength::Moderate => "moderate",
            Strength::Strong => "strong",
            Strength::VeryStrong => "very_strong",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StatsError {
    #[error("series lengths differ ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least 3 paired observations, got {0}")]
    TooFewObservations(usize),
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("a series has zero variance")]
    DegenerateVariance,
    #[error("coefficient {0} outside [-1, 1]")]
    OutOfRange(f64),
}

/// Two equal-length finite series with at least three observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::LengthMismatch { x: x.len(), y: y.len() });
        }
        if x.len() < 3 {
            return Err(StatsError::TooFewObservations(x.len()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|a| *a == v[0])
}

fn product_moment(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::DegenerateVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn pearson(s: &PairedSeries) -> Result<f64, StatsError> {
    product_moment(&s.x, &s.y)
}

/// Ranks `1..=n`, tied values sharing the mean of the ranks they span.
pub fn rank_average_ties(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(s: &PairedSeries) -> Result<f64, StatsError> {
    product_moment(&rank_average_ties(&s.x), &rank_average_ties(&s.y))
}

/// Pair counts behind tau-b.
#[derive(Debug, Clone, PartialEq)]
struct KendallCounts {
    /// Concordant minus discordant pairs.
    s: i64,
    total_pairs: i64,
    tied_x_pairs: i64,
    tied_y_pairs: i64,
    x_tie_groups: Vec<i64>,
    y_tie_groups: Vec<i64>,
}

fn tie_groups(sorted: &[f64]) -> Vec<i64> {
    let mut groups = Vec::new();
    let mut run = 1i64;
    for w in sorted.windows(2) {
        if w[1] == w[0] {
            run += 1;
        } else {
            if run > 1 {
                groups.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        groups.push(run);
    }
    groups
}

fn pairs(t: i64) -> i64 {
    t * (t - 1) / 2
}

/// Knight's O(n log n) algorithm: sort by (x, y), then count the swaps a
/// merge sort on y needs.
fn kendall_counts(x: &[f64], y: &[f64]) -> KendallCounts {
    // -0.0 and 0.0 must compare equal under total_cmp
    let x: Vec<f64> = x.iter().map(|v| v + 0.0).collect();
    let y: Vec<f64> = y.iter().map(|v| v + 0.0).collect();
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let x_tie_groups = tie_groups(&xs);
    let tied_x_pairs: i64 = x_tie_groups.iter().map(|&t| pairs(t)).sum();

    let mut joint_ties = 0i64;
    let mut run = 1i64;
    for w in idx.windows(2) {
        if x[w[0]] == x[w[1]] && y[w[0]] == y[w[1]] {
            run += 1;
        } else {
            joint_ties += pairs(run);
            run = 1;
        }
    }
    joint_ties += pairs(run);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let swaps = merge_sort_count(&mut ys);
    let y_tie_groups = tie_groups(&ys);
    let tied_y_pairs: i64 = y_tie_groups.iter().map(|&t| pairs(t)).sum();

    let total_pairs = pairs(n as i64);
    let s = total_pairs - tied_x_pairs - tied_y_pairs + joint_ties - 2 * swaps;
    KendallCounts {
        s,
        total_pairs,
        tied_x_pairs,
        tied_y_pairs,
        x_tie_groups,
        y_tie_groups,
    }
}

/// Stable merge sort returning the number of inversions (strictly greater
/// elements moved past smaller ones).
fn merge_sort_count(v: &mut [f64]) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mut buf = v.to_vec();
    let mut swaps = 0i64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[j].total_cmp(&v[i]) == Ordering::Less {
                    buf[k] = v[j];
                    swaps += (mid - i) as i64;
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + (hi - j)].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        v.copy_from_slice(&buf);
        width *= 2;
    }
    swaps
}

/// Kendall's tau-b; equals tau-a on tie-free data.
pub fn kendall(s: &PairedSeries) -> Result<f64, StatsError> {
    let c = kendall_counts(&s.x, &s.y);
    let dx = (c.total_pairs - c.tied_x_pairs) as f64;
    let dy = (c.total_pairs - c.tied_y_pairs) as f64;
    if dx == 0.0 || dy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok((c.s as f64 / (dx * dy).sqrt()).clamp(-1.0, 1.0))
}

pub fn coefficient(method: Method, s: &PairedSeries) -> Result<f64, StatsError> {
    match method {
        Method::Pearson => pearson(s),
        Method::Spearman => spearman(s),
        Method::Kendall => kendall(s),
    }
}

fn clamp_p(p: f64) -> f64 {
    if p.is_nan() {
        1.0
    } else {
        p.clamp(f64::MIN_POSITIVE, 1.0)
    }
}

/// Two-sided p-value of a product-moment style coefficient `r` from `n`
/// observations under the t approximation.
pub fn t_test_p(r: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    let r2 = (r * r).min(1.0);
    if r2 >= 1.0 {
        return f64::MIN_POSITIVE;
    }
    // P(|T| >= t) = I_{df/(df+t²)}(df/2, 1/2) and df/(df+t²) = 1 − r²
    clamp_p(beta_reg(df / 2.0, 0.5, 1.0 - r2))
}

/// Variance of `S` under independence, adjusted for ties in either series.
fn kendall_s_variance(n: i64, x_groups: &[i64], y_groups: &[i64]) -> f64 {
    let n = n as f64;
    let sum = |g: &[i64], f: fn(f64) -> f64| g.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = sum(x_groups, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(y_groups, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = sum(x_groups, |t| t * (t - 1.0)) * sum(y_groups, |t| t * (t - 1.0));
    let v2 = sum(x_groups, |t| t * (t - 1.0) * (t - 2.0)) * sum(y_groups, |t| t * (t - 1.0) * (t - 2.0));
    (v0 - vt - vu) / 18.0 + v1 / (2.0 * n * (n - 1.0)) + v2 / (9.0 * n * (n - 1.0) * (n - 2.0))
}

/// Two-sided p-value for a coefficient produced by `method` on `s`.
pub fn p_value(method: Method, r: f64, s: &PairedSeries) -> Result<f64, StatsError> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(StatsError::OutOfRange(r));
    }
    match method {
        Method::Pearson | Method::Spearman => Ok(t_test_p(r, s.len())),
        Method::Kendall => {
            let c = kendall_counts(&s.x, &s.y);
            let dx = (c.total_pairs - c.tied_x_pairs) as f64;
            let dy = (c.total_pairs - c.tied_y_pairs) as f64;
            if dx == 0.0 || dy == 0.0 {
                return Err(StatsError::DegenerateVariance);
            }
            let var = kendall_s_variance(s.len() as i64, &c.x_tie_groups, &c.y_tie_groups);
            if var <= 0.0 {
                return Err(StatsError::DegenerateVariance);
            }
            let score = r * (dx * dy).sqrt();
            let corrected = (score.abs() - 1.0).max(0.0);
            let z = corrected / var.sqrt();
            Ok(clamp_p(erfc(z / std::f64::consts::SQRT_2)))
        }
    }
}

/// Strength band of a coefficient, judged on its magnitude rounded to two
/// decimals.
pub fn classify_strength(r: f64) -> Result<Strength, StatsError> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(StatsError::OutOfRange(r));
    }
    let hundredths = (r.abs() * 100.0).round() as u32;
    Ok(match hundredths {
        0..=35 => Strength::Weak,
        36..=67 => Strength::Moderate,
        68..=89 => Strength::Strong,
        _ => Strength::VeryStrong,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub method: Method,
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    pub strength: Strength,
    pub significant: bool,
}

impl CorrelationResult {
    /// Significant and at least moderate: the cells a report emphasises.
    pub fn highlighted(&self) -> bool {
        self.significant && self.strength >= Strength::Moderate
    }
}

pub fn correlate(method: Method, s: &PairedSeries) -> Result<CorrelationResult, StatsError> {
    let r = coefficient(method, s)?;
    let p = p_value(method, r, s)?;
    Ok(CorrelationResult {
        method,
        r,
        p_value: p,
        n: s.len(),
        strength: classify_strength(r)?,
        significant: p < SIGNIFICANCE_LEVEL,
    })
}
