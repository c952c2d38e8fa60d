//! The piecewise-linear exponent r(t, α, β), its median interval, and the
//! admissibility / interlacing predicates.
//!
//! r(t) = Σ_{k,l} |t + α_k + β_l| − Σ_{k<l} |α_k − α_l| − Σ_{k<l} |β_k − β_l|
//!
//! is convex in t, non-negative, flat on the median interval I_M, and
//! vanishes there exactly when (α, β) is admissible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{compensated_sum, CompensatedSum};
use crate::params::{check_dimensions, AlphaParams, BetaParams, ParamError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("relaxation constant must be non-negative, got {0}")]
    NegativeC(f64),
}

/// Closed real interval `[lo, hi]`, possibly a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

/// [lo − C, hi + C].
pub fn widened_interval(interval: Interval, c: f64) -> Interval {
    Interval::new(interval.lo - c, interval.hi + c)
}

/// Partition of the n(n+1) pair sums into an upper and a lower half.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignSplit {
    /// Upper half, non-increasing.
    pub s_plus: Vec<f64>,
    /// Lower half, non-increasing.
    pub s_minus: Vec<f64>,
    /// The value at the cut occurs on both sides, so the split is not unique.
    pub tie_note: bool,
}

impl SignSplit {
    pub fn min_plus(&self) -> f64 {
        *self.s_plus.last().expect("non-empty split")
    }

    pub fn max_minus(&self) -> f64 {
        self.s_minus[0]
    }

    pub fn median_interval(&self) -> Interval {
        Interval::new(-self.min_plus(), -self.max_minus())
    }
}

/// Cached pair sums and constant part of r for one (α, β).
#[derive(Debug, Clone)]
pub struct ExponentProfile {
    n: usize,
    sums: Vec<f64>,
    constant: f64,
}

impl ExponentProfile {
    pub fn new(alpha: &AlphaParams, beta: &BetaParams) -> Result<Self, ParamError> {
        check_dimensions(alpha, beta)?;
        let n = alpha.n();
        let a = alpha.values();
        let b = beta.values();
        let sums: Vec<f64> = a
            .iter()
            .flat_map(|ak| b.iter().map(move |bl| ak + bl))
            .collect();
        let mut constant = CompensatedSum::new();
        for (i, ai) in a.iter().enumerate() {
            for aj in &a[i + 1..] {
                constant.add((ai - aj).abs());
            }
        }
        for (i, bi) in b.iter().enumerate() {
            for bj in &b[i + 1..] {
                constant.add((bi - bj).abs());
            }
        }
        Ok(Self {
            n,
            sums,
            constant: constant.value(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Pair sums α_k + β_l in row-major (k, l) order.
    pub fn pair_sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn r(&self, t: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for s in &self.sums {
            acc.add((t + s).abs());
        }
        acc.add(-self.constant);
        acc.value()
    }

    /// −½ Σ log(1 + |t + α_k + β_l|), the rational part of the Stirling weight.
    pub fn rational_log(&self, t: f64) -> f64 {
        -0.5 * compensated_sum(self.sums.iter().map(|s| (t + s).abs().ln_1p()))
    }

    /// Kinks of r: the points t = −(α_k + β_l), sorted increasing, deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.sums.iter().map(|s| -s).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn sign_split(&self) -> SignSplit {
        let mut sorted = self.sums.clone();
        // stable: ties keep row-major order
        sorted.sort_by(|a, b| b.total_cmp(a));
        let half = sorted.len() / 2;
        let s_minus = sorted.split_off(half);
        let tie_note = sorted[half - 1] == s_minus[0];
        SignSplit {
            s_plus: sorted,
            s_minus,
            tie_note,
        }
    }

    pub fn median_interval(&self) -> Interval {
        self.sign_split().median_interval()
    }

    /// Minimum of r, attained on the median interval.
    pub fn min_value(&self) -> f64 {
        self.r(self.median_interval().midpoint())
    }

    /// The two points where r rises `level` above its minimum.
    ///
    /// Outside I_M the slope of r is at least 2 in magnitude, so each crossing
    /// lies within `level / 2` of the interval; bisection finds it.
    pub fn level_window(&self, level: f64) -> Interval {
        let im = self.median_interval();
        let target = self.r(im.midpoint()) + level;
        let reach = 0.5 * level + 1.0;
        let bisect = |inside: f64, outside: f64| {
            let (mut a, mut b) = (inside, outside);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if self.r(m) < target {
                    a = m;
                } else {
                    b = m;
                }
            }
            b
        };
        Interval::new(bisect(im.lo, im.lo - reach), bisect(im.hi, im.hi + reach))
    }
}

pub fn r_exponent(t: f64, alpha: &AlphaParams, beta: &BetaParams) -> Result<f64, ParamError> {
    Ok(ExponentProfile::new(alpha, beta)?.r(t))
}

pub fn sign_split(alpha: &AlphaParams, beta: &BetaParams) -> Result<SignSplit, ParamError> {
    Ok(ExponentProfile::new(alpha, beta)?.sign_split())
}

pub fn median_interval(alpha: &AlphaParams, beta: &BetaParams) -> Result<Interval, ParamError> {
    Ok(ExponentProfile::new(alpha, beta)?.median_interval())
}

/// Entries directly above the staircase: α_{n+1−k} + β_k, k = 1..n.
pub(crate) fn upper_diagonal(alpha: &AlphaParams, beta: &BetaParams) -> Vec<f64> {
    let n = alpha.n();
    (1..=n).map(|k| alpha.at(n + 1 - k) + beta.at(k)).collect()
}

/// Entries directly below the staircase: α_{n+2−l} + β_l, l = 1..n.
pub(crate) fn lower_diagonal(alpha: &AlphaParams, beta: &BetaParams) -> Vec<f64> {
    let n = alpha.n();
    (1..=n).map(|l| alpha.at(n + 2 - l) + beta.at(l)).collect()
}

/// α_{n+1−k} + β_k ≥ α_{n+2−l} + β_l for all k, l ∈ {1..n}.
pub fn is_admissible(alpha: &AlphaParams, beta: &BetaParams) -> Result<bool, ParamError> {
    check_dimensions(alpha, beta)?;
    let upper = upper_diagonal(alpha, beta);
    let lower = lower_diagonal(alpha, beta);
    let min_upper = upper.iter().copied().fold(f64::INFINITY, f64::min);
    let max_lower = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(min_upper >= max_lower)
}

/// −α_{n+1} ≥ λ_1 ≥ −α_n ≥ λ_2 ≥ … ≥ −α_2 ≥ λ_n ≥ −α_1.
pub fn interlace_check(lambda: &[f64], alpha: &AlphaParams) -> Result<bool, ParamError> {
    interlace_check_with_slack(lambda, alpha, 0.0)
}

/// [`interlace_check`] with every inequality relaxed by `slack`.
pub fn interlace_check_with_slack(
    lambda: &[f64],
    alpha: &AlphaParams,
    slack: f64,
) -> Result<bool, ParamError> {
    let n = alpha.n();
    if lambda.len() != n {
        return Err(ParamError::DimensionMismatch {
            expected: n,
            got: lambda.len(),
        });
    }
    Ok(lambda.iter().enumerate().all(|(i, &l)| {
        let j = i + 1;
        let upper = -alpha.at(n + 2 - j);
        let lower = -alpha.at(n + 1 - j);
        l <= upper + slack && l >= lower - slack
    }))
}

/// α_{n+1−k} − α_{n+2−j} + C ≥ β_j − β_k ≥ α_{n+2−k} − α_{n+1−j} − C for j ≤ k.
pub fn is_relaxed_admissible(
    alpha: &AlphaParams,
    beta: &BetaParams,
    c: f64,
) -> Result<bool, ExponentError> {
    if c < 0.0 || c.is_nan() {
        return Err(ExponentError::NegativeC(c));
    }
    check_dimensions(alpha, beta)?;
    let n = alpha.n();
    for j in 1..=n {
        for k in j..=n {
            let diff = beta.at(j) - beta.at(k);
            let upper = alpha.at(n + 1 - k) - alpha.at(n + 2 - j) + c;
            let lower = alpha.at(n + 2 - k) - alpha.at(n + 1 - j) - c;
            if diff > upper || diff < lower {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
