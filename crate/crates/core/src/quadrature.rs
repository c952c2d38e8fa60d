//! Globally adaptive Gauss–Kronrod (7, 15) quadrature on a finite interval,
//! with caller-supplied breakpoints seeded as initial panel boundaries, plus
//! a graded tensor-product Gauss–Legendre rule for low-dimensional boxes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::CompensatedSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge: value {value}, error estimate {error:e} after {evaluations} evaluations")]
    QuadratureFailure {
        value: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("integrand returned a non-finite value at {at}")]
    NonFiniteIntegrand { at: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_at: Option<(f64, f64)>,
    /// Upper bound on the integrand mass discarded by truncation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_evals: 2_000_000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64), QuadratureError> {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFiniteIntegrand { at: c });
    }
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let (a, b) = (c - dx, c + dx);
        let (fa, fb) = (f(a), f(b));
        if !fa.is_finite() {
            return Err(QuadratureError::NonFiniteIntegrand { at: a });
        }
        if !fb.is_finite() {
            return Err(QuadratureError::NonFiniteIntegrand { at: b });
        }
        kronrod += WGK[i] * (fa + fb);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (fa + fb);
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

/// ∫_lo^hi f with the points of `breaks` inside (lo, hi) used as initial
/// panel boundaries.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadratureResult, QuadratureError> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(QuadratureError::InvalidInterval { lo, hi });
    }
    if lo == hi {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
            truncated_at: None,
            tail_bound: None,
        });
    }
    let mut cuts: Vec<f64> = std::iter::once(lo)
        .chain(breaks.iter().copied().filter(|&b| b > lo && b < hi))
        .chain(std::iter::once(hi))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1])?;
        evaluations += 15;
        heap.push(Panel {
            lo: w[0],
            hi: w[1],
            value: v,
            error: e,
        });
    }
    loop {
        let (value, error) = totals(&heap);
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadratureResult {
                value,
                abs_error_estimate: error,
                evaluations,
                truncated_at: None,
                tail_bound: None,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => unreachable!("heap holds at least one panel"),
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if evaluations + 30 > opts.max_evals || mid <= worst.lo || mid >= worst.hi {
            heap.push(worst);
            let (value, error) = totals(&heap);
            return Err(QuadratureError::QuadratureFailure {
                value,
                error,
                evaluations,
            });
        }
        for (a, b) in [(worst.lo, mid), (mid, worst.hi)] {
            let (v, e) = gk15(&f, a, b)?;
            heap.push(Panel {
                lo: a,
                hi: b,
                value: v,
                error: e,
            });
        }
        evaluations += 30;
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut v = CompensatedSum::new();
    let mut e = 0.0;
    for p in heap.iter() {
        v.add(p.value);
        e += p.error;
    }
    (v.value(), e)
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_m.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Panels on [lo, hi] refined geometrically (ratio `ratio`) toward the points
/// in `focus`, starting from width `first`.
pub fn graded_panels(lo: f64, hi: f64, focus: &[f64], first: f64, ratio: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![lo, hi];
    for &p in focus {
        if p < lo || p > hi {
            continue;
        }
        cuts.push(p);
        let mut d = first;
        while p + d < hi {
            cuts.push(p + d);
            d *= ratio;
        }
        let mut d = first;
        while p - d > lo {
            cuts.push(p - d);
            d *= ratio;
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// One-dimensional rule: nodes and weights from Gauss–Legendre of order `m`
/// on every panel.
pub fn composite_rule(panels: &[(f64, f64)], m: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(m);
    let mut out = Vec::with_capacity(panels.len() * m);
    for &(a, b) in panels {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            out.push((c + h * xi, h * wi));
        }
    }
    out
}

/// Tensor-product sum of `f` over per-dimension rules, innermost dimension last.
pub fn tensor_sum<F: FnMut(&[f64]) -> f64>(rules: &[Vec<(f64, f64)>], mut f: F) -> (f64, usize) {
    let d = rules.len();
    let mut point = vec![0.0; d];
    let mut acc = CompensatedSum::new();
    let mut count = 0;
    fn rec<F: FnMut(&[f64]) -> f64>(
        level: usize,
        weight: f64,
        rules: &[Vec<(f64, f64)>],
        point: &mut [f64],
        f: &mut F,
        acc: &mut CompensatedSum,
        count: &mut usize,
    ) {
        if level == rules.len() {
            acc.add(weight * f(point));
            *count += 1;
            return;
        }
        for &(x, w) in &rules[level] {
            point[level] = x;
            rec(level + 1, weight * w, rules, point, f, acc, count);
        }
    }
    if d == 0 {
        return (f(&point), 1);
    }
    rec(0, 1.0, rules, &mut point, &mut f, &mut acc, &mut count);
    (acc.value(), count)
}
