//! Deterministic scans that produce the recorded constants.
//!
//! Every scan is a fixed grid, so rerunning it reproduces the same numbers
//! bit for bit; the golden file stores them rounded outward.

use serde::{Deserialize, Serialize};

use crate::gamma_weight::{log_q_exact, log_q_stirling};
use crate::integrals::{
    box_bound, box_widening_correction, c_alpha_integral, kernel_sum, local_sum, lower_bound_sum,
    CAlphaOptions, IntegralError, LatticeOptions, WeightMode,
};
use crate::params::{AlphaParams, BetaParams};
use crate::polytope::{point_from_t, YVector};
use crate::second_moment::{smoothed_lower_bound, MomentError, MomentWindow, SmoothWeight};

/// Gap scales 10^{k/2}, k = 0..=8.
pub fn gamma_scales() -> Vec<f64> {
    (0..=8).map(|k| 10f64.powf(0.5 * k as f64)).collect()
}

/// Gap scales 1, 3, 10, …, 1000 used by the lattice scans.
pub fn lattice_scales() -> Vec<f64> {
    vec![1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0]
}

/// Relative gap shapes: equal, alternating, increasing.
pub fn gap_patterns(n: usize) -> Vec<Vec<f64>> {
    vec![
        vec![1.0; n],
        (0..n).map(|j| if j % 2 == 0 { 1.0 } else { 2.0 }).collect(),
        (0..n).map(|j| (j + 1) as f64 / n as f64).collect(),
    ]
}

/// Interlacing β for α built from gaps y, placed by zonotope coordinates t.
pub fn interlacing_beta(y: &[f64], t: &[f64]) -> Result<BetaParams, IntegralError> {
    if y.len() == 1 {
        return Ok(BetaParams::new(&[0.0])?);
    }
    let x = point_from_t(t, &YVector::new(y)?)?;
    Ok(BetaParams::from_gaps(x.values())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanStat {
    pub cases: usize,
    pub min: f64,
    pub max: f64,
    /// (scale, largest value at that scale) in increasing scale.
    pub by_scale: Vec<(f64, f64)>,
}

impl ScanStat {
    fn new() -> Self {
        Self {
            cases: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            by_scale: Vec::new(),
        }
    }

    fn push(&mut self, scale: f64, v: f64) {
        self.cases += 1;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        match self.by_scale.iter_mut().find(|(s, _)| *s == scale) {
            Some(e) => e.1 = e.1.max(v),
            None => {
                self.by_scale.push((scale, v));
                self.by_scale.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
        }
    }
}

/// |ln q_exact − ln q_stirling| over patterns × scales × β placements × t.
///
/// t runs over both ends and the midpoint of I_M, a point just off a
/// breakpoint, and a point well outside I_M.
pub fn scan_gamma_weight(n: usize) -> Result<ScanStat, IntegralError> {
    let mut stat = ScanStat::new();
    let placements = [vec![0.5; n], (0..n).map(|j| [0.1, 0.9, 0.3][j % 3]).collect::<Vec<_>>()];
    for pattern in gap_patterns(n) {
        for scale in gamma_scales() {
            let y: Vec<f64> = pattern.iter().map(|p| p * scale).collect();
            let alpha = AlphaParams::from_gaps(&y)?;
            for tp in &placements {
                let beta = interlacing_beta(&y, tp)?;
                let prof = crate::exponent::ExponentProfile::new(&alpha, &beta)?;
                let im = prof.median_interval();
                let bp = prof.breakpoints()[0];
                for t in [im.lo, im.midpoint(), im.hi, bp + 0.3, im.lo - 5.0] {
                    let exact = log_q_exact(t, &alpha, &beta)?.log_value;
                    let stirling = log_q_stirling(t, &alpha, &beta)?;
                    stat.push(scale, (exact - stirling).abs());
                }
            }
        }
    }
    Ok(stat)
}

/// Σ_{|m|≤X} kernel / log bound on a 10 × 10 × 10 grid of (a, b, X).
pub fn scan_kernel_sum() -> Result<ScanStat, IntegralError> {
    let ab = [-1000.0, -100.0, -10.0, -1.0, 0.0, 0.5, 3.0, 30.0, 300.0, 3000.0];
    let xs = [0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0];
    let mut stat = ScanStat::new();
    for &a in &ab {
        for &b in &ab {
            for &x in &xs {
                stat.push(x, kernel_sum(a, b, x)?.ratio);
            }
        }
    }
    Ok(stat)
}

/// Widening values K at which c(K) is recorded.
pub const BOX_K: [f64; 4] = [1.0, 2.0, 5.0, 10.0];

/// Largest box product ratio value / (4 + c(K))^n over n ≤ 6, patterns and
/// lattice scales.
pub fn scan_box(k: f64, correction: f64) -> Result<ScanStat, IntegralError> {
    let mut stat = ScanStat::new();
    for n in 1..=6 {
        for pattern in gap_patterns(n) {
            for scale in lattice_scales() {
                let y: Vec<f64> = pattern.iter().map(|p| p * scale).collect();
                let b = box_bound(&AlphaParams::from_gaps(&y)?, k)?;
                stat.push(scale, b.value / (4.0 + correction).powi(n as i32));
            }
        }
    }
    Ok(stat)
}

/// Scales for the local sum, including gaps below 1.
pub fn local_scales() -> Vec<f64> {
    let mut s = vec![0.01, 0.1, 0.5];
    s.extend(lattice_scales());
    s
}

/// local_sum with K = 1 over patterns and scales; non-uniform patterns stop
/// at 300 for n = 3 to bound the lattice size.
pub fn scan_local_sum(n: usize) -> Result<ScanStat, IntegralError> {
    let mut stat = ScanStat::new();
    for (i, pattern) in gap_patterns(n).into_iter().enumerate() {
        for scale in local_scales() {
            if n >= 3 && i > 0 && scale > 300.0 {
                continue;
            }
            let y: Vec<f64> = pattern.iter().map(|p| p * scale).collect();
            let s = local_sum(&AlphaParams::from_gaps(&y)?, 1.0, LatticeOptions::default())?;
            stat.push(scale, s.value);
        }
    }
    Ok(stat)
}

/// lower_bound_sum over patterns and scales with every gap ≥ 1.
pub fn scan_lower_sum(n: usize) -> Result<ScanStat, IntegralError> {
    let mut stat = ScanStat::new();
    for pattern in gap_patterns(n) {
        let pmin = pattern.iter().copied().fold(f64::INFINITY, f64::min);
        for scale in lattice_scales() {
            let y: Vec<f64> = pattern.iter().map(|p| p * scale / pmin).collect();
            let s = lower_bound_sum(&AlphaParams::from_gaps(&y)?, 50_000_000)?;
            stat.push(scale, s.value);
        }
    }
    Ok(stat)
}

/// Windows with T ≥ 30 on which ε is calibrated.
pub fn smoothed_windows() -> Vec<(f64, f64)> {
    vec![
        (100.0, 30.0),
        (500.0, 40.0),
        (1000.0, 30.0),
        (1000.0, 50.0),
        (2500.0, 35.0),
        (4000.0, 30.0),
        (5000.0, 60.0),
    ]
}

/// Smallest smoothed / T over [`smoothed_windows`].
pub fn scan_smoothed() -> Result<ScanStat, MomentError> {
    let w = SmoothWeight::bump();
    let mut stat = ScanStat::new();
    for (t0, t) in smoothed_windows() {
        let s = smoothed_lower_bound(&MomentWindow::new(t0, t)?, &w)?;
        stat.push(t, s.value / t);
    }
    Ok(stat)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CAlphaEntry {
    pub n: usize,
    pub gaps: Vec<f64>,
    pub stirling: f64,
    pub exact: f64,
    pub ratio: f64,
}

/// Gap scales for the C_n(α) table.
pub fn c_alpha_scales() -> Vec<f64> {
    vec![0.5, 1.0, 3.0, 10.0, 30.0, 100.0]
}

/// C_n(α) in both modes for n = 1, 2, 3 on equal gaps.
pub fn c_alpha_table() -> Result<Vec<CAlphaEntry>, IntegralError> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for scale in c_alpha_scales() {
            let gaps = vec![scale; n];
            let alpha = AlphaParams::from_gaps(&gaps)?;
            let s = c_alpha_integral(&alpha, WeightMode::Stirling, CAlphaOptions::default())?;
            let e = c_alpha_integral(&alpha, WeightMode::Exact, CAlphaOptions::default())?;
            out.push(CAlphaEntry {
                n,
                gaps,
                stirling: s.result.value,
                exact: e.result.value,
                ratio: e.result.value / s.result.value,
            });
        }
    }
    Ok(out)
}

/// c(K) for each K in [`BOX_K`].
pub fn box_corrections() -> Vec<(f64, f64)> {
    BOX_K.iter().map(|&k| (k, box_widening_correction(k))).collect()
}
