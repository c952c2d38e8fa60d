//! Gamma-factor weights in log space.
//!
//! q(t, α, β) is a ratio of products of |Γ| at arguments on the lines
//! Re = 1/4 and Re = 1/2. Everything here returns natural logs; a weight too
//! small for the double range is reported through [`LogWeight::underflow_flag`]
//! rather than rounded to zero.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponent::{lower_diagonal, upper_diagonal, ExponentProfile};
use crate::numeric::CompensatedSum;
use crate::params::{check_dimensions, AlphaParams, BetaParams, ParamError};
use crate::special::ln_abs_gamma;

/// Logs below this are flagged: exp of anything smaller is a subnormal or
/// close to it once multiplied by the polynomial factors.
pub const UNDERFLOW_LOG: f64 = -250.0;

/// Relative slack used when testing admissibility and t ∈ I_M.
const PRECONDITION_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("non-finite log-gamma value at argument {re} + {im}i")]
    NonFinite { re: f64, im: f64 },
    #[error("parameters are not admissible: {0}")]
    NotAdmissible(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogWeight {
    pub log_value: f64,
    pub underflow_flag: bool,
}

impl LogWeight {
    pub fn from_log(log_value: f64) -> Self {
        Self {
            log_value,
            underflow_flag: log_value < UNDERFLOW_LOG,
        }
    }

    /// The weight is exactly zero.
    pub fn zero() -> Self {
        Self {
            log_value: f64::NEG_INFINITY,
            underflow_flag: true,
        }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

fn checked_ln_gamma(re: f64, im: f64) -> Result<f64, WeightError> {
    let v = ln_abs_gamma(Complex64::new(re, im));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(WeightError::NonFinite { re, im })
    }
}

/// Σ_{k<l} 2 ln|Γ(1/2 + i (v_k − v_l)/2)|
fn pair_denominator(v: &[f64]) -> Result<f64, WeightError> {
    let mut acc = CompensatedSum::new();
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            acc.add(2.0 * checked_ln_gamma(0.5, 0.5 * (a - b))?);
        }
    }
    Ok(acc.value())
}

/// ln q(t, α, β) from the gamma functions themselves.
pub fn log_q_exact(t: f64, alpha: &AlphaParams, beta: &BetaParams) -> Result<LogWeight, WeightError> {
    check_dimensions(alpha, beta)?;
    let mut acc = CompensatedSum::new();
    for a in alpha.values() {
        for b in beta.values() {
            acc.add(2.0 * checked_ln_gamma(0.25, 0.5 * (t + a + b))?);
        }
    }
    acc.add(-pair_denominator(alpha.values())?);
    acc.add(-pair_denominator(beta.values())?);
    Ok(LogWeight::from_log(acc.value()))
}

/// −(π/2) r(t) − ½ Σ ln(1 + |t + α_k + β_l|)
pub fn log_q_stirling(t: f64, alpha: &AlphaParams, beta: &BetaParams) -> Result<f64, ParamError> {
    let prof = ExponentProfile::new(alpha, beta)?;
    Ok(stirling_from_profile(&prof, t))
}

pub(crate) fn stirling_from_profile(prof: &ExponentProfile, t: f64) -> f64 {
    -0.5 * PI * prof.r(t) + prof.rational_log(t)
}

/// ∏_{k<l} (1 + |λ_k − λ_l|)
pub fn mu_weight(lambda: &[f64]) -> f64 {
    log_mu_weight(lambda).exp()
}

/// ln μ(λ), summed in log space.
pub fn log_mu_weight(lambda: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (i, a) in lambda.iter().enumerate() {
        for b in &lambda[i + 1..] {
            acc.add((a - b).abs().ln_1p());
        }
    }
    acc.value()
}

/// ln ∏_{k<l} |Γ((1 + iδ)/2)|² / |Γ(iδ/2)|² with δ = β_k − β_l.
///
/// Uses |Γ(1/2 + iy)|² = π / cosh(πy) and |Γ(iy)|² = π / (y sinh(πy)), so each
/// factor is y tanh(πy) with y = δ/2. A zero gap gives the zero weight.
pub fn spectral_density_exact(beta: &BetaParams) -> LogWeight {
    let v = beta.values();
    let mut acc = CompensatedSum::new();
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            let y = 0.5 * (a - b).abs();
            if y == 0.0 {
                return LogWeight::zero();
            }
            acc.add(y.ln() + (PI * y).tanh().ln());
        }
    }
    LogWeight::from_log(acc.value())
}

/// Same quantity as [`spectral_density_exact`] evaluated through log-gamma.
pub fn spectral_density_via_gamma(beta: &BetaParams) -> LogWeight {
    let v = beta.values();
    let mut acc = CompensatedSum::new();
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            let y = 0.5 * (a - b);
            if y == 0.0 {
                return LogWeight::zero();
            }
            acc.add(2.0 * ln_abs_gamma(Complex64::new(0.5, y)));
            acc.add(-2.0 * ln_abs_gamma(Complex64::new(0.0, y)));
        }
    }
    LogWeight::from_log(acc.value())
}

fn scale_of(alpha: &AlphaParams, beta: &BetaParams) -> f64 {
    alpha
        .values()
        .iter()
        .chain(beta.values())
        .fold(1.0_f64, |m, v| m.max(v.abs()))
}

/// Admissibility with relative slack; returns the reason on failure.
pub(crate) fn require_admissible(alpha: &AlphaParams, beta: &BetaParams) -> Result<f64, WeightError> {
    check_dimensions(alpha, beta)?;
    let slack = PRECONDITION_SLACK * scale_of(alpha, beta);
    let min_upper = upper_diagonal(alpha, beta)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let max_lower = lower_diagonal(alpha, beta)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if min_upper + slack < max_lower {
        return Err(WeightError::NotAdmissible(format!(
            "min upper-diagonal sum {min_upper} < max lower-diagonal sum {max_lower}"
        )));
    }
    Ok(slack)
}

/// ln of μ(β)^{-1} ∏_{k+l ∈ {n+1, n+2}} (1 + |t + α_k + β_l|)^{-1/2}.
///
/// Requires admissible (α, β) and t in the median interval.
pub fn q_upper_surrogate(t: f64, alpha: &AlphaParams, beta: &BetaParams) -> Result<f64, WeightError> {
    let slack = require_admissible(alpha, beta)?;
    let im = ExponentProfile::new(alpha, beta)?.median_interval();
    if t < im.lo - slack || t > im.hi + slack {
        return Err(WeightError::NotAdmissible(format!(
            "t = {t} outside median interval [{}, {}]",
            im.lo, im.hi
        )));
    }
    let mut acc = CompensatedSum::new();
    acc.add(-log_mu_weight(beta.values()));
    for s in upper_diagonal(alpha, beta)
        .into_iter()
        .chain(lower_diagonal(alpha, beta))
    {
        acc.add(-0.5 * (t + s).abs().ln_1p());
    }
    Ok(acc.value())
}

/// ln of ∏_{S₊} (1 + |s − max S₋|)^{-1/2} ∏_{S₋} (1 + |s − min S₊|)^{-1/2}.
pub fn q_lower_surrogate(alpha: &AlphaParams, beta: &BetaParams) -> Result<f64, WeightError> {
    require_admissible(alpha, beta)?;
    let split = ExponentProfile::new(alpha, beta)?.sign_split();
    let (lo, hi) = (split.max_minus(), split.min_plus());
    let mut acc = CompensatedSum::new();
    for s in &split.s_plus {
        acc.add(-0.5 * (s - lo).abs().ln_1p());
    }
    for s in &split.s_minus {
        acc.add(-0.5 * (s - hi).abs().ln_1p());
    }
    Ok(acc.value())
}

/// ln |G_j^*(1/2 + iτ)| = −n ln 2 − n(n+1)/4 ln π + Σ ln|Γ(1/4 + i(τ − α_k + β_l)/2)|.
pub fn stade_gj_star_log(s_imag: f64, alpha: &AlphaParams, beta: &BetaParams) -> Result<LogWeight, WeightError> {
    check_dimensions(alpha, beta)?;
    let n = beta.n() as f64;
    let mut acc = CompensatedSum::new();
    acc.add(-n * LN_2);
    acc.add(-0.25 * n * (n + 1.0) * PI.ln());
    for a in alpha.values() {
        for b in beta.values() {
            acc.add(checked_ln_gamma(0.25, 0.5 * (s_imag - a + b))?);
        }
    }
    Ok(LogWeight::from_log(acc.value()))
}

/// ln |G_{iα, iα₂}(1 + iτ)| for two GL(n+1) parameter vectors.
///
/// On Re s = 1 the powers of π cancel in magnitude, leaving
/// b ln 2 − ln|Γ((n+1)s/2)| − (normalising products) + Σ_{j,k} ln|Γ((s + iα_j − iα₂_k)/2)|
/// with b = n(n+1)(n+2)/6.
pub fn stade_glnn_log(s_imag: f64, alpha: &AlphaParams, alpha2: &AlphaParams) -> Result<LogWeight, WeightError> {
    if alpha.n() != alpha2.n() {
        return Err(ParamError::DimensionMismatch {
            expected: alpha.n() + 1,
            got: alpha2.n() + 1,
        }
        .into());
    }
    let n = alpha.n() as f64;
    let b = n * (n + 1.0) * (n + 2.0) / 6.0;
    let mut acc = CompensatedSum::new();
    acc.add(b * LN_2);
    acc.add(-checked_ln_gamma(0.5 * (n + 1.0), 0.5 * (n + 1.0) * s_imag)?);
    acc.add(-0.5 * pair_denominator(alpha.values())?);
    acc.add(-0.5 * pair_denominator(alpha2.values())?);
    for aj in alpha.values() {
        for ak in alpha2.values() {
            acc.add(checked_ln_gamma(0.5, 0.5 * (s_imag + aj - ak))?);
        }
    }
    Ok(LogWeight::from_log(acc.value()))
}

/// Value of [`stade_glnn_log`] at τ = 0 with α₂ = α, which does not depend on α:
/// b ln 2 − ln Γ((n+1)/2) + (n+1)/2 · ln π.
pub fn stade_glnn_diagonal_constant(n: usize) -> f64 {
    let n = n as f64;
    let b = n * (n + 1.0) * (n + 2.0) / 6.0;
    b * LN_2 - ln_abs_gamma(Complex64::new(0.5 * (n + 1.0), 0.0)) + 0.5 * (n + 1.0) * PI.ln()
}
