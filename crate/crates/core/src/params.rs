//! Parameter containers for the spectral data.
//!
//! `AlphaParams` holds the n+1 parameters of the fixed form, `BetaParams` the
//! n parameters of the spectral point being summed over. Both are kept sorted
//! non-increasing and centered to sum zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::compensated_sum;

/// Absolute tolerance on the zero-sum constraint, per unit of magnitude.
pub const ZERO_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("need at least {min} entries, got {got}")]
    EmptyInput { min: usize, got: usize },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero-sum constraint violated: residual {residual:e}")]
    ZeroSum { residual: f64 },
    #[error("cannot parse parameter list: {0}")]
    Parse(String),
}

/// Sort non-increasing, subtract the mean, and report the applied shift.
fn center_sorted(values: &[f64], min_len: usize) -> Result<(Vec<f64>, f64), ParamError> {
    if values.len() < min_len {
        return Err(ParamError::EmptyInput {
            min: min_len,
            got: values.len(),
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(ParamError::NonFinite { index });
    }
    let len = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mean = compensated_sum(sorted.iter().copied()) / len;
    for v in sorted.iter_mut() {
        *v -= mean;
    }
    // one refinement pass for the rounding left by the subtraction
    let residual = compensated_sum(sorted.iter().copied()) / len;
    if residual != 0.0 {
        for v in sorted.iter_mut() {
            *v -= residual;
        }
    }

    let scale = sorted.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let total = compensated_sum(sorted.iter().copied());
    if total.abs() > ZERO_SUM_TOL * scale {
        return Err(ParamError::ZeroSum { residual: total });
    }
    Ok((sorted, mean + residual))
}

/// Parameters α_1 ≥ … ≥ α_{n+1} of the fixed form, summing to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaParams {
    values: Vec<f64>,
    shift: f64,
}

impl AlphaParams {
    /// Sorted, recentered copy of `values`. Needs at least two entries.
    pub fn new(values: &[f64]) -> Result<Self, ParamError> {
        let (values, shift) = center_sorted(values, 2)?;
        Ok(Self { values, shift })
    }

    /// Builds α from its consecutive gaps `y_j = α_{n+1-j} − α_{n+2-j}`.
    pub fn from_gaps(y: &[f64]) -> Result<Self, ParamError> {
        let n = y.len();
        if n == 0 {
            return Err(ParamError::EmptyInput { min: 1, got: 0 });
        }
        // α_{n+1} = 0, α_{n+1-j} = α_{n+2-j} + y_j, then recenter.
        let mut values = vec![0.0; n + 1];
        for j in 1..=n {
            values[n - j] = values[n + 1 - j] + y[j - 1];
        }
        Self::new(&values)
    }

    /// The rank parameter n (α has n+1 entries).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// 1-based accessor α_k.
    #[inline]
    pub fn at(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    /// The mean that was subtracted on construction.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Gaps y_j = α_{n+1-j} − α_{n+2-j}, j = 1..n.
    pub fn gaps_y(&self) -> Vec<f64> {
        let n = self.n();
        (1..=n).map(|j| self.at(n + 1 - j) - self.at(n + 2 - j)).collect()
    }

    /// (−α_{n+1}, …, −α_1), the parameters of the dual form.
    pub fn dual(&self) -> Self {
        let values: Vec<f64> = self.values.iter().rev().map(|v| -v).collect();
        Self {
            values,
            shift: -self.shift,
        }
    }
}

/// Parameters β_1 ≥ … ≥ β_n of a spectral point, summing to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    values: Vec<f64>,
    shift: f64,
}

impl BetaParams {
    pub fn new(values: &[f64]) -> Result<Self, ParamError> {
        let (values, shift) = center_sorted(values, 1)?;
        Ok(Self { values, shift })
    }

    /// Builds β from its gaps `x_j = β_j − β_{j+1}`, j = 1..n−1.
    pub fn from_gaps(x: &[f64]) -> Result<Self, ParamError> {
        let n = x.len() + 1;
        let mut values = vec![0.0; n];
        for j in (0..n - 1).rev() {
            values[j] = values[j + 1] + x[j];
        }
        Self::new(&values)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, l: usize) -> f64 {
        self.values[l - 1]
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Gaps x_j = β_j − β_{j+1}, j = 1..n−1.
    pub fn gaps_x(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[0] - w[1]).collect()
    }
}

/// Gaps y of α (free-function form).
pub fn gaps_y(alpha: &AlphaParams) -> Vec<f64> {
    alpha.gaps_y()
}

/// Gaps x of β (free-function form).
pub fn gaps_x(beta: &BetaParams) -> Vec<f64> {
    beta.gaps_x()
}

/// The (n+1)×n array with entry (k, l) = α_k + β_l.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairArray {
    pub entries: Vec<Vec<f64>>,
}

impl PairArray {
    /// True if every row and every column is non-increasing.
    pub fn is_monotone(&self) -> bool {
        let rows_ok = self
            .entries
            .iter()
            .all(|row| row.windows(2).all(|w| w[0] >= w[1]));
        let cols_ok = self.entries.windows(2).all(|pair| {
            pair[0]
                .iter()
                .zip(pair[1].iter())
                .all(|(upper, lower)| upper >= lower)
        });
        rows_ok && cols_ok
    }
}

pub fn check_dimensions(alpha: &AlphaParams, beta: &BetaParams) -> Result<(), ParamError> {
    if alpha.n() != beta.n() {
        return Err(ParamError::DimensionMismatch {
            expected: alpha.n(),
            got: beta.n(),
        });
    }
    Ok(())
}

pub fn pair_array(alpha: &AlphaParams, beta: &BetaParams) -> Result<PairArray, ParamError> {
    check_dimensions(alpha, beta)?;
    let entries = alpha
        .values()
        .iter()
        .map(|a| beta.values().iter().map(|b| a + b).collect())
        .collect();
    Ok(PairArray { entries })
}

/// Parses a parameter list given either as a JSON array (`[1, -1]`) or as a
/// comma-separated string (`1,-1`).
pub fn parse_values(text: &str) -> Result<Vec<f64>, ParamError> {
    let text = text.trim();
    if text.starts_with('[') {
        return serde_json::from_str::<Vec<f64>>(text).map_err(|e| ParamError::Parse(e.to_string()));
    }
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| ParamError::Parse(format!("{part:?}: {e}")))
        })
        .collect()
}
