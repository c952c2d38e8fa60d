//! Recorded constants: the golden file, its loader, and its regeneration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{
    box_corrections, c_alpha_table, scan_gamma_weight, scan_kernel_sum, scan_local_sum,
    scan_lower_sum, scan_smoothed, smoothed_windows, CAlphaEntry, ScanStat,
};
use crate::integrals::IntegralError;
use crate::second_moment::MomentError;

pub const GOLDEN_SCHEMA: &str = "maassnorm-golden/1";

/// Environment variable overriding [`default_golden_path`].
pub const GOLDEN_ENV: &str = "MAASSNORM_GOLDEN";

/// Allowed relative drift of a recomputed scan statistic.
pub const REGRESSION_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum GoldenError {
    #[error("cannot read golden file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed golden file: {0}")]
    Format(#[from] serde_json::Error),
    #[error("golden schema {found} is not {GOLDEN_SCHEMA}")]
    Schema { found: String },
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// A bound and the scan statistic it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recorded {
    /// The asserted constant, rounded outward from `observed`.
    pub value: f64,
    pub observed: f64,
    pub cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: usize,
    #[serde(flatten)]
    pub recorded: Recorded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerK {
    pub k: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenConstants {
    pub schema: String,
    pub provenance: Provenance,
    /// K_n: |ln q_exact − ln q_stirling| ≤ K_n.
    pub gamma_weight_k: Vec<PerN>,
    /// C: kernel_sum ≤ C (log(2+|a|+X) + log(2+|b|+X)).
    pub kernel_sum_c: Recorded,
    /// c(K) in box_bound ≤ (4 + c(K))^n.
    pub box_widening: Vec<PerK>,
    /// C_n: local_sum (K = 1) ≤ C_n.
    pub local_sum_c: Vec<PerN>,
    /// c_n: lower_bound_sum ≥ c_n.
    pub lower_sum_c: Vec<PerN>,
    /// Smallest smoothed / T over windows with T ≥ `smoothed_min_t`.
    pub smoothed_ratio: Recorded,
    /// ε: smoothed ≥ T (1 − ε), from the rounded-down ratio.
    pub smoothed_epsilon: f64,
    pub smoothed_min_t: f64,
    /// Reported only.
    pub c_alpha: Vec<CAlphaEntry>,
}

fn decade(v: f64) -> f64 {
    10f64.powi(2 - v.abs().log10().floor() as i32)
}

/// Rounds up to three significant digits.
pub fn round_up(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let s = decade(v);
    (v * s).ceil() / s
}

/// Rounds down to three significant digits.
pub fn round_down(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let s = decade(v);
    (v * s).floor() / s
}

impl Recorded {
    pub fn upper(stat: &ScanStat) -> Self {
        Self {
            value: round_up(stat.max),
            observed: stat.max,
            cases: stat.cases,
        }
    }

    pub fn lower(stat: &ScanStat) -> Self {
        Self {
            value: round_down(stat.min),
            observed: stat.min,
            cases: stat.cases,
        }
    }

    /// |recomputed − observed| ≤ 5% of observed.
    pub fn within_regression(&self, recomputed: f64) -> bool {
        (recomputed - self.observed).abs() <= REGRESSION_TOLERANCE * self.observed.abs()
    }
}

pub const GAMMA_N: std::ops::RangeInclusive<usize> = 1..=6;
pub const LATTICE_N: std::ops::RangeInclusive<usize> = 1..=3;

impl GoldenConstants {
    /// Runs every calibration scan.
    pub fn generate() -> Result<Self, GoldenError> {
        let gamma_weight_k = GAMMA_N
            .map(|n| {
                Ok(PerN {
                    n,
                    recorded: Recorded::upper(&scan_gamma_weight(n)?),
                })
            })
            .collect::<Result<Vec<_>, IntegralError>>()?;
        let local_sum_c = LATTICE_N
            .map(|n| {
                Ok(PerN {
                    n,
                    recorded: Recorded::upper(&scan_local_sum(n)?),
                })
            })
            .collect::<Result<Vec<_>, IntegralError>>()?;
        let lower_sum_c = LATTICE_N
            .map(|n| {
                Ok(PerN {
                    n,
                    recorded: Recorded::lower(&scan_lower_sum(n)?),
                })
            })
            .collect::<Result<Vec<_>, IntegralError>>()?;
        let smoothed = Recorded::lower(&scan_smoothed()?);
        Ok(Self {
            schema: GOLDEN_SCHEMA.into(),
            provenance: Provenance {
                generator: "maassnorm update-golden".into(),
                version: env!("CARGO_PKG_VERSION").into(),
            },
            gamma_weight_k,
            kernel_sum_c: Recorded::upper(&scan_kernel_sum()?),
            box_widening: box_corrections()
                .into_iter()
                .map(|(k, c)| PerK { k, value: round_up(c) })
                .collect(),
            local_sum_c,
            lower_sum_c,
            smoothed_epsilon: (1.0 - smoothed.value).max(0.0),
            smoothed_ratio: smoothed,
            smoothed_min_t: smoothed_windows()
                .iter()
                .map(|w| w.1)
                .fold(f64::INFINITY, f64::min),
            c_alpha: c_alpha_table()?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, GoldenError> {
        let text = std::fs::read_to_string(path).map_err(|source| GoldenError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let g: Self = serde_json::from_str(&text)?;
        if g.schema != GOLDEN_SCHEMA {
            return Err(GoldenError::Schema { found: g.schema });
        }
        Ok(g)
    }

    /// Loads from `path`, else $MAASSNORM_GOLDEN, else the in-repo file.
    pub fn load_default(path: Option<&Path>) -> Result<Self, GoldenError> {
        match path {
            Some(p) => Self::load(p),
            None => Self::load(&default_golden_path()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), GoldenError> {
        std::fs::write(path, self.to_json()).map_err(|source| GoldenError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    fn per_n(list: &[PerN], n: usize) -> Option<&Recorded> {
        list.iter().find(|e| e.n == n).map(|e| &e.recorded)
    }

    pub fn gamma_k(&self, n: usize) -> Option<&Recorded> {
        Self::per_n(&self.gamma_weight_k, n)
    }

    pub fn local_c(&self, n: usize) -> Option<&Recorded> {
        Self::per_n(&self.local_sum_c, n)
    }

    pub fn lower_c(&self, n: usize) -> Option<&Recorded> {
        Self::per_n(&self.lower_sum_c, n)
    }

    pub fn box_c(&self, k: f64) -> Option<f64> {
        self.box_widening.iter().find(|e| e.k == k).map(|e| e.value)
    }
}

/// $MAASSNORM_GOLDEN if set, else `golden/constants.json` in this crate.
pub fn default_golden_path() -> PathBuf {
    std::env::var_os(GOLDEN_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("golden/constants.json"))
}
