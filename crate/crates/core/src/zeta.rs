//! ζ(1/2 + it) by Euler–Maclaurin summation.

use num_complex::Complex64;
use thiserror::Error;

/// Largest |t| accepted by [`zeta_critical`].
pub const ZETA_T_MAX: f64 = 1e5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZetaError {
    #[error("|t| = {t} exceeds the accuracy guard {ZETA_T_MAX}")]
    AccuracyGuard { t: f64 },
}

/// B_{2j} / (2j)! for j = 1..15.
const BERNOULLI_OVER_FACTORIAL: [f64; 15] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
    77683.0 / 14101100039391805440000.0,
    -236364091.0 / 1693824136731743669452800000.0,
    657931.0 / 186134520519971831808000000.0,
    -3392780147.0 / 37893265687455865519472640000000.0,
    1723168255201.0 / 759790291646040068357842010112000000.0,
];

/// ζ(s) for Re s > 0, s ≠ 1, with `terms` direct terms and the full
/// correction series.
pub fn zeta_em(s: Complex64, terms: usize) -> Complex64 {
    let n = terms as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..terms {
        acc += (-s * (k as f64).ln()).exp();
    }
    let n_pow = (-s * n.ln()).exp();
    acc += n_pow * n / (s - 1.0) + 0.5 * n_pow;
    // s(s+1)…(s+2j−2) N^{−s−2j+1}
    let mut rising = s * n_pow / n;
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            rising *= (s + m - 1.0) * (s + m) / (n * n);
        }
        acc += *c * rising;
    }
    acc
}

/// Number of direct terms used on the critical line at height t.
pub fn zeta_terms(t: f64) -> usize {
    (t.abs() / std::f64::consts::PI).ceil() as usize + 20
}

/// ζ(1/2 + it) for |t| ≤ [`ZETA_T_MAX`].
pub fn zeta_critical(t: f64) -> Result<Complex64, ZetaError> {
    if !(t.abs() <= ZETA_T_MAX) {
        return Err(ZetaError::AccuracyGuard { t });
    }
    Ok(zeta_em(Complex64::new(0.5, t), zeta_terms(t)))
}
