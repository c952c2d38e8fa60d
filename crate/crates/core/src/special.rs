//! Complex log-gamma.
//!
//! [`ln_gamma`] is the production route: push the argument up by the
//! recurrence until |z| ≥ 10, then sum the Stirling series. [`lanczos`] is an
//! independent rational approximation kept as a cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;

/// ½ ln(2π)
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k − 1)) for k = 1..=10.
const STIRLING_COEFFS: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const SHIFT_RADIUS: f64 = 10.0;

/// ln Γ(z) for complex z away from the poles.
///
/// The real part is ln|Γ(z)|. The imaginary part is a continuous branch of
/// arg Γ(z) but is not reduced to the principal value.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        // reflection: Γ(z) Γ(1−z) = π / sin(πz)
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut z = z;
    let mut correction = Complex64::new(0.0, 0.0);
    while z.norm() < SHIFT_RADIUS {
        correction += z.ln();
        z += 1.0;
    }
    stirling_series(z) - correction
}

/// ln sin(πz) without overflow for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin(πz) = e^{−iπz} (1 − e^{2iπz}) / (2i), and |e^{2iπz}| ≤ 1 for Im z ≥ 0
    let i = Complex64::new(0.0, 1.0);
    let small = (i * z * (2.0 * PI)).exp();
    -i * z * PI + (Complex64::new(1.0, 0.0) - small).ln() - Complex64::new(2.0, 0.0).ln() - i * (PI / 2.0)
}

fn stirling_series(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv_sq = inv * inv;
    let mut term = inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING_COEFFS {
        let next = term * c;
        series += next;
        if next.norm() < 1e-17 * series.norm() {
            break;
        }
        term *= inv_sq;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_TWO_PI + series
}

/// ln|Γ(z)|.
#[inline]
pub fn ln_abs_gamma(z: Complex64) -> f64 {
    ln_gamma(z).re
}

/// 2 ln|Γ(σ + i y)|, the log of the squared magnitude.
#[inline]
pub fn ln_gamma_sq(sigma: f64, y: f64) -> f64 {
    2.0 * ln_abs_gamma(Complex64::new(sigma, y))
}

/// Lanczos approximation (g = 7, nine coefficients) of ln Γ(z).
///
/// Accurate to roughly 1e-15 relative on Re z ≥ 1/2; uses reflection below.
pub fn lanczos(z: Complex64) -> Complex64 {
    const G: f64 = 7.0;
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z.re < 0.5 {
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - lanczos(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(COEFFS[0], 0.0);
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += *c / (z + i as f64);
    }
    let t = z + G + 0.5;
    HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_4;

    #[test]
    fn real_values() {
        let lg = |x: f64| ln_abs_gamma(Complex64::new(x, 0.0));
        assert!((lg(1.0)).abs() < 1e-14);
        assert!((lg(2.0)).abs() < 1e-14);
        assert!((lg(0.5) - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((lg(0.25) - GAMMA_QUARTER.ln()).abs() < 1e-14);
        assert!((lg(10.0) - 362_880.0_f64.ln()).abs() < 1e-13);
        assert!((lg(171.5) - lanczos(Complex64::new(171.5, 0.0)).re).abs() < 1e-11);
    }

    #[test]
    fn closed_forms_on_vertical_lines() {
        // |Γ(1/2 + iy)|² = π / cosh(πy),  |Γ(iy)|² = π / (y sinh(πy))
        for &y in &[0.1, 0.5, 1.0, 3.7, 20.0, 150.0] {
            let lhs = ln_gamma_sq(0.5, y);
            let rhs = PI.ln() - (PI * y).cosh().ln();
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()), "y = {y}");
            let lhs = ln_gamma_sq(0.0, y);
            let rhs = PI.ln() - y.ln() - (PI * y).sinh().ln();
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()), "y = {y}");
        }
    }

    #[test]
    fn recurrence_holds() {
        for &(x, y) in &[(0.25, 0.3), (0.5, -7.0), (3.2, 1.1), (0.25, 1e4)] {
            let z = Complex64::new(x, y);
            let lhs = ln_gamma(z + 1.0).re;
            let rhs = ln_gamma(z).re + z.norm().ln();
            assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()), "z = {z}");
        }
    }

    #[test]
    fn agrees_with_lanczos_across_the_plane() {
        let mut worst: f64 = 0.0;
        for &x in &[0.0, 0.25, 0.5, 1.0, 2.5, 7.0] {
            for &y in &[-500.0, -33.3, -2.0, -0.1, 0.1, 1.0, 4.5, 12.0, 77.0, 1e3, 1e5] {
                let z = Complex64::new(x, y);
                let a = ln_abs_gamma(z);
                let b = lanczos(z).re;
                worst = worst.max((a - b).abs() / (1.0 + a.abs()));
            }
        }
        assert!(worst < 1e-13, "worst relative disagreement {worst:e}");
    }

    #[test]
    fn negative_real_part_uses_reflection() {
        let z = Complex64::new(-2.5, 0.7);
        let direct = ln_gamma(z).re;
        let via_recurrence = ln_gamma(z + 3.0).re
            - (z.norm().ln() + (z + 1.0).norm().ln() + (z + 2.0).norm().ln());
        assert!((direct - via_recurrence).abs() < 1e-12);
    }
}
