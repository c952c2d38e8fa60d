//! Mean values of ζ(1/2 + it) over a window [T0 − T, T0 + T], plain and
//! smoothed by a plateau bump.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::BoundCheck;
use crate::quadrature::{gauss_legendre, integrate, QuadOptions, QuadratureError, QuadratureResult};
use crate::zeta::{zeta_critical, ZetaError, ZETA_T_MAX};

/// Intervals in the tabulated bump profile.
pub const BUMP_TABLE_SIZE: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("invalid window T0 = {t0}, T = {t}")]
    InvalidWindow { t0: f64, t: f64 },
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentWindow {
    pub t0: f64,
    pub t: f64,
    /// (|T0| + T) / 2π, recorded only.
    pub conductor: f64,
}

impl MomentWindow {
    pub fn new(t0: f64, t: f64) -> Result<Self, MomentError> {
        if !(t > 0.0 && t.is_finite() && t0.is_finite()) {
            return Err(MomentError::InvalidWindow { t0, t });
        }
        if t0.abs() + t > ZETA_T_MAX {
            return Err(ZetaError::AccuracyGuard { t: t0.abs() + t }.into());
        }
        Ok(Self {
            t0,
            t,
            conductor: (t0.abs() + t) / (2.0 * std::f64::consts::PI),
        })
    }

    pub fn lo(&self) -> f64 {
        self.t0 - self.t
    }

    pub fn hi(&self) -> f64 {
        self.t0 + self.t
    }
}

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// w(x) = 1 on |x| ≤ 1/2, 0 on |x| ≥ 1: the indicator of [−3/4, 3/4]
/// convolved with the bump exp(−1/(1 − u²)) scaled to radius 1/4, raised to
/// `power`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothWeight {
    /// Normalized bump CDF at u_i = −1 + 2i / BUMP_TABLE_SIZE.
    cdf: Vec<f64>,
    norm: f64,
    power: i32,
    hat_zero: f64,
}

impl SmoothWeight {
    pub fn bump() -> Self {
        Self::with_power(1)
    }

    /// w² in place of w.
    pub fn squared() -> Self {
        Self::with_power(2)
    }

    pub fn with_power(power: i32) -> Self {
        let h = 2.0 / BUMP_TABLE_SIZE as f64;
        let (gx, gw) = gauss_legendre(12);
        let mut cdf = Vec::with_capacity(BUMP_TABLE_SIZE + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 0..BUMP_TABLE_SIZE {
            let a = -1.0 + i as f64 * h;
            let cell: f64 = gx
                .iter()
                .zip(&gw)
                .map(|(x, w)| w * bump(a + 0.5 * h * (x + 1.0)))
                .sum::<f64>()
                * 0.5
                * h;
            acc += cell;
            cdf.push(acc);
        }
        let norm = acc;
        for c in &mut cdf {
            *c /= norm;
        }
        let mut w = Self {
            cdf,
            norm,
            power: power.max(1),
            hat_zero: 0.0,
        };
        w.hat_zero = w.integral();
        w
    }

    /// Cubic Hermite interpolation of the CDF, with the bump as derivative.
    fn cdf_at(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let h = 2.0 / BUMP_TABLE_SIZE as f64;
        let s = (u + 1.0) / h;
        let i = (s.floor() as usize).min(BUMP_TABLE_SIZE - 1);
        let x = s - i as f64;
        let (u0, u1) = (-1.0 + i as f64 * h, -1.0 + (i + 1) as f64 * h);
        let (p0, p1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (bump(u0) / self.norm * h, bump(u1) / self.norm * h);
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * p0
            + (x3 - 2.0 * x2 + x) * m0
            + (-2.0 * x3 + 3.0 * x2) * p1
            + (x3 - x2) * m1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let v = (self.cdf_at(4.0 * x + 3.0) - self.cdf_at(4.0 * x - 3.0)).clamp(0.0, 1.0);
        v.powi(self.power)
    }

    fn integral(&self) -> f64 {
        let r = integrate(
            |x| self.eval(x),
            -1.0,
            1.0,
            &[-0.5, 0.5],
            QuadOptions::rel(1e-13),
        );
        r.map_or(f64::NAN, |r| r.value)
    }

    /// ŵ(0) = ∫ w.
    pub fn hat_zero(&self) -> f64 {
        self.hat_zero
    }

    pub fn power(&self) -> i32 {
        self.power
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    #[serde(flatten)]
    pub result: QuadratureResult,
    pub window: MomentWindow,
    pub check: BoundCheck,
}

fn moment_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-9,
        max_evals: 2_000_000,
    }
}

/// ∫_{T0−T}^{T0+T} |ζ(1/2 + it)|² dt, checked against T.
pub fn second_moment(window: &MomentWindow) -> Result<MomentResult, MomentError> {
    let result = integrate(
        |t| zeta_critical(t).map_or(f64::NAN, |z| z.norm_sqr()),
        window.lo(),
        window.hi(),
        &[],
        moment_opts(),
    )?;
    let check = BoundCheck::at_least("second_moment", result.value, window.t, result.abs_error_estimate);
    Ok(MomentResult {
        result,
        window: *window,
        check,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstMoment {
    pub re: f64,
    pub im: f64,
    pub abs_error_estimate: f64,
}

impl FirstMoment {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// ∫ g(t) w((t − T0)/T) dt for a complex g, real and imaginary parts separately.
fn weighted_integral<G: Fn(f64) -> Complex64>(
    window: &MomentWindow,
    w: &SmoothWeight,
    g: G,
) -> Result<FirstMoment, MomentError> {
    let scale = |t: f64| w.eval((t - window.t0) / window.t);
    let breaks = [window.t0 - 0.5 * window.t, window.t0 + 0.5 * window.t];
    // either part can vanish by symmetry, so the tolerance has an absolute floor
    let opts = QuadOptions {
        abs_tol: 1e-10 * window.t,
        ..moment_opts()
    };
    let re = integrate(|t| g(t).re * scale(t), window.lo(), window.hi(), &breaks, opts)?;
    let im = integrate(|t| g(t).im * scale(t), window.lo(), window.hi(), &breaks, opts)?;
    Ok(FirstMoment {
        re: re.value,
        im: im.value,
        abs_error_estimate: re.abs_error_estimate + im.abs_error_estimate,
    })
}

/// ∫ ζ(1/2 + it) w((t − T0)/T) dt.
pub fn smoothed_first_moment(window: &MomentWindow, w: &SmoothWeight) -> Result<FirstMoment, MomentError> {
    weighted_integral(window, w, |t| {
        zeta_critical(t).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedBound {
    /// |∫ ζ w|² / ∫ w
    pub value: f64,
    pub first_moment: FirstMoment,
    /// ∫ w((t − T0)/T) dt = T ŵ(0)
    pub weight_mass: f64,
    pub abs_error_estimate: f64,
}

/// |∫ ζ(1/2 + it) w((t − T0)/T) dt|² / ∫ w((t − T0)/T) dt.
pub fn smoothed_lower_bound(window: &MomentWindow, w: &SmoothWeight) -> Result<SmoothedBound, MomentError> {
    let fm = smoothed_first_moment(window, w)?;
    let mass = window.t * w.hat_zero();
    let z = fm.value();
    Ok(SmoothedBound {
        value: z.norm_sqr() / mass,
        first_moment: fm,
        weight_mass: mass,
        abs_error_estimate: 2.0 * z.norm() * fm.abs_error_estimate / mass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub second_moment: MomentResult,
    pub smoothed: SmoothedBound,
    /// smoothed ≤ second moment
    pub upper: BoundCheck,
    /// smoothed ≥ T (1 − ε)
    pub lower: BoundCheck,
}

/// Both moments on one window, with smoothed ≤ full and smoothed ≥ T(1 − ε).
pub fn sandwich(window: &MomentWindow, w: &SmoothWeight, epsilon: f64) -> Result<Sandwich, MomentError> {
    let full = second_moment(window)?;
    let smoothed = smoothed_lower_bound(window, w)?;
    let slack = smoothed.abs_error_estimate + full.result.abs_error_estimate + 1e-9 * full.result.value;
    let upper = BoundCheck::at_most("smoothed <= second_moment", smoothed.value, full.result.value, slack);
    let lower = BoundCheck::at_least(
        "smoothed >= T(1 - eps)",
        smoothed.value,
        window.t * (1.0 - epsilon),
        smoothed.abs_error_estimate,
    );
    Ok(Sandwich {
        second_moment: full,
        smoothed,
        upper,
        lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_shape() {
        let w = SmoothWeight::bump();
        assert_eq!(w.eval(0.0), 1.0);
        assert_eq!(w.eval(0.5), 1.0);
        assert_eq!(w.eval(-0.3), 1.0);
        assert_eq!(w.eval(1.0), 0.0);
        assert_eq!(w.eval(-1.2), 0.0);
        let mid = w.eval(0.75);
        assert!((mid - 0.5).abs() < 1e-12);
        for i in 0..=200 {
            let x = -1.0 + 0.01 * i as f64;
            let v = w.eval(x);
            assert!((0.0..=1.0).contains(&v));
            assert!((v - w.eval(-x)).abs() < 1e-12);
        }
        assert!((w.hat_zero() - 1.5).abs() < 1e-10);
        let w2 = SmoothWeight::squared();
        assert!(w2.hat_zero() >= 1.0 && w2.hat_zero() < 1.5);
    }

    #[test]
    fn bump_normalization() {
        let w = SmoothWeight::bump();
        assert!((w.norm - 0.443_993_816_168_079_4).abs() < 1e-12);
    }

    #[test]
    fn windows() {
        assert!(MomentWindow::new(0.0, 0.0).is_err());
        assert!(MomentWindow::new(f64::NAN, 1.0).is_err());
        assert!(MomentWindow::new(1e5, 10.0).is_err());
        let w = MomentWindow::new(1000.0, 50.0).unwrap();
        assert_eq!((w.lo(), w.hi()), (950.0, 1050.0));
    }

    #[test]
    fn small_window() {
        let m = second_moment(&MomentWindow::new(0.0, 5.0).unwrap()).unwrap();
        assert!(m.check.holds);
        let s = sandwich(&MomentWindow::new(0.0, 5.0).unwrap(), &SmoothWeight::bump(), 1.0).unwrap();
        assert!(s.upper.holds);
    }

    #[test]
    fn first_moment_main_term() {
        // only the m = 1 term of Σ m^{-1/2-it} survives the smoothing
        let win = MomentWindow::new(1000.0, 30.0).unwrap();
        let w = SmoothWeight::bump();
        let fm = smoothed_first_moment(&win, &w).unwrap();
        let main = win.t * w.hat_zero();
        assert!((fm.value() - main).norm() < 0.01 * main);
    }

    #[test]
    fn monotone_in_t() {
        let a = second_moment(&MomentWindow::new(100.0, 5.0).unwrap()).unwrap();
        let b = second_moment(&MomentWindow::new(100.0, 7.0).unwrap()).unwrap();
        assert!(b.result.value >= a.result.value);
    }
}
