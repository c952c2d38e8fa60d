//! One-dimensional kernel integrals, the box product, q integrated over t,
//! the lattice sums over γ and β, and the C_n(α) box integral.
//!
//! Operations with a fixed bound attach a [`BoundCheck`]; bounds whose
//! constant is calibrated (kernel sums, box widening, lattice sums) are
//! checked against the golden file by [`crate::verify`].

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::BoundCheck;
use crate::exponent::{widened_interval, ExponentProfile, Interval};
use crate::gamma_weight::{
    log_mu_weight, log_q_exact, q_lower_surrogate, require_admissible, stirling_from_profile,
    WeightError,
};
use crate::numeric::CompensatedSum;
use crate::params::{AlphaParams, BetaParams, ParamError};
use crate::polytope::{q_star_region, PolytopeError, XPoint, YVector};
use crate::quadrature::{
    composite_rule, graded_panels, integrate, tensor_sum, QuadOptions, QuadratureError,
    QuadratureResult,
};
use crate::special::ln_abs_gamma;

/// Stirling exponent level at which full-line q integrals are cut off.
pub const TRUNCATION_EXPONENT: f64 = 80.0;

/// Full-line windows are widened until the tail bound is below this
/// fraction of the quadrature error estimate.
pub const TAIL_FRACTION: f64 = 1e-4;

/// Largest r level a full-line window is widened to.
const MAX_TRUNCATION_LEVEL: f64 = 1e4;

/// Upper bound for 2 ln|Γ(1/4 + iy/2)| − ln 2π − ½ ln 2 + ½ ln(1+|y|) + π|y|/2
/// over all real y. The maximum, about 0.65973, is attained near |y| = 0.3.
pub const STIRLING_DEVIATION_MAX: f64 = 0.66;

/// Largest pairwise α gap accepted by [`local_sum`].
pub const MAX_LOCAL_GAP: f64 = 1e4;

/// Relative error beyond which [`kernel_integral`] reports failure.
const KERNEL_FAILURE_REL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("expected a < b, got a = {a}, b = {b}")]
    BadOrder { a: f64, b: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parameters are not admissible: {0}")]
    NotAdmissible(String),
    #[error("lattice enumeration needs more than {budget} points")]
    BudgetExceeded { budget: u64 },
    #[error("gap y_{index} = {gap} is below the required spacing 1")]
    SpacingViolation { index: usize, gap: f64 },
    #[error("dimension n = {0} is not supported")]
    UnsupportedDimension(usize),
}

/// A quadrature result together with the inequality it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckedResult {
    #[serde(flatten)]
    pub result: QuadratureResult,
    pub check: BoundCheck,
}

/// (1 + |t + a|)^{-1/2} (1 + |t + b|)^{-1/2}
#[inline]
pub fn kernel(t: f64, a: f64, b: f64) -> f64 {
    ((1.0 + (t + a).abs()) * (1.0 + (t + b).abs())).sqrt().recip()
}

/// Antiderivative of [`kernel`] on a piece where t + a has sign `sa` and
/// t + b has sign `sb`.
fn kernel_antiderivative(t: f64, a: f64, b: f64, sa: f64, sb: f64) -> f64 {
    let p = 1.0 + (t + a).abs();
    let q = 1.0 + (t + b).abs();
    match (sa > 0.0, sb > 0.0) {
        (true, true) => 2.0 * (p.sqrt() + q.sqrt()).ln(),
        (false, false) => -2.0 * (p.sqrt() + q.sqrt()).ln(),
        (true, false) => 2.0 * (p / (p + q)).sqrt().min(1.0).asin(),
        (false, true) => 2.0 * (q / (p + q)).sqrt().min(1.0).asin(),
    }
}

/// ∫_lo^hi of [`kernel`] in closed form.
pub fn kernel_closed_form(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let mut cuts = vec![lo, hi];
    cuts.extend([-a, -b].into_iter().filter(|&c| c > lo && c < hi));
    cuts.sort_by(f64::total_cmp);
    let mut acc = CompensatedSum::new();
    for w in cuts.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        let (sa, sb) = ((m + a).signum(), (m + b).signum());
        acc.add(kernel_antiderivative(w[1], a, b, sa, sb) - kernel_antiderivative(w[0], a, b, sa, sb));
    }
    acc.value()
}

fn kernel_quadrature(a: f64, b: f64, lo: f64, hi: f64) -> Result<QuadratureResult, IntegralError> {
    let res = integrate(|t| kernel(t, a, b), lo, hi, &[-a, -b], QuadOptions::default())?;
    if res.abs_error_estimate > KERNEL_FAILURE_REL * res.value.abs() {
        return Err(QuadratureError::QuadratureFailure {
            value: res.value,
            error: res.abs_error_estimate,
            evaluations: res.evaluations,
        }
        .into());
    }
    Ok(res)
}

fn quad_slack(res: &QuadratureResult, rhs: f64) -> f64 {
    res.abs_error_estimate + 1e-12 * rhs.abs()
}

/// ∫_{−X}^{X} kernel(t, a, b) dt, checked against
/// log(1 + |a| + X) + log(1 + |b| + X).
pub fn kernel_integral(a: f64, b: f64, x: f64) -> Result<CheckedResult, IntegralError> {
    if !(x > 0.0 && x.is_finite()) || !a.is_finite() || !b.is_finite() {
        return Err(IntegralError::InvalidArgument(format!(
            "need finite a, b and X > 0, got a = {a}, b = {b}, X = {x}"
        )));
    }
    let result = kernel_quadrature(a, b, -x, x)?;
    let rhs = (a.abs() + x).ln_1p() + (b.abs() + x).ln_1p();
    let check = BoundCheck::at_most("kernel_integral", result.value, rhs, quad_slack(&result, rhs));
    Ok(CheckedResult { result, check })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSum {
    pub value: f64,
    pub terms: u64,
    /// log(2 + |a| + X) + log(2 + |b| + X)
    pub log_bound: f64,
    pub ratio: f64,
}

/// Σ_{|m| ≤ X} kernel(m, a, b) and its ratio to the logarithmic bound.
pub fn kernel_sum(a: f64, b: f64, x: f64) -> Result<KernelSum, IntegralError> {
    if !(x >= 0.0 && x < 1e9) || !a.is_finite() || !b.is_finite() {
        return Err(IntegralError::InvalidArgument(format!(
            "need finite a, b and 0 ≤ X < 1e9, got a = {a}, b = {b}, X = {x}"
        )));
    }
    let m_max = x.floor() as i64;
    let mut acc = CompensatedSum::new();
    for m in -m_max..=m_max {
        acc.add(kernel(m as f64, a, b));
    }
    let value = acc.value();
    let log_bound = (2.0 + a.abs() + x).ln() + (2.0 + b.abs() + x).ln();
    Ok(KernelSum {
        value,
        terms: (2 * m_max + 1) as u64,
        log_bound,
        ratio: value / log_bound,
    })
}

/// ∫_{−b}^{−a} kernel(t, a, b) dt for a < b, checked against 4.
pub fn hahb_integral(a: f64, b: f64) -> Result<CheckedResult, IntegralError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(IntegralError::InvalidArgument(format!("non-finite a = {a} or b = {b}")));
    }
    if a >= b {
        return Err(IntegralError::BadOrder { a, b });
    }
    let result = integrate(|t| kernel(t, a, b), -b, -a, &[], QuadOptions::default())?;
    let check = BoundCheck::at_most("hahb_integral", result.value, 4.0, quad_slack(&result, 4.0));
    Ok(CheckedResult { result, check })
}

/// 2 arcsin(L / (L + 2)) with L = b − a, the value of [`hahb_integral`].
pub fn hahb_closed_form(a: f64, b: f64) -> f64 {
    let l = b - a;
    2.0 * (l / (l + 2.0)).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBound {
    pub value: f64,
    pub factors: Vec<f64>,
    pub abs_error_estimate: f64,
    pub k: f64,
}

/// ∏_k ∫ kernel(λ, α_{n+2−k}, α_{n+1−k}) over [−α_{n+1−k} − K, −α_{n+2−k} + K].
pub fn box_bound(alpha: &AlphaParams, k: f64) -> Result<BoxBound, IntegralError> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(IntegralError::InvalidArgument(format!("need K ≥ 1, got {k}")));
    }
    let n = alpha.n();
    let mut factors = Vec::with_capacity(n);
    let mut value = 1.0;
    let mut rel_err = 0.0;
    for j in 1..=n {
        let hi_a = alpha.at(n + 1 - j);
        let lo_a = alpha.at(n + 2 - j);
        let res = kernel_quadrature(lo_a, hi_a, -hi_a - k, -lo_a + k)?;
        value *= res.value;
        rel_err += res.abs_error_estimate / res.value;
        factors.push(res.value);
    }
    Ok(BoxBound {
        value,
        factors,
        abs_error_estimate: value * rel_err,
        k,
    })
}

/// One factor of [`box_bound`] as a function of the gap L and K, in closed form.
pub fn box_factor_closed_form(gap: f64, k: f64) -> f64 {
    kernel_closed_form(0.0, gap, -gap - k, k)
}

/// c(K) = max(0, sup_L factor(L, K) − 4), by a logarithmic scan over L
/// refined with golden-section search around the best grid point.
pub fn box_widening_correction(k: f64) -> f64 {
    let f = |l: f64| box_factor_closed_form(l, k);
    let mut grid = vec![0.0];
    grid.extend((0..=280).map(|i| 10f64.powf(-6.0 + 0.05 * i as f64)));
    let (mut best_i, mut best) = (0, f(0.0));
    for (i, &l) in grid.iter().enumerate() {
        let v = f(l);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let (mut a, mut b) = (lo, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best = best.max(f(0.5 * (a + b)));
    (best - 4.0).max(0.0)
}

/// (4 + c(K))^n check for a box product.
pub fn box_bound_check(bound: &BoxBound, correction: f64) -> BoundCheck {
    let rhs = (4.0 + correction).powi(bound.factors.len() as i32);
    BoundCheck::at_most(
        format!("box_bound K={}", bound.k),
        bound.value,
        rhs,
        bound.abs_error_estimate + 1e-12 * rhs,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Exact,
    Stirling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// The median interval I_M.
    Median,
    /// I_M widened by C on each side.
    MedianWidened(f64),
    /// The whole line, truncated where the Stirling exponent drops at least
    /// [`TRUNCATION_EXPONENT`] below its maximum.
    FullLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QtIntegral {
    #[serde(flatten)]
    pub result: QuadratureResult,
    pub mode: WeightMode,
    pub window: Interval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_check: Option<BoundCheck>,
}

/// Upper bound for ln q_exact − ln q_stirling at rank n.
pub fn exact_over_stirling_log_cap(n: usize) -> f64 {
    let n = n as f64;
    n * (2.0 * PI).ln() + n * (n + 1.0) * (0.5 * LN_2 + STIRLING_DEVIATION_MAX) + n * n * LN_2
}

/// Integrates over level windows of r, raising the level until the
/// discarded tail is below [`TAIL_FRACTION`] of the error estimate.
fn full_line<F>(
    prof: &ExponentProfile,
    mode: WeightMode,
    run: F,
) -> Result<(Interval, QuadratureResult), IntegralError>
where
    F: Fn(Interval) -> Result<QuadratureResult, QuadratureError>,
{
    // outside the window r has slope ≥ 2 and the rational factor is ≤ 1
    let cap = match mode {
        WeightMode::Stirling => 0.0,
        WeightMode::Exact => exact_over_stirling_log_cap(prof.n()),
    };
    let r_min = prof.min_value();
    let mut level = 2.0 * TRUNCATION_EXPONENT / PI;
    loop {
        let interval = prof.level_window(level);
        let mut result = run(interval)?;
        let log_tail = (2.0 / PI).ln() + cap - 0.5 * PI * (r_min + level);
        let floor = result.abs_error_estimate.max(f64::EPSILON * result.value.abs());
        let log_target = (TAIL_FRACTION * floor).ln();
        result.truncated_at = Some((interval.lo, interval.hi));
        result.tail_bound = Some(log_tail.exp());
        if log_tail <= log_target || !log_target.is_finite() || level >= MAX_TRUNCATION_LEVEL {
            return Ok((interval, result));
        }
        level = (level + 2.0 / PI * (log_tail - log_target + 1.0)).min(MAX_TRUNCATION_LEVEL);
    }
}

/// ∫ q(t, α, β) dt over the chosen window.
pub fn q_t_integral(
    alpha: &AlphaParams,
    beta: &BetaParams,
    mode: WeightMode,
    window: Window,
    opts: QuadOptions,
) -> Result<QtIntegral, IntegralError> {
    let prof = ExponentProfile::new(alpha, beta)?;
    let admissible = require_admissible(alpha, beta);
    if window == Window::Median {
        if let Err(WeightError::NotAdmissible(msg)) = admissible {
            return Err(IntegralError::NotAdmissible(msg));
        }
    }
    let im = prof.median_interval();
    let breaks = prof.breakpoints();
    let run = |interval: Interval| match mode {
        WeightMode::Stirling => integrate(
            |t| stirling_from_profile(&prof, t).exp(),
            interval.lo,
            interval.hi,
            &breaks,
            opts,
        ),
        WeightMode::Exact => integrate(
            |t| log_q_exact(t, alpha, beta).map_or(f64::NAN, |w| w.value()),
            interval.lo,
            interval.hi,
            &breaks,
            opts,
        ),
    };
    let (interval, result) = match window {
        Window::Median => (im, run(im)?),
        Window::MedianWidened(c) => {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(IntegralError::InvalidArgument(format!("widening C = {c}")));
            }
            let w = widened_interval(im, c);
            (w, run(w)?)
        }
        Window::FullLine => full_line(&prof, mode, run)?,
    };
    let lower_check = match (mode, admissible) {
        (WeightMode::Stirling, Ok(_)) => {
            let rhs = im.length() * q_lower_surrogate(alpha, beta)?.exp();
            Some(BoundCheck::at_least(
                "q_t_integral lower",
                result.value,
                rhs,
                quad_slack(&result, rhs),
            ))
        }
        _ => None,
    };
    Ok(QtIntegral {
        result,
        mode,
        window: interval,
        lower_check,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeOptions {
    /// Cap on the number of lattice points visited.
    pub budget: u64,
    pub quad: QuadOptions,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        Self {
            budget: 20_000_000,
            quad: QuadOptions {
                abs_tol: 0.0,
                rel_tol: 1e-9,
                max_evals: 100_000,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSum {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub lattice_points: u64,
}

/// Sum of `term` over `items` in fixed chunk order.
fn ordered_parallel_sum<T: Sync, F>(items: &[T], term: F) -> Result<(f64, f64), IntegralError>
where
    F: Fn(&T) -> Result<(f64, f64), IntegralError> + Sync,
{
    let parts: Vec<Result<(f64, f64), IntegralError>> = items
        .par_chunks(256)
        .map(|chunk| {
            let mut v = CompensatedSum::new();
            let mut e = 0.0;
            for it in chunk {
                let (tv, te) = term(it)?;
                v.add(tv);
                e += te;
            }
            Ok((v.value(), e))
        })
        .collect();
    let mut v = CompensatedSum::new();
    let mut e = 0.0;
    for p in parts {
        let (pv, pe) = p?;
        v.add(pv);
        e += pe;
    }
    Ok((v.value(), e))
}

/// γ ∈ ℤ^n with Σγ = 0 and a common t with γ_k + t ∈ [lo_k, hi_k] for all k,
/// together with the admissible t-interval.
fn enumerate_gamma(
    lo: &[f64],
    hi: &[f64],
    budget: u64,
) -> Result<Vec<(Vec<i64>, f64, f64)>, IntegralError> {
    let n = lo.len();
    let t_lo = lo.iter().sum::<f64>() / n as f64;
    let t_hi = hi.iter().sum::<f64>() / n as f64;
    let mut out = Vec::new();
    let mut visited = 0u64;
    let mut gamma = vec![0i64; n];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        partial: i64,
        t_lo: f64,
        t_hi: f64,
        lo: &[f64],
        hi: &[f64],
        gamma: &mut Vec<i64>,
        out: &mut Vec<(Vec<i64>, f64, f64)>,
        visited: &mut u64,
        budget: u64,
    ) -> Result<(), IntegralError> {
        let n = lo.len();
        *visited += 1;
        if *visited > budget {
            return Err(IntegralError::BudgetExceeded { budget });
        }
        if k + 1 == n {
            let g = -partial;
            let a = t_lo.max(lo[k] - g as f64);
            let b = t_hi.min(hi[k] - g as f64);
            if a < b {
                gamma[k] = g;
                out.push((gamma.clone(), a, b));
            }
            return Ok(());
        }
        let g_min = (lo[k] - t_hi).ceil() as i64;
        let g_max = (hi[k] - t_lo).floor() as i64;
        for g in g_min..=g_max {
            let a = t_lo.max(lo[k] - g as f64);
            let b = t_hi.min(hi[k] - g as f64);
            if a >= b {
                continue;
            }
            gamma[k] = g;
            rec(k + 1, partial + g, a, b, lo, hi, gamma, out, visited, budget)?;
        }
        Ok(())
    }

    rec(0, 0, t_lo, t_hi, lo, hi, &mut gamma, &mut out, &mut visited, budget)?;
    Ok(out)
}

/// Σ_γ ∫ f(γ + t) dt, with f the product of the 2n factors
/// (1 + |α_k + β_l|)^{-1/2}, k + l ∈ {n+1, n+2}, over the K-widened
/// interlacing window.
pub fn local_sum(alpha: &AlphaParams, k: f64, opts: LatticeOptions) -> Result<LatticeSum, IntegralError> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(IntegralError::InvalidArgument(format!("need K ≥ 1, got {k}")));
    }
    let n = alpha.n();
    let spread = alpha.at(1) - alpha.at(n + 1);
    if spread > MAX_LOCAL_GAP {
        return Err(IntegralError::InvalidArgument(format!(
            "α spread {spread} exceeds {MAX_LOCAL_GAP}"
        )));
    }
    let lo: Vec<f64> = (1..=n).map(|l| -alpha.at(n + 1 - l) - k).collect();
    let hi: Vec<f64> = (1..=n).map(|l| -alpha.at(n + 2 - l) + k).collect();
    let points = enumerate_gamma(&lo, &hi, opts.budget)?;
    // offsets c with factor (1 + |t + c|)^{-1/2}
    let offsets = |g: &[i64]| -> Vec<f64> {
        (1..=n)
            .flat_map(|l| {
                let gl = g[l - 1] as f64;
                [alpha.at(n + 1 - l) + gl, alpha.at(n + 2 - l) + gl]
            })
            .collect()
    };
    let (value, err) = ordered_parallel_sum(&points, |(g, a, b)| {
        let c = offsets(g);
        let breaks: Vec<f64> = c.iter().map(|x| -x).collect();
        let res = integrate(
            |t| {
                c.iter()
                    .map(|ci| (1.0 + (t + ci).abs()).sqrt())
                    .product::<f64>()
                    .recip()
            },
            *a,
            *b,
            &breaks,
            opts.quad,
        )?;
        Ok((res.value, res.abs_error_estimate))
    })?;
    Ok(LatticeSum {
        value,
        abs_error_estimate: err,
        lattice_points: points.len() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerSum {
    pub value: f64,
    pub lattice_points: u64,
    /// Lattice spacing h; each point carries weight h^{n−1}.
    pub spacing: f64,
    pub j0: usize,
}

/// |I_M| · exp(q_lower) · μ(β) for the β with gap vector x.
fn lower_term(alpha: &AlphaParams, x: &[f64]) -> Result<f64, IntegralError> {
    let beta = BetaParams::from_gaps(x)?;
    let im = ExponentProfile::new(alpha, &beta)?.median_interval();
    Ok((im.length().ln() + q_lower_surrogate(alpha, &beta)? + log_mu_weight(beta.values())).exp())
}

/// h^{n−1} Σ |I_M| exp(q_lower) μ(β) over β whose gaps lie on hℤ^{n−1} ∩ Q*_{j0},
/// with h = min(1, min_j y_j / 4). Requires y_j ≥ 1.
pub fn lower_bound_sum(alpha: &AlphaParams, budget: u64) -> Result<LowerSum, IntegralError> {
    let y = alpha.gaps_y();
    if let Some((i, &g)) = y.iter().enumerate().find(|(_, &g)| g < 1.0) {
        return Err(IntegralError::SpacingViolation { index: i + 1, gap: g });
    }
    let n = alpha.n();
    if n == 1 {
        let beta = BetaParams::new(&[0.0])?;
        let im = ExponentProfile::new(alpha, &beta)?.median_interval();
        return Ok(LowerSum {
            value: im.length() * q_lower_surrogate(alpha, &beta)?.exp(),
            lattice_points: 1,
            spacing: 1.0,
            j0: 1,
        });
    }
    let yv = YVector::new(&y)?;
    let region = q_star_region(&yv);
    let h = y.iter().fold(1.0_f64, |m, &v| m.min(0.25 * v));
    // bounding box of the region from its 2^{n−1} corners
    let mut lo = vec![f64::INFINITY; n - 1];
    let mut hi = vec![f64::NEG_INFINITY; n - 1];
    for mask in 0..(1u32 << (n - 1)) {
        let s: Vec<f64> = (0..n - 1).map(|i| ((mask >> i) & 1) as f64).collect();
        let p = region.point(&s)?;
        for (i, &v) in p.values().iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let ranges: Vec<(i64, i64)> = lo
        .iter()
        .zip(&hi)
        .map(|(&a, &b)| (((a - 1e-9) / h).ceil() as i64, ((b + 1e-9) / h).floor() as i64))
        .collect();
    let total = ranges
        .iter()
        .try_fold(1u64, |acc, &(a, b)| acc.checked_mul((b - a + 1).max(0) as u64));
    match total {
        Some(t) if t <= budget => {}
        _ => return Err(IntegralError::BudgetExceeded { budget }),
    }
    let first: Vec<i64> = (ranges[0].0..=ranges[0].1).collect();
    let parts: Vec<Result<(f64, u64), IntegralError>> = first
        .par_iter()
        .map(|&m0| {
            let mut acc = CompensatedSum::new();
            let mut count = 0u64;
            let mut m: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            m[0] = m0;
            loop {
                let x: Vec<f64> = m.iter().map(|&mi| mi as f64 * h).collect();
                if region.contains(&XPoint(x.clone()))? {
                    acc.add(lower_term(alpha, &x)?);
                    count += 1;
                }
                // odometer over coordinates 1..n−1
                let mut i = 1;
                loop {
                    if i >= m.len() {
                        return Ok((acc.value(), count));
                    }
                    if m[i] < ranges[i].1 {
                        m[i] += 1;
                        break;
                    }
                    m[i] = ranges[i].0;
                    i += 1;
                }
            }
        })
        .collect();
    let mut value = CompensatedSum::new();
    let mut points = 0;
    for p in parts {
        let (v, c) = p?;
        value.add(v);
        points += c;
    }
    Ok(LowerSum {
        value: value.value() * h.powi(n as i32 - 1),
        lattice_points: points,
        spacing: h,
        j0: region.j0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CAlphaMethod {
    Tensor,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CAlphaOptions {
    /// Gauss–Legendre order per panel for the tensor rule.
    pub order: usize,
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for CAlphaOptions {
    fn default() -> Self {
        Self {
            order: 8,
            mc_samples: 200_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CAlpha {
    #[serde(flatten)]
    pub result: QuadratureResult,
    pub mode: WeightMode,
    pub method: CAlphaMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<BoundCheck>,
}

fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - LN_2
}

fn ln_sinh(x: f64) -> f64 {
    if x < 1.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - LN_2
    }
}

/// ln of the C_n(α) integrand at λ.
///
/// Stirling: μ(λ) ∏_{k,l} (1 + |α_k + λ_l|)^{-1/2}.
/// Exact: c(α) ∏_{k,l} |Γ(1/4 + i(α_k + λ_l)/2)|² ∏_{k<l} |Γ(iy)|^{-2}, where
/// |Γ(iy)|^{-2} = y sinh(πy)/π with y = |λ_k − λ_l|/2 and
/// c(α) = ∏_{k<l} |Γ((1 + iδ)/2)|^{-2} = ∏ cosh(πδ/2)/π.
fn c_alpha_log_integrand(alpha: &[f64], lambda: &[f64], mode: WeightMode, log_c: f64) -> f64 {
    match mode {
        WeightMode::Stirling => {
            let mut acc = log_mu_weight(lambda);
            for a in alpha {
                for l in lambda {
                    acc -= 0.5 * (a + l).abs().ln_1p();
                }
            }
            acc
        }
        WeightMode::Exact => {
            let mut acc = log_c;
            for a in alpha {
                for l in lambda {
                    acc += 2.0 * ln_abs_gamma(Complex64::new(0.25, 0.5 * (a + l)));
                }
            }
            for (i, a) in lambda.iter().enumerate() {
                for b in &lambda[i + 1..] {
                    let y = 0.5 * (a - b).abs();
                    acc += y.ln() + ln_sinh(PI * y) - PI.ln();
                }
            }
            acc
        }
    }
}

/// The box R: λ_l ∈ [−α_{n+1−l}, −α_{n+2−l}].
pub fn c_alpha_box(alpha: &AlphaParams) -> Vec<(f64, f64)> {
    let n = alpha.n();
    (1..=n)
        .map(|l| (-alpha.at(n + 1 - l), -alpha.at(n + 2 - l)))
        .collect()
}

fn tensor_rules(bx: &[(f64, f64)], order: usize) -> Vec<Vec<(f64, f64)>> {
    let ratio = match bx.len() {
        0..=2 => 2.0,
        3 => 3.0,
        _ => 4.0,
    };
    bx.iter()
        .map(|&(a, b)| {
            let len = b - a;
            let first = len.min(0.5);
            composite_rule(&graded_panels(a, b, &[a, b], first, ratio), order)
        })
        .collect()
}

/// C_n(α)-type integral over R in the chosen mode. Tensor Gauss–Legendre for
/// n ≤ 4, Monte Carlo with a standard-error estimate for 5 ≤ n ≤ 8.
pub fn c_alpha_integral(
    alpha: &AlphaParams,
    mode: WeightMode,
    opts: CAlphaOptions,
) -> Result<CAlpha, IntegralError> {
    let n = alpha.n();
    if n > 8 {
        return Err(IntegralError::UnsupportedDimension(n));
    }
    let a = alpha.values();
    let log_c = {
        let mut acc = CompensatedSum::new();
        for (i, x) in a.iter().enumerate() {
            for z in &a[i + 1..] {
                acc.add(ln_cosh(0.5 * PI * (x - z)) - PI.ln());
            }
        }
        acc.value()
    };
    let bx = c_alpha_box(alpha);
    let f = |lambda: &[f64]| c_alpha_log_integrand(a, lambda, mode, log_c).exp();
    let (result, method) = if n <= 4 {
        let order = opts.order.max(4);
        let (fine, count) = tensor_sum(&tensor_rules(&bx, order), f);
        let (coarse, count2) = tensor_sum(&tensor_rules(&bx, order - 2), f);
        (
            QuadratureResult {
                value: fine,
                abs_error_estimate: (fine - coarse).abs(),
                evaluations: count + count2,
                truncated_at: None,
                tail_bound: None,
            },
            CAlphaMethod::Tensor,
        )
    } else {
        (monte_carlo_box(&bx, opts.mc_samples, opts.seed, f), CAlphaMethod::MonteCarlo)
    };
    if !result.value.is_finite() {
        return Err(QuadratureError::NonFiniteIntegrand { at: f64::NAN }.into());
    }
    let check = match mode {
        WeightMode::Stirling => {
            let rhs = 4f64.powi(n as i32);
            Some(BoundCheck::at_most(
                "c_alpha stirling",
                result.value,
                rhs,
                quad_slack(&result, rhs),
            ))
        }
        WeightMode::Exact => None,
    };
    Ok(CAlpha {
        result,
        mode,
        method,
        check,
    })
}

fn monte_carlo_box<F: Fn(&[f64]) -> f64 + Sync>(
    bx: &[(f64, f64)],
    samples: u64,
    seed: u64,
    f: F,
) -> QuadratureResult {
    const CHUNK: u64 = 1 << 16;
    let volume: f64 = bx.iter().map(|(a, b)| b - a).product();
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut p = vec![0.0; bx.len()];
            let (mut s, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
            for _ in 0..len {
                for (pi, &(a, b)) in p.iter_mut().zip(bx) {
                    *pi = a + (b - a) * rng.gen::<f64>();
                }
                let v = f(&p);
                s.add(v);
                s2.add(v * v);
            }
            (s.value(), s2.value())
        })
        .collect();
    let (mut s, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
    for (a, b) in parts {
        s.add(a);
        s2.add(b);
    }
    let nf = samples.max(1) as f64;
    let mean = s.value() / nf;
    let var = (s2.value() / nf - mean * mean).max(0.0);
    QuadratureResult {
        value: volume * mean,
        abs_error_estimate: volume * (var / nf).sqrt(),
        evaluations: samples as usize,
        truncated_at: None,
        tail_bound: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(v: &[f64]) -> AlphaParams {
        AlphaParams::new(v).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let r = kernel_integral(0.0, 0.0, 1.0).unwrap();
        assert!((r.result.value - 2.0 * LN_2).abs() < 1e-12);
        assert!(r.check.holds);
        let r = kernel_integral(5.0, -5.0, 100.0).unwrap();
        assert!(r.check.holds);
        assert!((r.check.rhs - 2.0 * 106f64.ln()).abs() < 1e-12);
        assert!(kernel_integral(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn kernel_closed_form_matches_quadrature() {
        for &(a, b, lo, hi) in &[
            (0.0, 0.0, -1.0, 1.0),
            (3.0, -2.0, -10.0, 7.0),
            (-4.0, 1.5, -3.0, 9.0),
            (0.3, 0.3, -50.0, 50.0),
        ] {
            let q = integrate(|t| kernel(t, a, b), lo, hi, &[-a, -b], QuadOptions::default()).unwrap();
            assert!((q.value - kernel_closed_form(a, b, lo, hi)).abs() < 1e-11 * q.value);
        }
    }

    #[test]
    fn kernel_sum_examples() {
        assert_eq!(kernel_sum(0.0, 0.0, 0.0).unwrap().value, 1.0);
        let direct = 1.0 + 2.0 * (1..=10).map(|m| 1.0 / (1.0 + m as f64)).sum::<f64>();
        assert!((kernel_sum(0.0, 0.0, 10.0).unwrap().value - direct).abs() < 1e-14);
    }

    #[test]
    fn hahb_examples() {
        let r = hahb_integral(0.0, 8.0).unwrap();
        assert!((r.result.value - hahb_closed_form(0.0, 8.0)).abs() < 1e-12);
        assert!((r.result.value - 1.854_590_436_003_1).abs() < 1e-10);
        assert!(r.check.holds);
        assert!(hahb_integral(0.0, 1e-9).unwrap().result.value < 1e-8);
        assert!(hahb_integral(0.0, 1e6).unwrap().check.holds);
        assert!(matches!(hahb_integral(1.0, 1.0), Err(IntegralError::BadOrder { .. })));
    }

    #[test]
    fn box_examples() {
        let b = box_bound(&alpha(&[1.0, -1.0]), 1.0).unwrap();
        assert_eq!(b.factors.len(), 1);
        assert!((b.value - box_factor_closed_form(2.0, 1.0)).abs() < 1e-12);
        assert!(box_bound_check(&b, box_widening_correction(1.0)).holds);
        let b = box_bound(&alpha(&[1.0, 1.0, -2.0]), 1.0).unwrap();
        assert!(b.factors.iter().all(|f| f.is_finite()));
        assert!((b.factors[1] - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!(box_bound(&alpha(&[1.0, -1.0]), 0.5).is_err());
    }

    #[test]
    fn widening_correction_monotone() {
        assert_eq!(box_widening_correction(1.0), 0.0);
        let c10 = box_widening_correction(10.0);
        assert!(c10 > 0.0);
        assert!(box_widening_correction(20.0) > c10);
        // sup over L dominates the L = 0 value 2 ln(1 + K)
        assert!(c10 + 4.0 >= 2.0 * 11f64.ln() - 1e-12);
    }

    #[test]
    fn qt_examples() {
        let a = alpha(&[1.0, -1.0]);
        let b = BetaParams::new(&[0.0]).unwrap();
        let r = q_t_integral(&a, &b, WeightMode::Stirling, Window::Median, QuadOptions::default()).unwrap();
        assert!((r.result.value - hahb_closed_form(-1.0, 1.0)).abs() < 1e-11);
        let lc = r.lower_check.unwrap();
        assert!((lc.rhs - 2.0 / 3.0).abs() < 1e-14);
        assert!(lc.holds);
    }

    #[test]
    fn qt_full_line_matches_widened() {
        let a = alpha(&[30.0, 0.0, -30.0]);
        let b = BetaParams::new(&[12.0, -12.0]).unwrap();
        let o = QuadOptions::rel(1e-12);
        let full = q_t_integral(&a, &b, WeightMode::Stirling, Window::FullLine, o).unwrap();
        let c = 30f64.ln().powi(2);
        let wide = q_t_integral(&a, &b, WeightMode::Stirling, Window::MedianWidened(c), o).unwrap();
        assert!((full.result.value - wide.result.value).abs() <= 1e-6 * full.result.value);
        assert!(full.result.tail_bound.unwrap() < 1e-3 * full.result.abs_error_estimate.max(1e-300));
    }

    #[test]
    fn qt_rejects_inadmissible_median() {
        let a = alpha(&[1.0, -1.0]);
        let b = BetaParams::new(&[0.0]).unwrap();
        assert!(q_t_integral(&a, &b, WeightMode::Exact, Window::Median, QuadOptions::default()).is_ok());
        let a = alpha(&[1.0, 0.0, -1.0]);
        let b = BetaParams::new(&[5.0, -5.0]).unwrap();
        assert!(matches!(
            q_t_integral(&a, &b, WeightMode::Stirling, Window::Median, QuadOptions::default()),
            Err(IntegralError::NotAdmissible(_))
        ));
    }

    #[test]
    fn stirling_deviation_cap() {
        let dev = |y: f64| {
            2.0 * ln_abs_gamma(Complex64::new(0.25, 0.5 * y)) - (2.0 * PI).ln() - 0.5 * LN_2
                + 0.5 * y.abs().ln_1p()
                + 0.5 * PI * y.abs()
        };
        assert!((dev(0.0) - 0.391_594).abs() < 1e-5);
        let sup = (0..=900)
            .map(|i| dev(10f64.powf(-3.0 + 0.01 * i as f64)))
            .fold(f64::MIN, f64::max);
        assert!(sup <= STIRLING_DEVIATION_MAX);
        assert!(sup > 0.659);
        assert!(dev(1e6).abs() < 1e-6);
    }

    #[test]
    fn local_sum_n1_is_box_integral() {
        let a = alpha(&[2.0, -2.0]);
        let s = local_sum(&a, 1.0, LatticeOptions::default()).unwrap();
        assert_eq!(s.lattice_points, 1);
        assert!((s.value - box_factor_closed_form(4.0, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn local_sum_enumeration_is_complete() {
        // brute force over a cube of γ with the last coordinate forced
        let a = alpha(&[3.0, 0.5, -3.5]);
        let k = 1.0;
        let n = 2;
        let lo: Vec<f64> = (1..=n).map(|l| -a.at(n + 1 - l) - k).collect();
        let hi: Vec<f64> = (1..=n).map(|l| -a.at(n + 2 - l) + k).collect();
        let mut brute = 0;
        for g0 in -20i64..=20 {
            let g = [g0, -g0];
            let t0 = (0..n).map(|i| lo[i] - g[i] as f64).fold(f64::MIN, f64::max);
            let t1 = (0..n).map(|i| hi[i] - g[i] as f64).fold(f64::MAX, f64::min);
            if t0 < t1 {
                brute += 1;
            }
        }
        let pts = enumerate_gamma(&lo, &hi, 1_000_000).unwrap();
        assert_eq!(pts.len(), brute);
    }

    #[test]
    fn local_sum_budget() {
        let a = AlphaParams::from_gaps(&[500.0, 500.0, 500.0]).unwrap();
        let o = LatticeOptions {
            budget: 1000,
            ..LatticeOptions::default()
        };
        assert!(matches!(local_sum(&a, 1.0, o), Err(IntegralError::BudgetExceeded { .. })));
    }

    #[test]
    fn lower_sum_examples() {
        let s = lower_bound_sum(&alpha(&[2.0, 0.0, -2.0]), 1_000_000).unwrap();
        assert!(s.value > 0.0);
        assert!(s.lattice_points > 0);
        // y = (2, 2), h = 1/2, Q* has t_2 ∈ [1/4, 3/4] with t_1 = 0: x_1 = 2 − 2 t_2
        assert_eq!(s.j0, 1);
        let one = lower_bound_sum(&alpha(&[1.0, -1.0]), 10).unwrap();
        assert!((one.value - 2.0 / 3.0).abs() < 1e-14);
        assert!(matches!(
            lower_bound_sum(&alpha(&[1.0, 0.5, -1.5]), 10),
            Err(IntegralError::SpacingViolation { index: 2, .. })
        ));
    }

    #[test]
    fn c_alpha_n1_is_hahb() {
        let a = alpha(&[3.0, -3.0]);
        let r = c_alpha_integral(&a, WeightMode::Stirling, CAlphaOptions::default()).unwrap();
        assert!((r.result.value - hahb_closed_form(-3.0, 3.0)).abs() < 1e-10);
        assert!(r.check.unwrap().holds);
        let e = c_alpha_integral(&a, WeightMode::Exact, CAlphaOptions::default()).unwrap();
        assert!(e.result.value.is_finite() && e.result.value > 0.0);
        assert!(c_alpha_integral(&AlphaParams::from_gaps(&[1.0; 9]).unwrap(), WeightMode::Stirling, CAlphaOptions::default()).is_err());
    }

    #[test]
    fn c_alpha_exact_n1_closed_form() {
        // n = 1 exact integrand by direct adaptive quadrature
        let a = 2.5;
        let e = c_alpha_integral(&alpha(&[a, -a]), WeightMode::Exact, CAlphaOptions::default()).unwrap();
        let f = |l: f64| {
            let g1 = 2.0 * ln_abs_gamma(Complex64::new(0.25, 0.5 * (a + l)));
            let g2 = 2.0 * ln_abs_gamma(Complex64::new(0.25, 0.5 * (-a + l)));
            let c = -2.0 * ln_abs_gamma(Complex64::new(0.5, a));
            (g1 + g2 + c).exp()
        };
        let q = integrate(f, -a, a, &[], QuadOptions::default()).unwrap();
        assert!((e.result.value - q.value).abs() < 1e-8 * q.value);
    }
}
