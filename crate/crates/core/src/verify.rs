//! Seeded invariant suites run by `maassnorm verify-suite`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    interlacing_beta, scan_gamma_weight, scan_local_sum, scan_lower_sum, BOX_K,
};
use crate::exponent::ExponentProfile;
use crate::gamma_weight::{q_lower_surrogate, q_upper_surrogate};
use crate::golden::GoldenConstants;
use crate::integrals::{
    box_bound, box_bound_check, c_alpha_integral, hahb_integral, CAlphaOptions, IntegralError,
    WeightMode,
};
use crate::params::{AlphaParams, BetaParams};
use crate::polytope::{
    an_projection, member_system, member_zonotope, monte_carlo_volume, sample_points,
    system_margin, volume_formula, volume_parallelohedron, SampleMode, YVector, Zonotope,
};
use crate::second_moment::{sandwich, MomentWindow, SmoothWeight};

pub const REPORT_SCHEMA: &str = "maassnorm-verify/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub passed: bool,
    pub detail: String,
}

impl SuiteEntry {
    fn new(name: &str, cases: usize, failures: usize, detail: String) -> Self {
        Self {
            name: name.into(),
            cases,
            failures,
            passed: failures == 0,
            detail,
        }
    }

    fn error(name: &str, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            cases: 0,
            failures: 1,
            passed: false,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: String,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<SuiteEntry>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
}

/// Independent stream per suite.
pub fn suite_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Log-uniform in [lo, hi].
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.gen::<f64>()).exp()
}

/// Random gap vector of length n with entries log-uniform in [lo, hi].
pub fn random_gaps(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| log_uniform(rng, lo, hi)).collect()
}

/// Unconstrained (t, α, β): entries uniform in [−s, s] with s log-uniform.
pub fn random_triple(rng: &mut ChaCha8Rng, n: usize) -> Result<(f64, AlphaParams, BetaParams), IntegralError> {
    let s = log_uniform(rng, 0.1, 1000.0);
    let a: Vec<f64> = (0..=n).map(|_| rng.gen_range(-s..s)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-s..s)).collect();
    let t = rng.gen_range(-2.0 * s..2.0 * s);
    Ok((t, AlphaParams::new(&a)?, BetaParams::new(&b)?))
}

/// Admissible (t, α, β) with t uniform in the median interval.
pub fn random_admissible(rng: &mut ChaCha8Rng, n: usize) -> Result<(f64, AlphaParams, BetaParams), IntegralError> {
    let y = random_gaps(rng, n, 0.01, 1000.0);
    let tp: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let alpha = AlphaParams::from_gaps(&y)?;
    let beta = interlacing_beta(&y, &tp)?;
    let im = ExponentProfile::new(&alpha, &beta)?.median_interval();
    let t = im.lo + (im.hi - im.lo) * rng.gen::<f64>();
    Ok((t, alpha, beta))
}

fn scale_of(alpha: &AlphaParams, beta: &BetaParams) -> f64 {
    alpha
        .values()
        .iter()
        .chain(beta.values())
        .fold(1.0_f64, |m, v| m.max(v.abs()))
}

pub fn suite_r_nonnegative(cfg: &VerifyConfig) -> SuiteEntry {
    let name = "r-nonnegative";
    let mut rng = suite_rng(cfg.seed, 1);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..cfg.samples {
        let (t, a, b) = match random_triple(&mut rng, cfg.n) {
            Ok(v) => v,
            Err(e) => return SuiteEntry::error(name, e),
        };
        let r = match ExponentProfile::new(&a, &b) {
            Ok(p) => p.r(t),
            Err(e) => return SuiteEntry::error(name, e),
        };
        worst = worst.min(r);
        if r < -1e-10 * scale_of(&a, &b) {
            failures += 1;
        }
    }
    SuiteEntry::new(name, cfg.samples, failures, format!("min r = {worst:e}"))
}

pub fn suite_median_zero(cfg: &VerifyConfig) -> SuiteEntry {
    let name = "r-zero-on-median";
    let mut rng = suite_rng(cfg.seed, 2);
    let cases = cfg.samples.min(1000);
    let mut failures = 0;
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let (t, a, b) = match random_admissible(&mut rng, cfg.n) {
            Ok(v) => v,
            Err(e) => return SuiteEntry::error(name, e),
        };
        let r = ExponentProfile::new(&a, &b).map(|p| p.r(t)).unwrap_or(f64::NAN);
        worst = worst.max(r.abs());
        if !(r.abs() <= 1e-9 * scale_of(&a, &b)) {
            failures += 1;
        }
    }
    SuiteEntry::new(name, cases, failures, format!("max |r| = {worst:e}"))
}

pub fn suite_membership(cfg: &VerifyConfig) -> SuiteEntry {
    let name = "system-equals-zonotope";
    if cfg.n < 2 {
        return SuiteEntry::new(name, 0, 0, "n < 2: empty polytope".into());
    }
    let mut rng = suite_rng(cfg.seed, 3);
    let y = match YVector::new(&random_gaps(&mut rng, cfg.n, 0.1, 10.0)) {
        Ok(y) => y,
        Err(e) => return SuiteEntry::error(name, e),
    };
    let half = cfg.samples / 2;
    let mut pts = sample_points(&y, SampleMode::ZonotopeT, cfg.seed, half);
    pts.extend(sample_points(&y, SampleMode::BoundingBox, cfg.seed ^ 0x9e37, cfg.samples - half));
    let mut failures = 0;
    let mut boundary = 0;
    for x in &pts {
        let (a, b) = match (member_system(x, &y), member_zonotope(x, &y)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return SuiteEntry::error(name, e),
        };
        if a != b {
            let m = system_margin(x, &y).unwrap_or(f64::NAN);
            if m.abs() <= 1e-9 {
                boundary += 1;
            } else {
                failures += 1;
            }
        }
    }
    SuiteEntry::new(
        name,
        pts.len(),
        failures,
        format!("{boundary} disagreements within boundary slack"),
    )
}

pub fn suite_volume(cfg: &VerifyConfig) -> SuiteEntry {
    let name = "volume-triple";
    if cfg.n < 2 {
        return SuiteEntry::new(name, 0, 0, "n < 2: no volume".into());
    }
    let mut rng = suite_rng(cfg.seed, 4);
    let cases: usize = 10;
    let mut failures = 0;
    let mut worst_mc = 0.0_f64;
    for i in 0..cases {
        let y = match YVector::new(&random_gaps(&mut rng, cfg.n, 0.5, 5.0)) {
            Ok(y) => y,
            Err(e) => return SuiteEntry::error(name, e),
        };
        let f = volume_formula(&y);
        let d: f64 = (1..=cfg.n).filter_map(|j| volume_parallelohedron(&y, j).ok()).sum();
        let mc = monte_carlo_volume(&y, cfg.samples as u64, cfg.seed.wrapping_add(i as u64));
        let rel = (mc.estimate - f).abs() / f;
        worst_mc = worst_mc.max(rel);
        if (f - d).abs() > 1e-9 * f || (mc.estimate - f).abs() > 4.0 * mc.std_error + 1e-12 {
            failures += 1;
        }
    }
    SuiteEntry::new(name, cases, failures, format!("max Monte Carlo relative error {worst_mc:.2e}"))
}

pub fn suite_an_projection(cfg: &VerifyConfig) -> SuiteEntry {
    let name = "an-projection";
    if cfg.n < 2 {
        return SuiteEntry::new(name, 0, 0, "n < 2: no generators".into());
    }
    let mut rng = suite_rng(cfg.seed, 5);
    let cases = 100;
    let mut failures = 0;
    for _ in 0..cases {
        let y = match YVector::new(&random_gaps(&mut rng, cfg.n, 0.01, 100.0)) {
            Ok(y) => y,
            Err(e) => return SuiteEntry::error(name, e),
        };
        if an_projection(&y).generators != Zonotope::new(&y).generators {
            failures += 1;
        }
    }
    SuiteEntry::new(name, cases, failures, "exact equality".into())
}

pub fn suite_surrogate_sandwich(cfg: &VerifyConfig) -> SuiteEntry {
    let name = "surrogate-sandwich";
    let mut rng = suite_rng(cfg.seed, 6);
    let cases = cfg.samples.min(10_000);
    let mut failures = 0;
    for _ in 0..cases {
        let (t, a, b) = match random_admissible(&mut rng, cfg.n) {
            Ok(v) => v,
            Err(e) => return SuiteEntry::error(name, e),
        };
        let rational = ExponentProfile::new(&a, &b).map(|p| p.rational_log(t));
        match (q_lower_surrogate(&a, &b), rational, q_upper_surrogate(t, &a, &b)) {
            (Ok(lo), Ok(mid), Ok(hi)) => {
                if lo > mid + 1e-12 || mid > hi + 1e-12 {
                    failures += 1;
                }
            }
            _ => failures += 1,
        }
    }
    SuiteEntry::new(name, cases, failures, "slack 1e-12".into())
}

pub fn suite_gamma_weight(cfg: &VerifyConfig, golden: &GoldenConstants) -> SuiteEntry {
    let name = "gamma-weight-k";
    let Some(rec) = golden.gamma_k(cfg.n) else {
        return SuiteEntry::new(name, 0, 0, format!("no K_{} recorded", cfg.n));
    };
    match scan_gamma_weight(cfg.n) {
        Ok(stat) => {
            let failures = usize::from(stat.max > rec.value) + usize::from(!rec.within_regression(stat.max));
            SuiteEntry::new(
                name,
                stat.cases,
                failures,
                format!("max {:.6} vs K_{} = {} (observed {:.6})", stat.max, cfg.n, rec.value, rec.observed),
            )
        }
        Err(e) => SuiteEntry::error(name, e),
    }
}

pub fn suite_hahb(cfg: &VerifyConfig) -> SuiteEntry {
    let name = "hahb-bound";
    let mut rng = suite_rng(cfg.seed, 7);
    let cases = cfg.samples.min(1000);
    let mut failures = 0;
    let mut worst = 0.0_f64;
    for i in 0..cases {
        let a = rng.gen_range(-1e3..1e3);
        let len = if i % 2 == 0 {
            10f64.powi((i / 2 % 10) as i32 - 3)
        } else {
            log_uniform(&mut rng, 1e-3, 1e6)
        };
        match hahb_integral(a, a + len) {
            Ok(r) => {
                worst = worst.max(r.result.value);
                if !r.check.holds {
                    failures += 1;
                }
            }
            Err(e) => return SuiteEntry::error(name, e),
        }
    }
    SuiteEntry::new(name, cases, failures, format!("max {worst:.6}"))
}

pub fn suite_bounded_sums(cfg: &VerifyConfig, golden: &GoldenConstants) -> Vec<SuiteEntry> {
    let mut out = Vec::new();
    let mut rng = suite_rng(cfg.seed, 8);
    let mut box_fail = 0;
    let mut box_cases = 0;
    for _ in 0..20 {
        let y = random_gaps(&mut rng, cfg.n, 1.0, 1000.0);
        let alpha = match AlphaParams::from_gaps(&y) {
            Ok(a) => a,
            Err(e) => {
                out.push(SuiteEntry::error("box-bound", e));
                return out;
            }
        };
        for k in BOX_K {
            let c = golden.box_c(k).unwrap_or(f64::NAN);
            box_cases += 1;
            match box_bound(&alpha, k) {
                Ok(b) if box_bound_check(&b, c).holds => {}
                _ => box_fail += 1,
            }
        }
    }
    out.push(SuiteEntry::new("box-bound", box_cases, box_fail, "(4 + c(K))^n".into()));
    if cfg.n > 3 {
        out.push(SuiteEntry::new("lattice-sums", 0, 0, "n > 3: not recorded".into()));
        return out;
    }
    match (scan_local_sum(cfg.n), golden.local_c(cfg.n)) {
        (Ok(stat), Some(rec)) => {
            let failures = usize::from(stat.max > rec.value) + usize::from(!rec.within_regression(stat.max));
            out.push(SuiteEntry::new(
                "local-sum",
                stat.cases,
                failures,
                format!("max {:.6} vs C_{} = {}", stat.max, cfg.n, rec.value),
            ));
        }
        (Err(e), _) => out.push(SuiteEntry::error("local-sum", e)),
        (_, None) => out.push(SuiteEntry::error("local-sum", "constant missing")),
    }
    match (scan_lower_sum(cfg.n), golden.lower_c(cfg.n)) {
        (Ok(stat), Some(rec)) => {
            let failures = usize::from(stat.min < rec.value || rec.value <= 0.0)
                + usize::from(!rec.within_regression(stat.min));
            out.push(SuiteEntry::new(
                "lower-sum",
                stat.cases,
                failures,
                format!("min {:.6} vs c_{} = {}", stat.min, cfg.n, rec.value),
            ));
        }
        (Err(e), _) => out.push(SuiteEntry::error("lower-sum", e)),
        (_, None) => out.push(SuiteEntry::error("lower-sum", "constant missing")),
    }
    out
}

pub fn suite_second_moment(cfg: &VerifyConfig, golden: &GoldenConstants) -> SuiteEntry {
    let name = "second-moment";
    let mut rng = suite_rng(cfg.seed, 9);
    let w = SmoothWeight::bump();
    let cases = 4;
    let mut failures = 0;
    for _ in 0..cases {
        let t0 = rng.gen_range(0.0..2000.0);
        let t = rng.gen_range(5.0..40.0);
        let win = match MomentWindow::new(t0, t) {
            Ok(w) => w,
            Err(e) => return SuiteEntry::error(name, e),
        };
        let eps = if t >= golden.smoothed_min_t {
            golden.smoothed_epsilon
        } else {
            1.0
        };
        match sandwich(&win, &w, eps) {
            Ok(s) => {
                if !(s.second_moment.check.holds && s.upper.holds && s.lower.holds) {
                    failures += 1;
                }
            }
            Err(e) => return SuiteEntry::error(name, e),
        }
    }
    SuiteEntry::new(name, cases, failures, "value ≥ T and smoothed ≤ value".into())
}

pub fn suite_c_alpha(cfg: &VerifyConfig) -> SuiteEntry {
    let name = "c-alpha-stirling";
    if cfg.n > 3 {
        return SuiteEntry::new(name, 0, 0, "n > 3: skipped".into());
    }
    let mut rng = suite_rng(cfg.seed, 10);
    let cases = 5;
    let mut failures = 0;
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let y = random_gaps(&mut rng, cfg.n, 0.1, 100.0);
        let alpha = match AlphaParams::from_gaps(&y) {
            Ok(a) => a,
            Err(e) => return SuiteEntry::error(name, e),
        };
        match c_alpha_integral(&alpha, WeightMode::Stirling, CAlphaOptions::default()) {
            Ok(r) => {
                worst = worst.max(r.result.value);
                if !r.check.map_or(false, |c| c.holds) {
                    failures += 1;
                }
            }
            Err(e) => return SuiteEntry::error(name, e),
        }
    }
    SuiteEntry::new(name, cases, failures, format!("max {worst:.6} vs 4^n"))
}

/// Every suite for rank n; passes only if all of them do.
pub fn run_suite(cfg: &VerifyConfig, golden: &GoldenConstants) -> SuiteReport {
    let mut suites = vec![
        suite_r_nonnegative(cfg),
        suite_median_zero(cfg),
        suite_membership(cfg),
        suite_volume(cfg),
        suite_an_projection(cfg),
        suite_surrogate_sandwich(cfg),
        suite_gamma_weight(cfg, golden),
        suite_hahb(cfg),
    ];
    suites.extend(suite_bounded_sums(cfg, golden));
    suites.push(suite_second_moment(cfg, golden));
    suites.push(suite_c_alpha(cfg));
    let passed = suites.iter().all(|s| s.passed);
    SuiteReport {
        schema: REPORT_SCHEMA.into(),
        n: cfg.n,
        seed: cfg.seed,
        samples: cfg.samples,
        suites,
        passed,
    }
}
