//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use maassnorm_core::calibration::{
    interlacing_beta, scan_box, scan_gamma_weight, scan_kernel_sum, scan_local_sum, scan_lower_sum,
    BOX_K,
};
use maassnorm_core::exponent::ExponentProfile;
use maassnorm_core::gamma_weight::{q_lower_surrogate, q_upper_surrogate};
use maassnorm_core::golden::{GoldenConstants, LATTICE_N};
use maassnorm_core::integrals::{
    c_alpha_integral, hahb_closed_form, hahb_integral, local_sum, lower_bound_sum, CAlphaOptions,
    LatticeOptions, WeightMode,
};
use maassnorm_core::params::{AlphaParams, BetaParams};
use maassnorm_core::polytope::{
    an_projection, member_system, member_zonotope, monte_carlo_volume, sample_points, system_margin,
    volume_formula, volume_parallelohedron, SampleMode, YVector, Zonotope,
};
use maassnorm_core::second_moment::{sandwich, MomentWindow, SmoothWeight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * r.gen::<f64>()).exp()
}

/// Σ|t + α_k + β_l| − Σ_{k<k'}|α_k − α_k'| − Σ_{l<l'}|β_l − β_l'|.
fn r_naive(t: f64, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in a {
        for y in b {
            s += (t + x + y).abs();
        }
    }
    for v in [a, b] {
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                s -= (v[i] - v[j]).abs();
            }
        }
    }
    s
}

/// e_{n−1}(y) by direct expansion.
fn e_n_minus_1(y: &[f64]) -> f64 {
    (0..y.len())
        .map(|j| y.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v).product::<f64>())
        .sum()
}

fn random_admissible(r: &mut ChaCha8Rng, n: usize) -> (f64, AlphaParams, BetaParams) {
    let y: Vec<f64> = (0..n).map(|_| log_uniform(r, 0.01, 1000.0)).collect();
    let tp: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
    let alpha = AlphaParams::from_gaps(&y).unwrap();
    let beta = interlacing_beta(&y, &tp).unwrap();
    let im = ExponentProfile::new(&alpha, &beta).unwrap().median_interval();
    (im.lo + (im.hi - im.lo) * r.gen::<f64>(), alpha, beta)
}

fn r_nonnegativity() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut mismatch = 0.0f64;
    for n in 1..=6 {
        let mut r = rng(100 + n as u64);
        for _ in 0..100_000 {
            let s = log_uniform(&mut r, 0.1, 1000.0);
            let a: Vec<f64> = (0..=n).map(|_| r.gen_range(-s..s)).collect();
            let b: Vec<f64> = (0..n).map(|_| r.gen_range(-s..s)).collect();
            let t = r.gen_range(-2.0 * s..2.0 * s);
            let (alpha, beta) = (AlphaParams::new(&a).unwrap(), BetaParams::new(&b).unwrap());
            let v = ExponentProfile::new(&alpha, &beta).unwrap().r(t);
            worst = worst.min(v);
            mismatch = mismatch.max((v - r_naive(t, alpha.values(), beta.values())).abs() / s);
        }
    }
    let mut zero = 0.0f64;
    let mut r = rng(107);
    for i in 0..1000 {
        let (t, alpha, beta) = random_admissible(&mut r, 1 + i % 6);
        let scale = alpha.values()[0].abs().max(1.0);
        zero = zero.max(ExponentProfile::new(&alpha, &beta).unwrap().r(t).abs() / scale);
    }
    outcome(
        worst >= -1e-10 && zero <= 1e-12 && mismatch <= 1e-12,
        format!("min r {worst:.3e}, max |r|/scale on I_M {zero:.3e}, max naive mismatch/scale {mismatch:.3e}"),
    )
}

fn q_equals_p() -> Outcome {
    let mut outside = 0usize;
    let mut boundary = 0usize;
    let mut total = 0usize;
    for n in 2..=6 {
        let mut r = rng(200 + n as u64);
        for i in 0..100u64 {
            let y: Vec<f64> = (0..n).map(|_| log_uniform(&mut r, 0.1, 100.0)).collect();
            let scale = y.iter().sum::<f64>().max(1.0);
            let y = YVector::new(&y).unwrap();
            let seed = r.gen::<u64>();
            let mut pts = sample_points(&y, SampleMode::BoundingBox, seed, 500);
            pts.extend(sample_points(&y, SampleMode::ZonotopeT, seed ^ i, 500));
            for x in &pts {
                total += 1;
                if member_system(x, &y).unwrap() != member_zonotope(x, &y).unwrap() {
                    if system_margin(x, &y).unwrap().abs() <= 1e-9 * scale {
                        boundary += 1;
                    } else {
                        outside += 1;
                    }
                }
            }
        }
    }
    outcome(
        outside == 0 && total == 500_000,
        format!("{total} samples, {outside} disagreements outside slack, {boundary} within slack"),
    )
}

fn volume_triple() -> Outcome {
    let mut worst_det = 0.0f64;
    let mut worst_mc = 0.0f64;
    let mut min_rate = 1.0f64;
    for n in 2..=6 {
        let mut r = rng(300 + n as u64);
        for _ in 0..100 {
            let yv: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..5.0)).collect();
            let y = YVector::new(&yv).unwrap();
            let f = volume_formula(&y);
            let brute = e_n_minus_1(&yv);
            let d: f64 = (1..=n).map(|j| volume_parallelohedron(&y, j).unwrap()).sum();
            worst_det = worst_det.max((f - d).abs() / f).max((f - brute).abs() / f);
            let mc = monte_carlo_volume(&y, 1_000_000, r.gen());
            worst_mc = worst_mc.max((mc.estimate - f).abs() / f);
            min_rate = min_rate.min(mc.accepted as f64 / mc.samples as f64);
        }
    }
    let y = YVector::new(&[2.0, 3.0, 5.0]).unwrap();
    let example = volume_formula(&y);
    let example_det: f64 = (1..=3).map(|j| volume_parallelohedron(&y, j).unwrap()).sum();
    outcome(
        worst_det <= 1e-12 && worst_mc <= 0.01 && example == 31.0 && (example_det - 31.0).abs() <= 1e-12,
        format!(
            "formula vs det max rel {worst_det:.2e}, MC max rel {worst_mc:.4} (min acceptance {min_rate:.3}), (2,3,5) -> {example} / {example_det}"
        ),
    )
}

fn an_projection_identity() -> Outcome {
    let mut bad = 0;
    let mut r = rng(400);
    for i in 0..100 {
        let n = 2 + i % 5;
        let y: Vec<f64> = (0..n).map(|_| log_uniform(&mut r, 0.01, 1000.0)).collect();
        let y = YVector::new(&y).unwrap();
        if an_projection(&y).generators != Zonotope::new(&y).generators {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("100 y, n = 2..6, {bad} mismatches"))
}

fn surrogate_sandwich() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for n in 1..=6 {
        let mut r = rng(500 + n as u64);
        for _ in 0..10_000 {
            let (t, alpha, beta) = random_admissible(&mut r, n);
            let mid = ExponentProfile::new(&alpha, &beta).unwrap().rational_log(t);
            let lo = q_lower_surrogate(&alpha, &beta).unwrap();
            let hi = q_upper_surrogate(t, &alpha, &beta).unwrap();
            worst = worst.max(lo - mid).max(mid - hi);
            cases += 1;
        }
    }
    outcome(worst <= 1e-12, format!("{cases} cases, worst violation {worst:.3e}"))
}

fn gamma_weight(g: &GoldenConstants) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=6 {
        let stat = scan_gamma_weight(n).unwrap();
        let k = g.gamma_k(n).unwrap();
        let ok = stat.max <= k.value && k.within_regression(stat.max);
        pass &= ok;
        parts.push(format!("n={n}: {:.4} <= {}", stat.max, k.value));
    }
    outcome(pass, parts.join(", "))
}

fn bounded_sums(g: &GoldenConstants) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in LATTICE_N {
        let c = g.local_c(n).unwrap();
        let stat = scan_local_sum(n).unwrap();
        let ok = stat.max <= c.value && c.within_regression(stat.max);
        pass &= ok;
        parts.push(format!("local n={n} {:.3} <= {}", stat.max, c.value));
        let c = g.lower_c(n).unwrap();
        let stat = scan_lower_sum(n).unwrap();
        let ok = stat.min >= c.value && c.value > 0.0 && c.within_regression(stat.min);
        pass &= ok;
        parts.push(format!("lower n={n} {:.4} >= {}", stat.min, c.value));
    }
    // off-grid scales
    for n in LATTICE_N {
        for scale in [2.0, 20.0, 200.0] {
            let y: Vec<f64> = (0..n).map(|j| scale * (1.0 + 0.37 * j as f64)).collect();
            let alpha = AlphaParams::from_gaps(&y).unwrap();
            let l = local_sum(&alpha, 1.0, LatticeOptions::default()).unwrap().value;
            let lo = lower_bound_sum(&alpha, 50_000_000).unwrap().value;
            let ok = l <= g.local_c(n).unwrap().value && lo >= g.lower_c(n).unwrap().value;
            if !ok {
                parts.push(format!("off-grid n={n} scale {scale}: local {l:.3}, lower {lo:.4}"));
            }
            pass &= ok;
        }
    }
    for &k in &BOX_K {
        let stat = scan_box(k, g.box_c(k).unwrap()).unwrap();
        pass &= stat.max <= 1.0;
        parts.push(format!("box K={k} ratio {:.3}", stat.max));
    }
    let stat = scan_kernel_sum().unwrap();
    let ok = stat.max <= g.kernel_sum_c.value && g.kernel_sum_c.within_regression(stat.max);
    pass &= ok;
    parts.push(format!("kernel sum {:.3} <= {}", stat.max, g.kernel_sum_c.value));
    outcome(pass, parts.join(", "))
}

fn hahb() -> Outcome {
    let mut r = rng(800);
    let mut worst = 0.0f64;
    let mut route = 0.0f64;
    let mut failed = 0;
    for i in 0..1000 {
        let a = r.gen_range(-1e4..1e4);
        let len = if i < 500 { 10f64.powi(i % 10 - 3) } else { log_uniform(&mut r, 1e-3, 1e6) };
        let res = hahb_integral(a, a + len).unwrap();
        if !res.check.holds || res.result.value > 4.0 {
            failed += 1;
        }
        worst = worst.max(res.result.value);
        route = route.max((res.result.value - hahb_closed_form(a, a + len)).abs());
    }
    outcome(
        failed == 0 && route <= 1e-9,
        format!("1000 pairs, max {worst:.6}, quadrature vs closed form {route:.2e}"),
    )
}

fn second_moment_windows(g: &GoldenConstants) -> Outcome {
    let mut r = rng(900);
    let mut windows = vec![(0.0, 5.0), (5000.0, 60.0)];
    while windows.len() < 20 {
        windows.push((r.gen_range(0.0..5000.0), r.gen_range(5.0..60.0)));
    }
    let w = SmoothWeight::bump();
    let mut pass = true;
    let mut min_ratio = f64::INFINITY;
    let mut calibrated = 0;
    for (t0, t) in windows {
        let eps = if t >= g.smoothed_min_t { g.smoothed_epsilon } else { 1.0 };
        calibrated += usize::from(t >= g.smoothed_min_t);
        let s = sandwich(&MomentWindow::new(t0, t).unwrap(), &w, eps).unwrap();
        pass &= s.second_moment.check.holds && s.upper.holds && s.lower.holds;
        min_ratio = min_ratio.min(s.second_moment.result.value / t);
    }
    outcome(
        pass,
        format!("20 windows, min full/T {min_ratio:.3}, smoothed <= full on all, {calibrated} checked against T(1 - eps)"),
    )
}

fn c_alpha_boundedness() -> Outcome {
    let shapes = |n: usize| -> Vec<Vec<f64>> {
        vec![
            vec![1.0; n],
            (0..n).map(|j| if j % 2 == 0 { 1.0 } else { 2.0 }).collect(),
            (0..n).map(|j| (j + 1) as f64).collect(),
            (0..n).map(|j| (n - j) as f64 * 0.5).collect(),
            (0..n).map(|j| if j == 0 { 3.0 } else { 0.2 }).collect(),
        ]
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let mut worst = 0.0f64;
        let mut cases = 0;
        let grid: Vec<Vec<f64>> = if n == 1 {
            (0..50).map(|k| vec![10f64.powf(-1.0 + 4.0 * k as f64 / 49.0)]).collect()
        } else {
            (0..10)
                .flat_map(|k| {
                    let s = 10f64.powf(-1.0 + 3.0 * k as f64 / 9.0);
                    shapes(n).into_iter().map(move |p| p.iter().map(|v| v * s).collect())
                })
                .collect()
        };
        for y in grid {
            let alpha = AlphaParams::from_gaps(&y).unwrap();
            let c = c_alpha_integral(&alpha, WeightMode::Stirling, CAlphaOptions::default()).unwrap();
            worst = worst.max(c.result.value);
            pass &= c.result.value <= 4f64.powi(n as i32);
            cases += 1;
        }
        parts.push(format!("n={n}: {cases} points, max {worst:.4} <= {}", 4u32.pow(n as u32)));
    }
    outcome(pass, parts.join(", "))
}

fn main() -> ExitCode {
    let golden = GoldenConstants::load_default(None).expect("golden constants");
    type Criterion<'a> = (&'a str, Option<Duration>, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("r-nonnegativity", Some(Duration::from_secs(30)), Box::new(r_nonnegativity)),
        ("Q = P equivalence", Some(Duration::from_secs(60)), Box::new(q_equals_p)),
        ("volume triple agreement", Some(Duration::from_secs(120)), Box::new(volume_triple)),
        ("A_n projection identity", None, Box::new(an_projection_identity)),
        ("surrogate sandwich", None, Box::new(surrogate_sandwich)),
        ("exact vs Stirling gamma weight", None, Box::new(|| gamma_weight(&golden))),
        ("bounded sums", None, Box::new(|| bounded_sums(&golden))),
        ("hahb bound", None, Box::new(hahb)),
        ("second moment", Some(Duration::from_secs(120)), Box::new(|| second_moment_windows(&golden))),
        ("c_alpha boundedness", None, Box::new(c_alpha_boundedness)),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| run()));
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if let Some(limit) = limit {
            if elapsed > *limit {
                pass = false;
                detail.push_str(&format!("; runtime limit {} s exceeded", limit.as_secs()));
            }
        }
        failures += usize::from(!pass);
        println!(
            "{} {:>2} {name} ({:.1} s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
