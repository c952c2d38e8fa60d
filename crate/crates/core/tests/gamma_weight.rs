use std::f64::consts::{LN_2, PI};

use maassnorm_core::exponent::ExponentProfile;
use maassnorm_core::gamma_weight::{
    log_mu_weight, log_q_exact, log_q_stirling, mu_weight, q_lower_surrogate, q_upper_surrogate,
    spectral_density_exact, spectral_density_via_gamma, stade_gj_star_log, stade_glnn_log,
};
use maassnorm_core::golden::GoldenConstants;
use maassnorm_core::params::{AlphaParams, BetaParams};
use proptest::prelude::*;

const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_4;

/// ln|Γ(1/4 + iy)| from Γ(1/4) and ∏_k (1 + y²/(1/4 + k)²)^{-1/2}.
fn ln_abs_gamma_quarter(y: f64) -> f64 {
    const TERMS: usize = 400_000;
    let x = 0.25;
    let mut s = 0.0;
    for k in (0..TERMS).rev() {
        s += (y * y / ((x + k as f64) * (x + k as f64))).ln_1p();
    }
    let tail = y * y / (TERMS as f64 + x - 0.5);
    GAMMA_QUARTER.ln() - 0.5 * (s + tail)
}

/// Σ_{k<l} ln(π / cosh(π(v_k − v_l)/2)) = Σ 2 ln|Γ(1/2 + i(v_k − v_l)/2)|.
fn pair_denominator(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let y = 0.5 * (v[i] - v[j]).abs();
            // ln cosh(πy) without overflow
            let lc = PI * y + (-2.0 * PI * y).exp().ln_1p() - LN_2;
            s += PI.ln() - lc;
        }
    }
    s
}

fn a(v: &[f64]) -> AlphaParams {
    AlphaParams::new(v).unwrap()
}

fn b(v: &[f64]) -> BetaParams {
    BetaParams::new(v).unwrap()
}

#[test]
fn exact_weight_against_product_oracle() {
    let w = log_q_exact(0.0, &a(&[0.0, 0.0]), &b(&[0.0])).unwrap();
    assert!((w.log_value - (GAMMA_QUARTER.powi(4) / PI).ln()).abs() < 1e-12);
    assert!((w.value() - 55.0).abs() < 0.01);

    let w = log_q_exact(0.0, &a(&[1.0, -1.0]), &b(&[0.0])).unwrap();
    let expected = 4.0 * ln_abs_gamma_quarter(0.5) - pair_denominator(&[1.0, -1.0]);
    assert!((w.log_value - expected).abs() < 1e-9, "{} vs {expected}", w.log_value);

    for t in [-7.3, -0.6, 0.0, 2.5, 11.0] {
        let (al, be) = (a(&[3.0, 0.5, -3.5]), b(&[1.0, -1.0]));
        let mut expected = -pair_denominator(al.values()) - pair_denominator(be.values());
        for x in al.values() {
            for y in be.values() {
                expected += 2.0 * ln_abs_gamma_quarter(0.5 * (t + x + y));
            }
        }
        let got = log_q_exact(t, &al, &be).unwrap().log_value;
        assert!((got - expected).abs() < 1e-8, "t = {t}: {got} vs {expected}");
    }
}

#[test]
fn stirling_examples() {
    let (al, be) = (a(&[1.0, -1.0]), b(&[0.0]));
    assert!((log_q_stirling(0.0, &al, &be).unwrap() + LN_2).abs() < 1e-15);
    let expected = -9.0 * PI - 0.5 * (12f64.ln() + 10f64.ln());
    assert!((log_q_stirling(10.0, &al, &be).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn mu_and_spectral_density_examples() {
    assert_eq!(mu_weight(&[2.0, 0.0, -2.0]).round(), 45.0);
    assert!((mu_weight(&[2.0, 0.0, -2.0]) - 45.0).abs() < 1e-12);
    // |Γ(1/2 + i)|² / |Γ(i)|² = tanh π
    let d = spectral_density_exact(&b(&[1.0, -1.0]));
    assert!((d.log_value - PI.tanh().ln()).abs() < 1e-14);
}

#[test]
fn surrogate_examples() {
    let (al, be) = (a(&[2.0, 0.0, -2.0]), b(&[1.0, -1.0]));
    let expected = -3f64.ln() - 2.0 * LN_2;
    assert!((q_upper_surrogate(0.0, &al, &be).unwrap() - expected).abs() < 1e-14);
    let (al, be) = (a(&[1.0, -1.0]), b(&[0.0]));
    assert!((q_lower_surrogate(&al, &be).unwrap() + 3f64.ln()).abs() < 1e-14);
}

#[test]
fn stade_examples() {
    let g = stade_gj_star_log(0.0, &a(&[0.0, 0.0]), &b(&[0.0])).unwrap();
    let expected = (0.5 / PI.sqrt() * GAMMA_QUARTER * GAMMA_QUARTER).ln();
    assert!((g.log_value - expected).abs() < 1e-13);
    let g = stade_glnn_log(0.0, &a(&[0.0, 0.0]), &a(&[0.0, 0.0])).unwrap();
    assert!((g.log_value - (2.0 * PI).ln()).abs() < 1e-13);
}

/// Admissible (t, α, β) with t ∈ I_M.
fn admissible_triple() -> impl Strategy<Value = (f64, AlphaParams, BetaParams)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01f64..1000.0, n),
            prop::collection::vec(0.0f64..=1.0, n),
            0.0f64..=1.0,
        )
            .prop_map(|(y, u, v)| {
                let alpha = AlphaParams::from_gaps(&y).unwrap();
                let n = alpha.n();
                let lambda: Vec<f64> = (1..=n)
                    .map(|l| {
                        let lo = -alpha.at(n + 1 - l);
                        lo + u[l - 1] * (-alpha.at(n + 2 - l) - lo)
                    })
                    .collect();
                let beta = BetaParams::new(&lambda).unwrap();
                let im = ExponentProfile::new(&alpha, &beta).unwrap().median_interval();
                (im.lo + v * (im.hi - im.lo), alpha, beta)
            })
    })
}

/// Descending entries with consecutive gaps in [1, 1 + s].
fn spaced(m: usize, s: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, m - 1).prop_map(move |u| {
        let mut v = vec![0.0];
        for x in u {
            let last = v[v.len() - 1];
            v.push(last - 1.0 - s * x);
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn surrogate_sandwich((t, alpha, beta) in admissible_triple()) {
        let mid = ExponentProfile::new(&alpha, &beta).unwrap().rational_log(t);
        let lo = q_lower_surrogate(&alpha, &beta).unwrap();
        let hi = q_upper_surrogate(t, &alpha, &beta).unwrap();
        prop_assert!(lo <= mid + 1e-12, "{lo} > {mid}");
        prop_assert!(mid <= hi + 1e-12, "{mid} > {hi}");
    }

    #[test]
    fn mu_is_permutation_invariant(v in prop::collection::vec(-100.0f64..100.0, 2..7), seed in any::<u64>()) {
        let mut w = v.clone();
        let len = w.len();
        let mut s = seed;
        for i in (1..len).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            w.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert!((log_mu_weight(&v) - log_mu_weight(&w)).abs() <= 1e-12 * (1.0 + log_mu_weight(&v).abs()));
    }

    #[test]
    fn spectral_density_two_routes(v in prop::collection::vec(-50.0f64..50.0, 2..7)) {
        let beta = b(&v);
        prop_assume!(beta.gaps_x().iter().all(|g| *g > 1e-3));
        let x = spectral_density_exact(&beta).log_value;
        let y = spectral_density_via_gamma(&beta).log_value;
        prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn stade_reassembles_exact_weight(n in 1usize..=4, sa in 0.0f64..20.0, sb in 0.0f64..20.0, t in -30.0f64..30.0) {
        let av: Vec<f64> = (0..=n).map(|k| sa * (n as f64 / 2.0 - k as f64) + 0.3 * (k * k) as f64).collect();
        let bv: Vec<f64> = (0..n).map(|l| sb * ((n as f64 - 1.0) / 2.0 - l as f64) - 0.2 * l as f64).collect();
        let (alpha, beta) = (a(&av), b(&bv));
        let nf = n as f64;
        let g = stade_gj_star_log(t, &alpha.dual(), &beta).unwrap().log_value;
        let assembled = 2.0 * (g + nf * LN_2 + 0.25 * nf * (nf + 1.0) * PI.ln())
            - pair_denominator(alpha.values())
            - pair_denominator(beta.values());
        let direct = log_q_exact(t, &alpha, &beta).unwrap().log_value;
        prop_assert!((assembled - direct).abs() <= 1e-9 * (1.0 + direct.abs()), "{assembled} vs {direct}");
    }

    #[test]
    fn exact_minus_stirling_within_recorded_k(
        (n, av, bv) in (1usize..=6, 0.0f64..2000.0).prop_flat_map(|(n, s)| (Just(n), spaced(n + 1, s), spaced(n.max(2), s))),
        u in -1.2f64..1.2,
    ) {
        let g = GoldenConstants::load_default(None).unwrap();
        let k = g.gamma_k(n).unwrap().value;
        let bv = if n == 1 { vec![0.0] } else { bv };
        let (alpha, beta) = (a(&av), b(&bv[..n]));
        let t = u * alpha.values()[0].abs().max(1.0);
        prop_assume!(alpha.values().iter().chain(beta.values()).all(|v| v.abs() <= 1e4) && t.abs() <= 1e4);
        let d = log_q_exact(t, &alpha, &beta).unwrap().log_value - log_q_stirling(t, &alpha, &beta).unwrap();
        prop_assert!(d.abs() <= k, "n = {n}: {d} > {k}");
    }

    #[test]
    fn far_from_median_both_weights_are_tiny((_t, alpha, beta) in admissible_triple(), side in any::<bool>()) {
        let g = GoldenConstants::load_default(None).unwrap();
        let n = alpha.n();
        let k = g.gamma_k(n).unwrap().value;
        let scale = alpha.values().iter().chain(beta.values()).fold(std::f64::consts::E, |m, v| m.max(v.abs()));
        let p = ExponentProfile::new(&alpha, &beta).unwrap();
        let level = 100.0 * scale.ln();
        let w = p.level_window(level);
        let t = if side { w.hi } else { w.lo };
        prop_assume!(p.r(t) >= level);
        let exact = log_q_exact(t, &alpha, &beta).unwrap().log_value;
        let stirling = log_q_stirling(t, &alpha, &beta).unwrap();
        prop_assert!(exact <= stirling + k);
        prop_assert!(exact <= -100.0 && stirling <= -100.0, "{exact}, {stirling}");
    }
}
