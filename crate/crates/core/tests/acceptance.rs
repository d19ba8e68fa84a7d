//! Acceptance gate: one test per numbered criterion. The standard test
//! harness prints one ok/FAILED line per criterion; run with
//! `-- --nocapture` to see the measured values behind each verdict.

use drslab_core::experiments::{
    case1_profile, case1_stability, case2_profile, decay_and_weak_l2_check, fit_loglog,
    h3_global_check, oscillatory_check, profile_sobolev, random_smooth_profile, ratio_sweep,
    BumpSpec, Family, Region, DILATION_FAMILY,
};
use drslab_core::schrodinger::{band_line, euclidean_line};
use drslab_core::space::SpaceParams;
use drslab_core::spherical::{
    phi_closed_form_h3, phi_ode, phi_ode_on_grid, Accuracy, PhiEvaluator,
};
use drslab_core::transforms::{
    full_calibration, RadialGrid, SpectralGrid, Transformer,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn h3() -> SpaceParams {
    SpaceParams::real_hyperbolic(3).unwrap()
}

fn dr21() -> SpaceParams {
    SpaceParams::damek_ricci(2, 1).unwrap()
}

fn all_spaces() -> Vec<SpaceParams> {
    vec![
        SpaceParams::damek_ricci(2, 1).unwrap(),
        SpaceParams::damek_ricci(4, 3).unwrap(),
        SpaceParams::damek_ricci(6, 1).unwrap(),
        SpaceParams::real_hyperbolic(3).unwrap(),
        SpaceParams::real_hyperbolic(4).unwrap(),
    ]
}

/// Print the verdict line, then enforce it (and the runtime cap).
fn verdict(id: u32, cap_s: f64, started: Instant, pass: bool, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "[criterion {id:02}] {} {detail} ({elapsed:.1}s, cap {cap_s:.0}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id:02} FAIL: {detail}");
    assert!(
        elapsed < cap_s,
        "criterion {id:02} overran: {elapsed:.1}s >= {cap_s}s"
    );
}

#[test]
fn criterion_01_h3_closed_form_oracle() {
    let t0 = Instant::now();
    let params = h3();
    let targets: Vec<f64> = (1..=64).map(|i| 5.0 * i as f64 / 64.0).collect();
    let mut worst = 0.0f64;
    for lambda in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        let ode = phi_ode_on_grid(&params, lambda, &targets).expect("ode");
        for (j, &s) in targets.iter().enumerate() {
            let exact = phi_closed_form_h3(lambda, s).value;
            worst = worst.max((ode[j].value - exact).abs());
        }
    }
    verdict(
        1,
        10.0,
        t0,
        worst < 1e-8,
        &format!("max |phi_ode - closed form| = {worst:.2e} (tol 1e-8)"),
    );
}

#[test]
fn criterion_02_cross_method_containment() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut total = 0u32;
    let mut contained = 0u32;
    for params in all_spaces() {
        let ev = PhiEvaluator::new(params, full_calibration(&params));
        for _ in 0..200 {
            let lambda = rng.gen_range(0.0f64..100.0).max(1e-3);
            let s = rng.gen_range(0.0f64..6.0).max(1e-3);
            let fast = ev.eval(lambda, s, Accuracy::Fast);
            let oracle = phi_ode(&params, lambda, s).expect("ode");
            total += 1;
            if (fast.value - oracle.value).abs() <= fast.error_bound + oracle.error_bound {
                contained += 1;
            }
        }
    }
    let frac = contained as f64 / total as f64;
    verdict(
        2,
        120.0,
        t0,
        frac >= 0.99,
        &format!("containment {contained}/{total} = {:.3} (need >= 0.99)", frac),
    );
}

#[test]
fn criterion_03_plancherel_round_trip() {
    let t0 = Instant::now();
    let mut worst_rt = 0.0f64;
    let mut worst_iso = 0.0f64;
    for params in all_spaces() {
        // window sized to the random family: its spatial envelopes fall
        // below 1e-10 by s = 12, and the node budget keeps the panel
        // density of the default 2048-to-8 grid
        let radial = RadialGrid::new(12.0, 12.0, 3072);
        let spectral = SpectralGrid::new(12.0, 12.0);
        let tr = Transformer::with_grids(params, radial, spectral, Accuracy::Best);
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        for _ in 0..20 {
            let profile = random_smooth_profile(&mut rng, tr.spectral.lambda_max);
            let ghat: Vec<f64> = tr.spectral.nodes.iter().map(|&l| profile.eval(l)).collect();
            let g = tr.inverse(&ghat);
            let ghat2 = tr.forward(&g);
            let diff: Vec<f64> = ghat2.iter().zip(&ghat).map(|(a, b)| a - b).collect();
            let denom = tr.plancherel_inner(&ghat, &ghat);
            worst_rt = worst_rt.max((tr.plancherel_inner(&diff, &diff) / denom).sqrt());
            worst_iso = worst_iso.max((tr.space_l2_sq(&g) - denom).abs() / denom);
        }
    }
    verdict(
        3,
        60.0,
        t0,
        worst_rt < 1e-6 && worst_iso < 1e-6,
        &format!("round trip {worst_rt:.2e}, isometry {worst_iso:.2e} (tol 1e-6)"),
    );
}

#[test]
fn criterion_04_h3_transference_identity() {
    let t0 = Instant::now();
    let params = h3();
    let cal = full_calibration(&params);
    let c_cal = cal.c_cal.expect("calibrated");
    let ev = PhiEvaluator::new(params, cal);
    let radii: Vec<f64> = (1..=128).map(|i| 6.0 * i as f64 / 128.0).collect();
    let times = [1e-3, 0.02, 0.1, 0.45, 0.9];
    let band = (0.0, 12.0);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let profile = random_smooth_profile(&mut rng, band.1);
        for &t in &times {
            for &s in &radii {
                // hyperbolic side and Euclidean side on deliberately
                // different panel layouts
                let lhs = band_line(&ev, c_cal, &|l| profile.eval(l), band, s, t, 1.5, Accuracy::Fast)
                    .eval(t);
                let t0_line = euclidean_line(3, &|l| profile.eval(l), band, s, t, 0.7);
                let phase = num_complex::Complex64::new(0.0, t).exp();
                let rhs = (c_cal / 2.0) * phase * (s / s.sinh()) * t0_line.eval(t);
                let err = (lhs - rhs).norm() / (1.0 + lhs.norm());
                worst = worst.max(err);
            }
        }
    }
    verdict(
        4,
        60.0,
        t0,
        worst < 1e-6,
        &format!("worst pointwise deviation {worst:.2e} (tol 1e-6)"),
    );
}

#[test]
fn criterion_05_case1_sobolev_slopes() {
    let t0 = Instant::now();
    let params = dr21();
    let ns: Vec<f64> = vec![256.0, 512.0, 1024.0, 2048.0, 4096.0];
    let mut detail = String::new();
    let mut pass = true;
    for alpha in [0.0, 0.15, 0.25, 0.5] {
        let norms: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let p = case1_profile(&params, n as u32, &BumpSpec::unit()).unwrap();
                profile_sobolev(&params, &p, alpha)
            })
            .collect();
        let (slope, _) = fit_loglog(&ns, &norms).unwrap();
        let expect = alpha - 0.25;
        if (slope - expect).abs() >= 0.05 {
            pass = false;
        }
        detail.push_str(&format!("alpha {alpha}: {slope:.4} (want {expect:.2}); "));
    }
    verdict(5, 120.0, t0, pass, detail.trim_end());
}

#[test]
fn criterion_06_case1_lower_bound_stability() {
    let t0 = Instant::now();
    let params = dr21();
    let stab = case1_stability(&params, &[256, 512, 1024, 2048, 4096], 0.1).expect("stability");
    let pass = stab.spread < 0.25 && (stab.channel_slope + 1.0).abs() < 0.2;
    verdict(
        6,
        600.0,
        t0,
        pass,
        &format!(
            "annulus min spread {:.3} (< 0.25), error channel slope {:.3} (want -1 +- 0.2)",
            stab.spread, stab.channel_slope
        ),
    );
}

#[test]
fn criterion_07_case2_exponents() {
    let t0 = Instant::now();
    let alpha = 0.5;
    let ns: Vec<f64> = (3..=10).map(|k| 2f64.powi(k)).collect();
    let region = Region::ShrinkingBall { epsilon: 0.4 };
    let mut detail = String::new();
    let mut pass = true;
    for params in [h3(), dr21()] {
        let nf = params.n() as f64;
        let q_star = 2.0 * nf / (nf - 2.0 * alpha);
        // Sobolev slope
        let sob: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let p = case2_profile(&params, n as u32, &BumpSpec::band()).unwrap();
                profile_sobolev(&params, &p, alpha)
            })
            .collect();
        let (sob_slope, _) = fit_loglog(&ns, &sob).unwrap();
        if (sob_slope - (alpha + nf / 2.0)).abs() >= 0.05 {
            pass = false;
        }
        detail.push_str(&format!(
            "{}: sobolev {sob_slope:.3} (want {:.2}); ",
            params.label(),
            alpha + nf / 2.0
        ));
        // L^q slopes straddling the boundary q* = 2n/(n - 2 alpha)
        for q in [2.0, 8.0] {
            let report = ratio_sweep(&params, Family::Case2, q, alpha, &ns, region).expect("sweep");
            let lqs: Vec<f64> = report.entries.iter().map(|e| e.lq_norm).collect();
            let (lq_slope, _) = fit_loglog(&ns, &lqs).unwrap();
            let want = nf * (1.0 - 1.0 / q);
            if (lq_slope - want).abs() >= 0.1 || report.inconclusive {
                pass = false;
            }
            let ratio_sign_ok = if q > q_star {
                report.fitted_slope > 0.0
            } else {
                report.fitted_slope < 0.0
            };
            if !ratio_sign_ok {
                pass = false;
            }
            detail.push_str(&format!(
                "q={q}: L^q {lq_slope:.3} (want {want:.3}), ratio {:.3} (q* {q_star:.2}); ",
                report.fitted_slope
            ));
        }
    }
    verdict(7, 900.0, t0, pass, detail.trim_end());
}

#[test]
fn criterion_08_oscillatory_kernel_stability() {
    let t0 = Instant::now();
    let params = dr21();
    let report = oscillatory_check(&params, 2.1, 5.0, 500, 100.0, 2024);
    let base = report.max_normalized;
    let refine_dev = (report.max_normalized_refined / base - 1.0).abs();
    let extend_dev = (report.max_normalized_extended / base - 1.0).abs();
    let pass = !report.inconclusive && refine_dev < 0.10 && extend_dev < 0.10;
    verdict(
        8,
        300.0,
        t0,
        pass,
        &format!(
            "max {base:.4}; refine dev {refine_dev:.2e}, extension dev {extend_dev:.2e} (< 0.10), conclusive {}",
            !report.inconclusive
        ),
    );
}

#[test]
fn criterion_09_decay_and_weak_l2() {
    let t0 = Instant::now();
    let report = decay_and_weak_l2_check(&dr21(), 0.6);
    let pass = report.decay_spread < 4.0 && report.weak_spread < 4.0 && report.truncation_ok;
    verdict(
        9,
        300.0,
        t0,
        pass,
        &format!(
            "decay constant spread {:.2}, weak-L2 spread {:.2} (< 4), truncation ok {}",
            report.decay_spread, report.weak_spread, report.truncation_ok
        ),
    );
}

#[test]
fn criterion_10_h3_global_contrast() {
    let t0 = Instant::now();
    let report = h3_global_check(0.6, &DILATION_FAMILY);
    let pass = report.q2_spread < 2.0
        && report.q15_monotone
        && report.q15_growth > 4.0
        && report.identity_rel_err < 1e-6;
    verdict(
        10,
        300.0,
        t0,
        pass,
        &format!(
            "q=2 spread {:.2} (< 2), q=1.5 growth {:.2} (> 4, monotone {}), norm identity {:.1e}",
            report.q2_spread, report.q15_growth, report.q15_monotone, report.identity_rel_err
        ),
    );
}
