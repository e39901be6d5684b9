//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line before asserting.  Failing criteria are genuine findings
//! about the truncated series and the closed-form asymptotics, not wiring
//! errors; the assertions are kept at their stated tolerances on purpose.

use std::time::Instant;

use scatter::asymptotics;
use scatter::localwave::{self, Region};
use scatter::matching::{
    lambda_triad, master_residual, solution_for_radius, solve_matching_radius, solve_stage,
};
use scatter::oracle::{integrate_regular, OracleConfig};
use scatter::potentials::PotentialClass;
use scatter::series::{self, Cutoff, SeriesOptions};

fn report(n: u32, name: &str, ok: bool, started: Instant, detail: &str) {
    println!(
        "criterion {n} ({name}): {} [{:.2}s] {detail}",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_1_matching_point_identity() {
    let t0 = Instant::now();
    let k = 1.5;
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for tag in PotentialClass::all_tags() {
        let class = PotentialClass::from_tag(tag).unwrap();
        for l in [0u32, 1, 2] {
            for r in [2.0, 5.0, 10.0, 50.0] {
                let sol = solution_for_radius(&class, k, l, r).unwrap();
                for region in [Region::Epsilon, Region::Tau] {
                    let k2 = localwave::k_squared(region, &sol, 1.0)
                        .unwrap()
                        .linear()
                        .unwrap();
                    let rel = (k2 * 8.0 * r * r - 1.0).abs();
                    if rel > worst {
                        worst = rel;
                        worst_at = format!("{tag} l={l} R={r} {region:?}");
                    }
                }
            }
        }
    }
    let ok = worst <= 1e-12;
    report(
        1,
        "matching-point identity",
        ok,
        t0,
        &format!("worst rel {worst:.2e} at {worst_at}"),
    );
    assert!(ok);
}

#[test]
fn criterion_2_master_round_trip() {
    let t0 = Instant::now();
    let k = 1.5;
    let mut worst_rt = 0.0f64;
    let mut worst_res = 0.0f64;
    for tag in PotentialClass::all_tags() {
        let class = PotentialClass::from_tag(tag).unwrap();
        for l in [0u32, 1, 2] {
            let triad = lambda_triad(l);
            for r in [2.0, 5.0, 10.0, 50.0] {
                let s = solve_stage(&class, k, &triad, r).unwrap();
                let r_back = solve_matching_radius(&class, k, &triad, s).unwrap();
                worst_rt = worst_rt.max((r_back - r).abs() / r);
                // scale-free residual is residual / max(1, k^2 R^2)
                worst_res = worst_res.max(master_residual(&class, k, &triad, r_back, s).abs());
            }
        }
    }
    let ok = worst_rt <= 1e-9 && worst_res <= 1e-12;
    report(
        2,
        "Master-equation round trip",
        ok,
        t0,
        &format!("worst round trip {worst_rt:.2e}, worst residual {worst_res:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_3_wronskian_checks() {
    let t0 = Instant::now();
    let k = 1.0;
    let mut worst = 0.0f64;
    let mut spread = 0.0f64;
    for tag in ["EEE", "PPP"] {
        let class = PotentialClass::from_tag(tag).unwrap();
        for r in [3.0, 5.0, 8.0] {
            let sol = solution_for_radius(&class, k, 0, r).unwrap();
            let target = -2.0 * k * r;
            let mut vals = Vec::new();
            for t in [0.5, 0.65, 0.8, 0.9, 0.97] {
                let w = series::wronskian_check_eps(&sol, t).unwrap();
                worst = worst.max((w - target).abs() / target.abs());
                vals.push(w);
            }
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            spread = spread.max((hi - lo) / target.abs());
        }
    }
    let ok = worst <= 1e-8 && spread <= 1e-8;
    report(
        3,
        "order-0 Wronskian",
        ok,
        t0,
        &format!("worst rel {worst:.2e}, constancy {spread:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_4_derivative_oracle() {
    let t0 = Instant::now();
    let k = 1.0;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for tag in PotentialClass::all_tags() {
        let class = PotentialClass::from_tag(tag).unwrap();
        let sol = solution_for_radius(&class, k, 1, 5.0).unwrap();
        for (region, lo, hi) in [(Region::Epsilon, 0.55, 0.98), (Region::Tau, 1.02, 3.0)] {
            for i in 0..20 {
                let t = lo + (hi - lo) * i as f64 / 19.0;
                let k2 = localwave::k_squared(region, &sol, t).unwrap();
                if k2.linear().is_none() || k2.log_abs < -600.0 {
                    continue; // out of the representable window
                }
                let pt = localwave::evaluate(region, &sol, t).unwrap();
                // analytic ratios are (K^2)'/K^2 and (K^2)''/K^2; the
                // finite-difference probe works on ln K^2, where
                //   d ln K^2 / dt   = ratio1
                //   d^2 ln K^2/dt^2 = ratio2 - ratio1^2
                let (d1, d2) = (pt.ratio1, pt.ratio2 - pt.ratio1 * pt.ratio1);
                let h = 1e-4 * t;
                let lv = |x: f64| {
                    let v = localwave::k_squared(region, &sol, x).unwrap();
                    v.log_abs
                };
                let f1 = (lv(t - 2.0 * h) - 8.0 * lv(t - h) + 8.0 * lv(t + h) - lv(t + 2.0 * h))
                    / (12.0 * h);
                let f2 = (-lv(t - 2.0 * h) + 16.0 * lv(t - h) - 30.0 * lv(t) + 16.0 * lv(t + h)
                    - lv(t + 2.0 * h))
                    / (12.0 * h * h);
                let scale1 = d1.abs().max(1.0);
                let scale2 = d2.abs().max(1.0);
                worst = worst
                    .max((d1 - f1).abs() / scale1)
                    .max((d2 - f2).abs() / scale2);
                checked += 1;
            }
        }
    }
    let ok = worst <= 1e-6 && checked >= 8 * 20;
    report(
        4,
        "derivative oracle",
        ok,
        t0,
        &format!("worst rel {worst:.2e} over {checked} points"),
    );
    assert!(ok);
}

#[test]
fn criterion_5_convergence_integrals() {
    let t0 = Instant::now();
    let k = 1.0;
    let mut all_finite = true;
    let mut monotone = true;
    let mut worst_growth = 0.0f64;
    for tag in PotentialClass::all_tags() {
        let class = PotentialClass::from_tag(tag).unwrap();
        for l in [0u32, 1] {
            let mut prev: Option<(f64, f64)> = None;
            for r in [5.0, 10.0, 20.0] {
                let sol = solution_for_radius(&class, k, l, r).unwrap();
                let pe = localwave::convergence_integral_eps(&sol, 1.0)
                    .unwrap()
                    .value;
                let pt = localwave::convergence_integral_tau(&sol, 50.0)
                    .unwrap()
                    .value;
                all_finite &= pe.is_finite() && pt.is_finite();
                if let Some((pe0, pt0)) = prev {
                    if pe >= pe0 || pt >= pt0 {
                        monotone = false;
                        worst_growth = worst_growth.max(pe / pe0).max(pt / pt0);
                    }
                }
                prev = Some((pe, pt));
            }
        }
    }
    // asymptotic quadrature of the universal outer form at l=1, R=2:
    // R int_1^inf |p| dt -> lambda_tau^2 / (2 k^2 R) = 0.5
    let triad = lambda_triad(1);
    let r_match = 2.0;
    let mut p_inf = 0.0;
    let n = 200_000;
    let t_hi = 2000.0;
    for i in 0..n {
        let a = 1.0 + (t_hi - 1.0) * i as f64 / n as f64;
        let b = 1.0 + (t_hi - 1.0) * (i + 1) as f64 / n as f64;
        let m = 0.5 * (a + b);
        p_inf += (b - a) * asymptotics::asymptotic_discriminant_tau(k, &triad, r_match, m).abs();
    }
    p_inf *= r_match;
    let quad_ok = (p_inf - 0.5).abs() / 0.5 <= 0.05;

    let ok = all_finite && monotone && quad_ok;
    report(5, "convergence integrals", ok, t0, &format!(
        "finite: {all_finite}; monotone decrease in R: {monotone} (worst growth factor {worst_growth:.1}); asymptotic P_tau(inf) = {p_inf:.4} (target 0.5)"
    ));
    assert!(ok, "the inner integral grows with R: the residual term develops a one-signed boundary-layer spike at t = 1 whose area scales like R^4");
}

#[test]
fn criterion_6_reduction_to_leading_term() {
    let t0 = Instant::now();
    let k = 1.0;
    let cutoff = Cutoff::new(2, 2);
    let opts = SeriesOptions::default();
    let mut monotone = true;
    let mut small_at_40 = true;
    let mut detail = String::new();
    for tag in PotentialClass::all_tags() {
        let class = PotentialClass::from_tag(tag).unwrap();
        let mut prev = f64::INFINITY;
        let mut last = f64::NAN;
        for r in [5.0, 10.0, 20.0, 40.0] {
            let sol = solution_for_radius(&class, k, 0, r).unwrap();
            let dev = series::leading_vs_full_deviation(&sol, cutoff, &opts).unwrap();
            if dev >= prev {
                monotone = false;
            }
            prev = dev;
            last = dev;
        }
        if last > 0.01 {
            small_at_40 = false;
        }
        detail.push_str(&format!("{tag}:{last:.1e} "));
    }
    let ok = monotone && small_at_40;
    report(
        6,
        "reduction to leading term",
        ok,
        t0,
        &format!("deviation at R=40 per class: {detail}"),
    );
    assert!(
        ok,
        "the higher iterates are driven by the same boundary-layer spike and do not shrink with R"
    );
}

#[test]
fn criterion_7_oracle_equivalence() {
    let t0 = Instant::now();
    let k = 1.0;
    let cutoff = Cutoff::new(2, 2);
    let opts = SeriesOptions::default();
    let cfg = OracleConfig::default();
    let mut worst_phase = 0.0f64;
    let mut worst_wave = 0.0f64;
    for tag in ["EEE", "PPP"] {
        let class = PotentialClass::from_tag(tag).unwrap();
        for r in [3.0, 5.0, 8.0] {
            let sol = solution_for_radius(&class, k, 0, r).unwrap();
            let res = series::solve_series(&sol, cutoff, &opts).unwrap();
            let run = integrate_regular(&sol, &cfg).unwrap();
            worst_phase = worst_phase.max((res.phase.principal - run.phase.principal).abs());

            // wave functions normalised at t = 1, compared on [0.8, 3]
            let u1_series = series::wavefunction(&res, 1.0).unwrap();
            let interp = |samples: &[(f64, f64)], x: f64| -> Option<f64> {
                let i = samples.partition_point(|s| s.0 < x);
                if i == 0 || i >= samples.len() {
                    return None;
                }
                let (a, b) = (samples[i - 1], samples[i]);
                Some(a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1))
            };
            let u1_oracle = interp(&run.samples, r).unwrap();
            let mut sup = 0.0f64;
            for j in 0..=440 {
                let t = 0.8 + 2.2 * j as f64 / 440.0;
                let us = series::wavefunction(&res, t).unwrap() / u1_series;
                if let Some(uo) = interp(&run.samples, t * r) {
                    sup = sup.max((us - uo / u1_oracle).abs());
                }
            }
            worst_wave = worst_wave.max(sup);
        }
    }
    let ok = worst_phase <= 1e-2 && worst_wave <= 1e-3;
    report(
        7,
        "oracle equivalence",
        ok,
        t0,
        &format!("worst phase gap {worst_phase:.2e} rad, worst wave sup gap {worst_wave:.2e}"),
    );
    assert!(ok, "the cutoff-(2,2) partial sum is far from converged at these radii; the same solver agrees with the oracle at cutoff (10,10)");
}

#[test]
fn criterion_8_asymptotic_formula_approach() {
    let t0 = Instant::now();
    let k = 1.0;
    let t = 0.5;
    let mut monotone = true;
    let mut detail = String::new();
    for tag in PotentialClass::all_tags() {
        let class = PotentialClass::from_tag(tag).unwrap();
        let mut prev = f64::INFINITY;
        let mut cls_ok = true;
        for r in [10.0, 20.0, 40.0, 80.0] {
            let sol = solution_for_radius(&class, k, 0, r).unwrap();
            let p_exact = localwave::residual_delta(Region::Epsilon, &sol, t).unwrap()
                / (r * (0.5
                    * localwave::k_squared(Region::Epsilon, &sol, t)
                        .unwrap()
                        .log_abs)
                    .exp());
            let p_asym =
                asymptotics::asymptotic_discriminant_eps(&class, k, &sol.triad, r, t).unwrap();
            let dev = (p_asym.log_abs - p_exact.abs().ln()).abs();
            if dev >= prev {
                cls_ok = false;
            }
            prev = dev;
        }
        if !cls_ok {
            monotone = false;
            detail.push_str(&format!("{tag} not decreasing; "));
        }
    }
    // spot value
    let class = PotentialClass::from_tag("EEE").unwrap();
    let sol = solution_for_radius(&class, k, 0, 10.0).unwrap();
    let spot = asymptotics::asymptotic_discriminant_eps(&class, k, &sol.triad, 10.0, t)
        .unwrap()
        .linear_lossy();
    let spot_ok = (spot - (-1.887e-4)).abs() / 1.887e-4 <= 0.20;

    let ok = monotone && spot_ok;
    report(
        8,
        "asymptotic formula approach",
        ok,
        t0,
        &format!("{detail}spot value {spot:.4e} (target -1.887e-4)"),
    );
    assert!(
        ok,
        "for the P-core classes with exponentially large Master ratio the \
         second-order core expansion leaves an O(1) log gap at fixed t"
    );
}

#[test]
fn criterion_9_double_limit_witness() {
    let t0 = Instant::now();
    let k = 1.0;
    let triad = lambda_triad(0);
    let mut ordered = true;
    for tag in PotentialClass::all_tags() {
        let class = PotentialClass::from_tag(tag).unwrap();
        let mut prev_g2 = f64::INFINITY;
        let mut prev_s = 0.0f64;
        for r in [10.0, 100.0, 1000.0] {
            let s = solve_stage(&class, k, &triad, r).unwrap();
            let g2 = class.coupling(r).unwrap();
            if !(g2 < prev_g2 && s > prev_s) {
                ordered = false;
            }
            prev_g2 = g2;
            prev_s = s;
        }
    }
    let class = PotentialClass::from_tag("EEE").unwrap();
    let s = solve_stage(&class, k, &triad, 1000.0).unwrap();
    let ratio = s * class.params.r1 / (1000.0 * 1000.0);
    let ratio_ok = (ratio - 2.0).abs() <= 1e-3;
    let ok = ordered && ratio_ok;
    report(
        9,
        "double-limit witness",
        ok,
        t0,
        &format!("orderings hold: {ordered}; EEE stage ratio at R=1e3: {ratio:.6}"),
    );
    assert!(ok);
}
