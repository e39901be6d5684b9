//! Local wave numbers, WKB residuals and convergence integrals.
//!
//! On the scaled coordinate `t = r/R` the radial problem splits at `t = 1`
//! into an inner region (epsilon, barrier-dominated) and an outer region
//! (tau, oscillatory).  Each carries its own local wave number:
//!
//! ```text
//! K_eps^2(t) = W(t) + lambda_eps^2/(R^2 t^2) - k^2     (t <= 1)
//! K_tau^2(t) = k^2 - W(t) - lambda_tau^2/(R^2 t^2)     (t >= 1)
//! ```
//!
//! with `W(t) = g^2 U(s; R t)`.  At the matching point both equal
//! `1/(8 R^2)` exactly — that is what the split centrifugal strengths buy:
//!
//! ```
//! use scatter::localwave::{self, Region};
//! use scatter::matching::solution_for_radius;
//! use scatter::potentials::PotentialClass;
//!
//! let class = PotentialClass::from_tag("PEP").unwrap();
//! let sol = solution_for_radius(&class, 1.0, 1, 10.0).unwrap();
//! for region in [Region::Epsilon, Region::Tau] {
//!     let k2 = localwave::k_squared(region, &sol, 1.0).unwrap();
//!     assert!((k2.linear().unwrap() * 8.0 * 100.0 - 1.0).abs() < 1e-12);
//! }
//! ```
//!
//! All evaluation is organised around `ln W`, which can reach thousands in
//! the inner region.  Derivatives of `K^2` come from the analytic log
//! derivatives of the potential factors, never from differencing.

use crate::error::{Error, Result};
use crate::logval::LogVal;
use crate::matching::MatchingSolution;
use crate::quad::{self, QuadOptions};
use serde::{Deserialize, Serialize};

/// The two sides of the matching point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Inner, barrier-dominated region `0 < t <= 1`.
    Epsilon,
    /// Outer, oscillatory region `t >= 1`.
    Tau,
}

/// Whether the potential term participates (test hook: dropping it isolates
/// the centrifugal structure).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PotentialTerm {
    Full,
    #[cfg_attr(not(test), allow(dead_code))]
    Removed,
}

/// Everything the series machinery needs at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct WaveNumberPoint {
    pub t: f64,
    /// K_gamma^2 in signed-log form.
    pub k2: LogVal,
    /// (K^2)'/K^2 — the log derivative along t.
    pub ratio1: f64,
    /// (K^2)''/K^2.
    pub ratio2: f64,
    /// WKB residual Delta_gamma(t).
    pub delta: f64,
    /// Discriminant p_gamma = Delta / (R K).
    pub p: LogVal,
}

fn centrifugal(region: Region, sol: &MatchingSolution) -> f64 {
    match region {
        Region::Epsilon => sol.triad.lambda_eps_sq,
        Region::Tau => sol.triad.lambda_tau_sq,
    }
}

fn check_t(region: Region, t: f64) -> Result<()> {
    match region {
        Region::Epsilon if t > 0.0 && t <= 1.0 + 1e-12 => Ok(()),
        Region::Tau if t >= 1.0 - 1e-12 => Ok(()),
        _ => Err(Error::Domain(format!(
            "t = {t} outside the {region:?} region"
        ))),
    }
}

/// Threshold above which `ln W` arithmetic switches to the ratio form.
const LOG_SPLIT: f64 = 60.0;

pub(crate) fn evaluate_with(
    region: Region,
    sol: &MatchingSolution,
    t: f64,
    term: PotentialTerm,
) -> Result<WaveNumberPoint> {
    check_t(region, t)?;
    let r_match = sol.r_match;
    let k2 = sol.k * sol.k;
    let lam2 = centrifugal(region, sol);
    let a = lam2 / (r_match * r_match * t * t); // centrifugal term
    let ap = -2.0 * a / t; // d/dt
    let app = 6.0 * a / (t * t); // d^2/dt^2

    // Potential log value and its t-derivatives.
    let (lw, l1, l2) = match term {
        PotentialTerm::Full => (
            sol.class.log_potential(sol.stage, r_match, r_match * t),
            sol.class.dlog_potential_dt(sol.stage, r_match, t),
            sol.class.d2log_potential_dt2(sol.stage, r_match, t),
        ),
        PotentialTerm::Removed => (f64::NEG_INFINITY, 0.0, 0.0),
    };

    // K^2, (K^2)'/K^2 and (K^2)''/K^2, organised to stay finite when W is
    // astronomically large.
    //
    // At the matching point itself the balance equation pins
    // `K^2 = (lambda_eps^2 - lambda^2)/R^2 = (lambda^2 - lambda_tau^2)/R^2
    //      = 1/(8 R^2)` exactly, in both regions.  Evaluating the closed form
    // instead of the generic difference avoids the catastrophic cancellation
    // `k^2 - W - a` (the naive form loses ~log10(8 k^2 R^2) digits).
    let (k2_val, ratio1, ratio2) = if t == 1.0 && matches!(term, PotentialTerm::Full) {
        let v = 0.125 / (r_match * r_match);
        let w1 = k2 - sol.triad.lambda_sq / (r_match * r_match); // W(R) by balance
        let (d1, d2) = match region {
            Region::Epsilon => (w1 * l1 + ap, w1 * (l1 * l1 + l2) + app),
            Region::Tau => (-(w1 * l1 + ap), -(w1 * (l1 * l1 + l2) + app)),
        };
        (LogVal::from_linear(v), d1 / v, d2 / v)
    } else {
        match region {
            Region::Epsilon => {
                if lw > LOG_SPLIT {
                    // work relative to W: K^2/W = 1 + (A - k^2) e^{-lw}
                    let e = (-lw).exp();
                    let rel = 1.0 + (a - k2) * e;
                    let d1_over_w = l1 + ap * e;
                    let d2_over_w = (l1 * l1 + l2) + app * e;
                    (
                        LogVal::new(rel.signum(), lw + rel.abs().ln()),
                        d1_over_w / rel,
                        d2_over_w / rel,
                    )
                } else {
                    let w = lw.exp(); // may underflow to 0; harmless
                    let v = w + a - k2;
                    let d1 = w * l1 + ap;
                    let d2 = w * (l1 * l1 + l2) + app;
                    (LogVal::from_linear(v), d1 / v, d2 / v)
                }
            }
            Region::Tau => {
                let w = lw.exp();
                let v = k2 - w - a;
                let d1 = -(w * l1 + ap);
                let d2 = -(w * (l1 * l1 + l2) + app);
                (LogVal::from_linear(v), d1 / v, d2 / v)
            }
        }
    };

    // Residual: Delta = -(5/16)(K^2'/K^2)^2 + (1/4) K^2''/K^2 - c/t^2,
    // where c = lambda_gamma^2 - l(l+1) (exactly 1/4 in epsilon, 0 in tau).
    let c_term = lam2 - sol.triad.lambda_tau_sq;
    let delta = -(5.0 / 16.0) * ratio1 * ratio1 + 0.25 * ratio2 - c_term / (t * t);

    // Discriminant p = Delta / (R K); requires K^2 > 0.
    let p = if k2_val.is_positive() {
        let d = LogVal::from_linear(delta);
        LogVal::new(d.sign, d.log_abs - r_match.ln() - 0.5 * k2_val.log_abs)
    } else {
        LogVal::zero()
    };

    Ok(WaveNumberPoint {
        t,
        k2: k2_val,
        ratio1,
        ratio2,
        delta,
        p,
    })
}

/// Full evaluation at one point.
pub fn evaluate(region: Region, sol: &MatchingSolution, t: f64) -> Result<WaveNumberPoint> {
    evaluate_with(region, sol, t, PotentialTerm::Full)
}

/// The squared local wave number `K_gamma^2(t)` in signed-log form.
pub fn k_squared(region: Region, sol: &MatchingSolution, t: f64) -> Result<LogVal> {
    Ok(evaluate(region, sol, t)?.k2)
}

/// Analytic first and second t-derivatives of `K^2`, as plain floats
/// (saturating to infinity when the value leaves `f64` range).
pub fn k_squared_derivatives(region: Region, sol: &MatchingSolution, t: f64) -> Result<(f64, f64)> {
    let pt = evaluate(region, sol, t)?;
    let k2 = pt.k2.linear_lossy();
    Ok((pt.ratio1 * k2, pt.ratio2 * k2))
}

/// The WKB residual `Delta_gamma(t)`.
pub fn residual_delta(region: Region, sol: &MatchingSolution, t: f64) -> Result<f64> {
    Ok(evaluate(region, sol, t)?.delta)
}

/// The discriminant `p_gamma(t) = Delta_gamma / (R K_gamma)`.
///
/// Fails with a domain error when `K^2 <= 0` at `t` (cannot happen on a
/// genuine matching solution, where both regions stay classically allowed).
pub fn discriminant(region: Region, sol: &MatchingSolution, t: f64) -> Result<f64> {
    let pt = evaluate(region, sol, t)?;
    if !pt.k2.is_positive() {
        return Err(Error::Domain(format!(
            "K^2 <= 0 at t = {t}; discriminant undefined"
        )));
    }
    Ok(pt.p.linear_lossy())
}

/// Result of a convergence integral `P = R \int |p| dt`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConvergenceIntegral {
    pub value: f64,
    /// Inner cutoff actually used (epsilon region) or the outer limit (tau).
    pub t_inner: f64,
    /// Crude bound on what the truncated piece could contribute.
    pub truncation_bound: f64,
}

/// `P_eps(t_end) = R \int_0^{t_end} |p_eps| dt`.
///
/// The lower limit 0 is realised by cutting off where `ln |p|` drops below
/// the representability floor; the discarded piece is bounded and reported.
pub fn convergence_integral_eps(sol: &MatchingSolution, t_end: f64) -> Result<ConvergenceIntegral> {
    if !(t_end > 0.0 && t_end <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon-region integral needs 0 < t_end <= 1, got {t_end}"
        )));
    }
    let log_p = |t: f64| {
        evaluate(Region::Epsilon, sol, t)
            .map(|p| p.p.log_abs)
            .unwrap_or(f64::NEG_INFINITY)
    };
    // march down geometrically until the integrand is numerically zero
    let mut t_inner = t_end;
    while t_inner > 1e-9 && log_p(t_inner * 0.8) > -745.0 {
        t_inner *= 0.8;
    }
    t_inner *= 0.8;
    t_inner = t_inner.max(1e-9);

    let mut breaks = vec![t_inner];
    // graded refinement toward the matching point, where the residual spikes
    for j in (1..=9).rev() {
        let b = t_end - (t_end - t_inner) * 10f64.powi(-(9 - j) - 1);
        if b > *breaks.last().unwrap() && b < t_end {
            breaks.push(b);
        }
    }
    breaks.push(t_end);
    let value = sol.r_match
        * quad::integrate_adaptive(
            |t| log_p(t).exp(),
            &breaks,
            QuadOptions {
                abs_tol: 1e-10,
                rel_tol: 1e-7,
                max_panels: 4000,
            },
        )?;
    Ok(ConvergenceIntegral {
        value,
        t_inner,
        truncation_bound: sol.r_match * t_inner * log_p(t_inner).exp(),
    })
}

/// `P_tau(t_end) = R \int_1^{t_end} |p_tau| dt`.
pub fn convergence_integral_tau(sol: &MatchingSolution, t_end: f64) -> Result<ConvergenceIntegral> {
    if !(t_end > 1.0) {
        return Err(Error::InvalidInput(format!(
            "tau-region integral needs t_end > 1, got {t_end}"
        )));
    }
    let log_p = |t: f64| {
        evaluate(Region::Tau, sol, t)
            .map(|p| p.p.log_abs)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let mut breaks = vec![1.0];
    for j in 1..=9 {
        let b = 1.0 + (t_end - 1.0) * 10f64.powi(j - 9);
        if b > *breaks.last().unwrap() && b < t_end {
            breaks.push(b);
        }
    }
    breaks.push(t_end);
    let value = sol.r_match
        * quad::integrate_adaptive(
            |t| log_p(t).exp(),
            &breaks,
            QuadOptions {
                abs_tol: 1e-10,
                rel_tol: 1e-7,
                max_panels: 4000,
            },
        )?;
    Ok(ConvergenceIntegral {
        value,
        t_inner: t_end,
        truncation_bound: 0.0,
    })
}

/// Dispatch by region, matching the two functions above.
pub fn convergence_integral(
    region: Region,
    sol: &MatchingSolution,
    t_end: f64,
) -> Result<ConvergenceIntegral> {
    match region {
        Region::Epsilon => convergence_integral_eps(sol, t_end),
        Region::Tau => convergence_integral_tau(sol, t_end),
    }
}

/// A sampled profile of one region, ready for CSV output.
#[derive(Debug, Clone)]
pub struct LocalWaveProfile {
    pub region: Region,
    pub samples: Vec<WaveNumberPoint>,
}

/// Sample the region quantities on a caller-supplied grid.
pub fn profile(region: Region, sol: &MatchingSolution, grid: &[f64]) -> Result<LocalWaveProfile> {
    let samples = grid
        .iter()
        .map(|&t| evaluate(region, sol, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalWaveProfile { region, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::solution_for_radius;
    use crate::potentials::PotentialClass;
    use approx::assert_relative_eq;

    fn sol(tag: &str, k: f64, l: u32, r: f64) -> MatchingSolution {
        let c = PotentialClass::from_tag(tag).unwrap();
        solution_for_radius(&c, k, l, r).unwrap()
    }

    #[test]
    fn matching_point_identity() {
        // Both regions reach exactly 1/(8 R^2) at t = 1.
        for tag in PotentialClass::all_tags() {
            for l in [0u32, 1, 2] {
                for r in [2.0, 5.0, 10.0] {
                    let k = 1.5; // keeps k^2 R^2 above lambda^2 for l = 2, R = 2
                    let s = sol(tag, k, l, r);
                    let target = 1.0 / (8.0 * r * r);
                    for region in [Region::Epsilon, Region::Tau] {
                        let v = k_squared(region, &s, 1.0).unwrap().linear().unwrap();
                        assert_relative_eq!(v, target, max_relative = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn eps_k_squared_hand_value() {
        // EEE, k=1, l=0, R=2, t=0.5: W = e^{-2} e^{s} e^{-1} = e^{s-3},
        // s = 8 + 2 ln(31/32); K^2 = W + (1/4)/(4*0.25) - 1
        let s = sol("EEE", 1.0, 0, 2.0);
        let w = (s.stage - 3.0).exp();
        let expect = w + 0.25 / (4.0 * 0.25) - 1.0;
        let v = k_squared(Region::Epsilon, &s, 0.5)
            .unwrap()
            .linear()
            .unwrap();
        assert_relative_eq!(v, expect, max_relative = 1e-12);
    }

    #[test]
    fn tau_k_squared_approaches_k2() {
        let s = sol("EEE", 1.0, 1, 5.0);
        let v = k_squared(Region::Tau, &s, 40.0).unwrap().linear().unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn removed_potential_reduces_to_centrifugal() {
        let s = sol("EEE", 1.0, 1, 2.0);
        let pt = evaluate_with(Region::Tau, &s, 1.5, PotentialTerm::Removed).unwrap();
        let expect = 1.0 - 2.0 / (4.0 * 2.25);
        assert_relative_eq!(pt.k2.linear().unwrap(), expect, max_relative = 1e-14);
        // and its analytic derivative: d/dt [-lambda_tau^2/(R^2 t^2)] = 2 lambda_tau^2/(R^2 t^3)
        let d1 = pt.ratio1 * pt.k2.linear().unwrap();
        assert_relative_eq!(d1, 2.0 * 2.0 / (4.0 * 1.5f64.powi(3)), max_relative = 1e-13);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for tag in ["EEE", "PEP", "EPP", "PPE"] {
            let s = sol(tag, 1.0, 1, 4.0);
            for (region, ts) in [
                (Region::Epsilon, [0.6, 0.8, 0.95].as_slice()),
                (Region::Tau, [1.1, 1.6, 2.5].as_slice()),
            ] {
                for &t in ts {
                    let h = 1e-5;
                    let f = |tt: f64| {
                        let p = evaluate(region, &s, tt).unwrap();
                        p.k2.sign * p.k2.log_abs.exp()
                    };
                    let pt = evaluate(region, &s, t).unwrap();
                    let k2 = f(t);
                    let fd1 = (f(t + h) - f(t - h)) / (2.0 * h);
                    assert_relative_eq!(pt.ratio1 * k2, fd1, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn eps_residual_centrifugal_term() {
        // The region-specific constant (lambda_eps^2 - l(l+1)) equals 1/4 for
        // every l, so with the potential removed and l chosen so that the
        // centrifugal K^2 terms cancel structure, the -c/t^2 term contributes
        // -1/(4 t^2) = -1 at t = 0.5.
        let s = sol("EEE", 1.0, 3, 12.0);
        let c_term = s.triad.lambda_eps_sq - s.triad.lambda_tau_sq;
        assert_relative_eq!(c_term, 0.25, epsilon = 1e-15);
        assert_relative_eq!(-c_term / (0.5 * 0.5), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tau_discriminant_free_limit() {
        // Potential removed, large t: p_tau -> -(3/2) lambda_tau^2 / (k^3 R^3 t^4)
        let s = sol("EEE", 1.0, 1, 2.0);
        let t = 60.0;
        let pt = evaluate_with(Region::Tau, &s, t, PotentialTerm::Removed).unwrap();
        let expect = -1.5 * s.triad.lambda_tau_sq / (s.r_match.powi(3) * t.powi(4));
        assert_relative_eq!(pt.p.linear().unwrap(), expect, max_relative = 2e-3);
    }

    #[test]
    fn free_tau_discriminant_vanishes_for_s_wave() {
        let s = sol("EEE", 1.0, 0, 2.0);
        let pt = evaluate_with(Region::Tau, &s, 3.0, PotentialTerm::Removed).unwrap();
        assert!(pt.p.linear().unwrap().abs() < 1e-14);
    }

    #[test]
    fn convergence_integrals_are_finite() {
        let s = sol("EEE", 1.0, 0, 5.0);
        let pe = convergence_integral_eps(&s, 1.0).unwrap();
        let pt = convergence_integral_tau(&s, 50.0).unwrap();
        assert!(pe.value.is_finite() && pe.value > 0.0);
        assert!(pt.value.is_finite() && pt.value > 0.0);
    }

    #[test]
    fn deep_region_is_log_stable() {
        // R = 30, t = 0.05 puts ln W near 1170; everything must stay finite.
        let s = sol("EEE", 1.0, 0, 30.0);
        let pt = evaluate(Region::Epsilon, &s, 0.05).unwrap();
        assert!(pt.k2.log_abs > 1000.0, "ln K^2 = {}", pt.k2.log_abs);
        assert!(pt.ratio1.is_finite());
        assert!(pt.delta.is_finite());
        // p ~ Delta / (R K) is double-exponentially small here
        assert!(pt.p.linear().unwrap().abs() < 1e-100);
    }
}
