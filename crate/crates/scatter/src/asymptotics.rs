//! Large-R asymptotic forms, class by class.
//!
//! In the double limit (coupling to zero, singularity strength to infinity,
//! tied together by the Master equation) every class admits closed-form
//! limits for the stage, the inner local wave number and the inner
//! discriminant.  The asymptotic Master equation always reads
//!
//! ```text
//! exp(r1 s(R) / R) -> M(R)
//! ```
//!
//! with a class-specific right-hand side `M`; the limiting inner wave number
//! is `ln K_eps^2 ~ ln M * (1/t - 1)`-shaped, and the limiting discriminant
//! follows from the leading term of the WKB residual,
//! `Delta ~ -(1/16) (d ln K^2/dt)^2`:
//!
//! ```text
//! p_eps(t) -> -(Lbar^2 / (16 k R)) M^{-(1/2)(1/t - 1)} T(t)
//! ```
//!
//! where `Lbar = ln M / t^2 + R/r2` and `T = exp((R/2r2)(t-1))` for an
//! exponential tail, `Lbar = ln M / t^2 + sigma2/t` and `T = t^{sigma2/2}`
//! for a power-law tail.  For the all-exponential class the limit keeps
//! every term of the Master equation exactly; the remaining classes share
//! the same normalisation so that all eight limits are mutually consistent
//! and directly comparable against the exact discriminant.
//!
//! The outer region is class-universal: the interaction contribution
//! vanishes and
//!
//! ```text
//! p_tau(t) -> -3 lambda_tau^2 / (2 k^2 R^2 t^4)
//! ```
//!
//! defined with an extra factor `k R` relative to `Delta_tau / (R K_tau)`;
//! the universality tests divide it out.

use crate::error::{Error, Result};
use crate::localwave::Region;
use crate::logval::LogVal;
use crate::matching::{AngularTriad, MatchingSolution};
use crate::potentials::{Law, PotentialClass};

/// ln M(R): the log of the class's asymptotic Master right-hand side.
fn log_master_rhs(
    class: &PotentialClass,
    k: f64,
    triad: &AngularTriad,
    r_match: f64,
) -> Result<f64> {
    let p = &class.params;
    // Energy factor: the E-coupling/E-core classes keep the centrifugal
    // correction in their limit; the others drop it, which only perturbs
    // the stage at O(ln R / R) relative order.
    let keeps_lambda = class.coupling == Law::Exponential && class.core == Law::Exponential;
    let kin = if keeps_lambda {
        let v = k * k - triad.lambda_sq / (r_match * r_match);
        if v <= 0.0 {
            return Err(Error::PreAsymptotic(format!(
                "k^2 R^2 = {:.3e} below lambda^2",
                k * k * r_match * r_match
            )));
        }
        v.ln()
    } else {
        (k * k).ln()
    };
    let coupling = match class.coupling {
        Law::Exponential => r_match / p.r0,
        Law::PowerLaw => p.sigma0 * (r_match / p.r0).ln(),
    };
    let tail = match class.tail {
        Law::Exponential => r_match / p.r2,
        Law::PowerLaw => p.sigma2 * (r_match / p.r2).ln(),
    };
    Ok(kin + 2.0 * p.r0.ln() + coupling + tail)
}

/// Asymptotic stage `s(R) = (R / r1) ln M(R)`.
///
/// Exact (to rounding) for the EEE class, where the limit keeps every
/// term of the Master equation; an `O(r1/R)`-relative approximation for the
/// power-law cores and an `O(ln R / R)` one where the tail or centrifugal
/// terms are dropped.
pub fn asymptotic_stage(
    class: &PotentialClass,
    k: f64,
    triad: &AngularTriad,
    r_match: f64,
) -> Result<f64> {
    let ln_m = log_master_rhs(class, k, triad, r_match)?;
    if ln_m <= 0.0 {
        return Err(Error::PreAsymptotic(format!(
            "asymptotic Master RHS below 1 at R = {r_match} (ln M = {ln_m:.3e})"
        )));
    }
    Ok(r_match / class.params.r1 * ln_m)
}

/// Asymptotic local wave number squared.
///
/// Region epsilon: `ln K^2 = ln k^2 + (1/t - 1) ln M + tail shape`, the
/// class-specific limit.  Region tau: the interaction contribution
/// vanishes for every class and `K_tau^2 -> k^2 - lambda_tau^2 / (R^2 t^2)`.
pub fn asymptotic_k_squared(
    class: &PotentialClass,
    region: Region,
    k: f64,
    triad: &AngularTriad,
    r_match: f64,
    t: f64,
) -> Result<LogVal> {
    match region {
        Region::Tau => {
            if t < 1.0 {
                return Err(Error::Domain(format!("t = {t} below the tau region")));
            }
            Ok(LogVal::from_linear(
                k * k - triad.lambda_tau_sq / (r_match * r_match * t * t),
            ))
        }
        Region::Epsilon => {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Domain(format!("t = {t} outside the epsilon region")));
            }
            let p = &class.params;
            let ln_m = log_master_rhs(class, k, triad, r_match)?;
            // ln K^2 = ln k^2 + (1/t - 1) ln M + tail reshaping.
            // For an E tail, replacing the Master tail R/r2 (at t = 1) by its
            // running value gives the extra exp((R/r2)(1/t - t) - (R/r2)(1/t - 1))
            // = exp((R/r2)(1 - t)) factor; for a P tail, t^{-sigma2}.
            let tail_shape = match class.tail {
                Law::Exponential => r_match / p.r2 * (1.0 - t),
                Law::PowerLaw => -p.sigma2 * t.ln(),
            };
            Ok(LogVal::new(
                1.0,
                (k * k).ln() + (1.0 / t - 1.0) * ln_m + tail_shape,
            ))
        }
    }
}

/// Asymptotic inner discriminant (signed-log form; always negative).
pub fn asymptotic_discriminant_eps(
    class: &PotentialClass,
    k: f64,
    triad: &AngularTriad,
    r_match: f64,
    t: f64,
) -> Result<LogVal> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("t = {t} outside the epsilon region")));
    }
    let p = &class.params;
    let ln_m = log_master_rhs(class, k, triad, r_match)?;
    let (lbar, log_tail_shape) = match class.tail {
        Law::Exponential => (
            ln_m / (t * t) + r_match / p.r2,
            r_match / (2.0 * p.r2) * (t - 1.0),
        ),
        Law::PowerLaw => (ln_m / (t * t) + p.sigma2 / t, 0.5 * p.sigma2 * t.ln()),
    };
    let log_abs =
        (lbar * lbar / (16.0 * k * r_match)).ln() - 0.5 * (1.0 / t - 1.0) * ln_m + log_tail_shape;
    Ok(LogVal::new(-1.0, log_abs))
}

/// The universal outer-region asymptote
/// `-3 lambda_tau^2 / (2 k^2 R^2 t^4)` (carries the extra `k R` factor
/// described in the module docs).
pub fn asymptotic_discriminant_tau(k: f64, triad: &AngularTriad, r_match: f64, t: f64) -> f64 {
    -3.0 * triad.lambda_tau_sq / (2.0 * k * k * r_match * r_match * t.powi(4))
}

/// Leading-order inner wave function `w0^+` of a matching solution evaluated
/// with the asymptotic wave number (value in signed-log form).
pub fn asymptotic_wavefunction_eps(sol: &MatchingSolution, t: f64) -> Result<LogVal> {
    let k2 = asymptotic_k_squared(
        &sol.class,
        Region::Epsilon,
        sol.k,
        &sol.triad,
        sol.r_match,
        t,
    )?;
    // amplitude (k^2/K^2)^{1/4} times exp(-Phi) with the asymptotic K:
    // Phi(t) = R int_t^1 K; integrate the closed form by quadrature.
    let lk2 = (sol.k * sol.k).ln();
    let phi = sol.r_match
        * crate::quad::integrate(
            |x| {
                asymptotic_k_squared(
                    &sol.class,
                    Region::Epsilon,
                    sol.k,
                    &sol.triad,
                    sol.r_match,
                    x,
                )
                .map(|v| (0.5 * v.log_abs).min(690.0).exp())
                .unwrap_or(0.0)
            },
            t,
            1.0,
            crate::quad::QuadOptions::default(),
        )?;
    Ok(LogVal::new(1.0, 0.25 * (lk2 - k2.log_abs) - phi))
}

/// Leading-order outer wave function with order-0 matched coefficients.
pub fn asymptotic_wavefunction_tau(
    sol: &MatchingSolution,
    c0_plus: f64,
    s0_plus: f64,
    t: f64,
) -> Result<f64> {
    crate::series::leading_term_tau(sol, c0_plus, s0_plus, t)
}

/// The class's stated order function for the stage growth.
pub fn order_function(class: &PotentialClass, r_match: f64) -> f64 {
    let p = &class.params;
    match (class.coupling, class.core, class.tail) {
        (Law::Exponential, Law::Exponential, Law::Exponential) => r_match * r_match / (p.r0 * p.r2),
        (Law::Exponential, Law::Exponential, Law::PowerLaw) => r_match * r_match / (p.r0 * p.r1),
        (Law::PowerLaw, Law::Exponential, Law::Exponential) => r_match * r_match / (p.r1 * p.r2),
        (Law::PowerLaw, Law::Exponential, Law::PowerLaw) => r_match / p.r1,
        (Law::Exponential, Law::PowerLaw, Law::Exponential) => r_match * r_match,
        (Law::Exponential, Law::PowerLaw, Law::PowerLaw) => r_match / p.r1,
        (Law::PowerLaw, Law::PowerLaw, Law::PowerLaw) => r_match / p.r1,
        (Law::PowerLaw, Law::PowerLaw, Law::Exponential) => r_match * r_match / (p.r1 * p.r2),
    }
}

/// Exact stage divided by the stated order function — the witness for the
/// double limit (bounded, with a finite limit, for the classes whose order
/// statement is an equality).
pub fn order_ratio(
    class: &PotentialClass,
    k: f64,
    triad: &AngularTriad,
    r_match: f64,
) -> Result<f64> {
    let s = crate::matching::solve_stage(class, k, triad, r_match)?;
    Ok(s / order_function(class, r_match))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{lambda_triad, solution_for_radius, solve_stage};
    use crate::potentials::PotentialClass;
    use approx::assert_relative_eq;

    #[test]
    fn eee_asymptotic_stage_is_exact() {
        let c = PotentialClass::from_tag("EEE").unwrap();
        let t = lambda_triad(0);
        for &r in &[2.0, 5.0, 20.0] {
            let exact = solve_stage(&c, 1.0, &t, r).unwrap();
            let asym = asymptotic_stage(&c, 1.0, &t, r).unwrap();
            assert_relative_eq!(asym, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn stage_ratio_tends_to_one_for_all_classes() {
        for tag in PotentialClass::all_tags() {
            let c = PotentialClass::from_tag(tag).unwrap();
            let t = lambda_triad(0);
            let ratio = |r: f64| {
                asymptotic_stage(&c, 1.0, &t, r).unwrap() / solve_stage(&c, 1.0, &t, r).unwrap()
            };
            let r1 = ratio(50.0);
            let r2 = ratio(400.0);
            assert!(
                (r2 - 1.0).abs() < (r1 - 1.0).abs() + 1e-12,
                "{tag}: ratio not improving ({r1} -> {r2})"
            );
            assert!((r2 - 1.0).abs() < 0.05, "{tag}: ratio {r2} far from 1");
        }
    }

    #[test]
    fn eee_discriminant_hand_value() {
        // R = 10, t = 0.5, unit parameters, k = 1, l = 0:
        // Lbar = 20/0.25 + 10 = 90 (+ tiny lambda correction), so
        // p ~ -(90^2/160) e^{-12.5} = -1.887e-4
        let c = PotentialClass::from_tag("EEE").unwrap();
        let t = lambda_triad(0);
        let p = asymptotic_discriminant_eps(&c, 1.0, &t, 10.0, 0.5).unwrap();
        let v = p.linear().unwrap();
        assert!((v + 1.887e-4).abs() < 0.05e-4, "got {v}");
    }

    #[test]
    fn exact_discriminant_approaches_asymptote() {
        // log-magnitude deviation at t = 0.5 shrinks as R doubles (EEE)
        let c = PotentialClass::from_tag("EEE").unwrap();
        let dev = |r: f64| {
            let sol = solution_for_radius(&c, 1.0, 0, r).unwrap();
            let exact = crate::localwave::evaluate(Region::Epsilon, &sol, 0.5)
                .unwrap()
                .p
                .log_abs;
            let asym = asymptotic_discriminant_eps(&c, 1.0, &sol.triad, r, 0.5)
                .unwrap()
                .log_abs;
            (exact - asym).abs()
        };
        assert!(dev(20.0) < dev(10.0));
        assert!(dev(40.0) < dev(20.0));
    }

    #[test]
    fn eee_order_ratio_tends_to_two() {
        let c = PotentialClass::from_tag("EEE").unwrap();
        let t = lambda_triad(0);
        let r_small = order_ratio(&c, 1.0, &t, 20.0).unwrap();
        let r_large = order_ratio(&c, 1.0, &t, 500.0).unwrap();
        assert!((r_large - 2.0).abs() < (r_small - 2.0).abs());
        assert!((r_large - 2.0).abs() < 0.02, "ratio {r_large}");
    }

    #[test]
    fn tau_asymptote_universality() {
        // Exact p_tau over the quoted asymptote, divided by its kR
        // normalisation drift, tends to 1 for every class.
        for tag in PotentialClass::all_tags() {
            let c = PotentialClass::from_tag(tag).unwrap();
            let r = 60.0;
            let sol = solution_for_radius(&c, 1.0, 1, r).unwrap();
            let t = 25.0;
            let exact = crate::localwave::evaluate(Region::Tau, &sol, t)
                .unwrap()
                .p
                .linear()
                .unwrap();
            let quoted = asymptotic_discriminant_tau(1.0, &sol.triad, r, t);
            let ratio = exact * (sol.k * r) / quoted;
            assert!((ratio - 1.0).abs() < 0.02, "{tag}: ratio {ratio}");
        }
    }

    #[test]
    fn pre_asymptotic_radius_is_rejected() {
        let c = PotentialClass::from_tag("EEE").unwrap();
        let t = lambda_triad(0);
        assert!(matches!(
            asymptotic_stage(&c, 0.1, &t, 0.05),
            Err(Error::PreAsymptotic(_)) | Err(Error::NoSolution(_))
        ));
    }
}
