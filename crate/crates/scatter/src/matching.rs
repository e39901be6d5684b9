//! The Master equation: pinning stage and matching radius together.
//!
//! At the matching radius `R` the potential is required to balance the
//! kinetic term exactly:
//!
//! ```text
//! k^2 R^2 - g^2(R) U(s; R) R^2 - lambda^2 = 0
//! ```
//!
//! where `lambda^2` is the mean of the two effective angular momentum
//! strengths used inside and outside the matching point.  Splitting the
//! centrifugal strength this way (instead of using `l(l+1)` on both sides)
//! keeps both local wave numbers real at `t = 1` with the exact common value
//! `1/(8R^2)` — the wave equation never develops a classical turning point in
//! either region.

use crate::error::{Error, Result};
use crate::potentials::PotentialClass;
use crate::rootfind;
use serde::{Deserialize, Serialize};

/// The three effective angular strengths attached to angular momentum `l`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AngularTriad {
    pub l: u32,
    /// Inner-region strength: `(l + 1/2)^2`.
    pub lambda_eps_sq: f64,
    /// Outer-region strength: `l (l + 1)`.
    pub lambda_tau_sq: f64,
    /// Matching strength: the arithmetic mean of the two.
    pub lambda_sq: f64,
}

/// Build the triad for a given partial wave.
///
/// The identity `lambda_eps^2 - lambda^2 = lambda^2 - lambda_tau^2 = 1/8`
/// holds exactly for every `l`.
///
/// ```
/// let triad = scatter::matching::lambda_triad(2);
/// assert_eq!(triad.lambda_eps_sq, 6.25);
/// assert_eq!(triad.lambda_tau_sq, 6.0);
/// assert_eq!(triad.lambda_eps_sq - triad.lambda_sq, 0.125);
/// ```
pub fn lambda_triad(l: u32) -> AngularTriad {
    let lf = l as f64;
    let eps = (lf + 0.5) * (lf + 0.5);
    let tau = lf * (lf + 1.0);
    AngularTriad {
        l,
        lambda_eps_sq: eps,
        lambda_tau_sq: tau,
        lambda_sq: 0.5 * (eps + tau),
    }
}

/// A solved matching configuration: everything downstream (local wave
/// numbers, series, asymptotics) is evaluated on one of these.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchingSolution {
    pub class: PotentialClass,
    pub k: f64,
    pub triad: AngularTriad,
    /// Matching radius R.
    pub r_match: f64,
    /// Stage s(R).
    pub stage: f64,
    /// Coupling strength g^2(R).
    pub g2: f64,
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidInput(format!(
            "wave number k must be positive, got {k}"
        )));
    }
    Ok(())
}

/// Master equation residual `k^2 R^2 - g^2 U(s; R) R^2 - lambda^2`, reported
/// in units of `max(1, k^2 R^2)` so that tolerances are scale-free.
pub fn master_residual(
    class: &PotentialClass,
    k: f64,
    triad: &AngularTriad,
    r_match: f64,
    stage: f64,
) -> f64 {
    let scale = (k * k * r_match * r_match).max(1.0);
    let pot = class.log_potential(stage, r_match, r_match).exp();
    (k * k * r_match * r_match - pot * r_match * r_match - triad.lambda_sq) / scale
}

/// Solve the Master equation for the stage at a given matching radius.
///
/// Because all three potential factors are log-linear in `s` at fixed radius
/// the solution is closed-form:
///
/// ```text
/// s = [ ln(k^2 - lambda^2/R^2) - ln g^2(R) - ln V_tail(R) ] / c(R)
/// ```
///
/// with `V_core = exp(s c(r))`.  Fails with [`Error::NoSolution`] when
/// `k^2 R^2 <= lambda^2` (no real balance point) and with
/// [`Error::NegativeStage`] when the balance would need a negative stage.
pub fn solve_stage(
    class: &PotentialClass,
    k: f64,
    triad: &AngularTriad,
    r_match: f64,
) -> Result<f64> {
    check_k(k)?;
    if !(r_match > 0.0) {
        return Err(Error::InvalidInput(format!(
            "matching radius must be positive, got {r_match}"
        )));
    }
    let kin = k * k - triad.lambda_sq / (r_match * r_match);
    if kin <= 0.0 {
        return Err(Error::NoSolution(format!(
            "k^2 R^2 = {:.6e} does not exceed lambda^2 = {:.6e}",
            k * k * r_match * r_match,
            triad.lambda_sq
        )));
    }
    let num = kin.ln() - class.log_coupling(r_match) - class.log_tail(r_match);
    let s = num / class.core_exponent(r_match);
    if s <= 0.0 {
        return Err(Error::NegativeStage(format!(
            "balance at R = {r_match} would need stage {s:.6e}"
        )));
    }
    Ok(s)
}

/// Solve the Master equation for the matching radius at a given stage.
///
/// The residual is monotone in `R` through the collapsing coupling, so a
/// geometric scan from a small radius followed by safeguarded bisection is
/// enough.  Postcondition: the returned radius reproduces the stage to
/// `1e-12` in the scale-free Master residual.
pub fn solve_matching_radius(
    class: &PotentialClass,
    k: f64,
    triad: &AngularTriad,
    stage: f64,
) -> Result<f64> {
    check_k(k)?;
    if !(stage > 0.0) || !stage.is_finite() {
        return Err(Error::InvalidInput(format!(
            "stage must be positive, got {stage}"
        )));
    }
    // Root of f(R) = ln(potential at R) - ln(k^2 - lambda^2/R^2),
    // defined for R > lambda/k.  The potential side falls off (coupling
    // collapse beats the core) while the kinetic side rises to ln k^2.
    let r_min = if triad.lambda_sq > 0.0 {
        triad.lambda_sq.sqrt() / k
    } else {
        0.0
    };
    let f = |r: f64| {
        let kin = k * k - triad.lambda_sq / (r * r);
        class.log_potential(stage, r, r) - kin.ln()
    };
    // start just above the centrifugal barrier edge
    let start = (r_min * 1.0000001).max(1e-8);
    let r = rootfind::scan_and_solve(f, start, 1.25, 400, 1e-15)?;
    // polish once more with a tight bracket around r
    let r =
        rootfind::bracketed_root(f, r * (1.0 - 1e-6), r * (1.0 + 1e-6), 1e-16, 200).unwrap_or(r);
    let res = master_residual(class, k, triad, r, stage);
    if res.abs() > 1e-12 {
        return Err(Error::RootFind(format!(
            "matching radius residual {res:.3e} exceeds 1e-12 at R = {r:.12e}"
        )));
    }
    Ok(r)
}

/// Bundle a full solution from a prescribed matching radius.
pub fn solution_for_radius(
    class: &PotentialClass,
    k: f64,
    l: u32,
    r_match: f64,
) -> Result<MatchingSolution> {
    let triad = lambda_triad(l);
    let stage = solve_stage(class, k, &triad, r_match)?;
    Ok(MatchingSolution {
        class: *class,
        k,
        triad,
        r_match,
        stage,
        g2: class.coupling(r_match)?,
    })
}

/// Bundle a full solution from a prescribed stage (the "give me the coupling
/// and singularity strength, find where they balance" direction).
pub fn solution_for_stage(
    class: &PotentialClass,
    k: f64,
    l: u32,
    stage: f64,
) -> Result<MatchingSolution> {
    let triad = lambda_triad(l);
    let r_match = solve_matching_radius(class, k, &triad, stage)?;
    Ok(MatchingSolution {
        class: *class,
        k,
        triad,
        r_match,
        stage,
        g2: class.coupling(r_match)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triad_identity_all_l() {
        for l in 0..25 {
            let t = lambda_triad(l);
            assert_relative_eq!(t.lambda_eps_sq - t.lambda_sq, 0.125, epsilon = 1e-15);
            assert_relative_eq!(t.lambda_sq - t.lambda_tau_sq, 0.125, epsilon = 1e-15);
        }
    }

    #[test]
    fn eee_stage_closed_form() {
        // EEE, unit ranges, k = 1, l = 0, R = 2:
        // kin = 1 - (1/8)/4 = 31/32; ln g^2 = -2, ln V_tail = -2, c(R) = 1/2
        // s = (ln(31/32) + 4) / (1/2) = 8 + 2 ln(31/32)
        let c = PotentialClass::from_tag("EEE").unwrap();
        let t = lambda_triad(0);
        let s = solve_stage(&c, 1.0, &t, 2.0).unwrap();
        assert_relative_eq!(s, 8.0 + 2.0 * (31.0f64 / 32.0).ln(), max_relative = 1e-14);
        // and the residual at the solution vanishes
        assert!(master_residual(&c, 1.0, &t, 2.0, s).abs() < 1e-14);
    }

    #[test]
    fn no_solution_below_barrier() {
        let c = PotentialClass::from_tag("EEE").unwrap();
        let t = lambda_triad(2);
        // k^2 R^2 = 1 < lambda^2 = 6.125
        assert!(matches!(
            solve_stage(&c, 1.0, &t, 1.0),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn round_trip_radius_stage() {
        for tag in PotentialClass::all_tags() {
            let c = PotentialClass::from_tag(tag).unwrap();
            for l in [0u32, 1] {
                let t = lambda_triad(l);
                for &r in &[2.0, 5.0, 11.0] {
                    let s = solve_stage(&c, 1.0, &t, r).unwrap();
                    let r_back = solve_matching_radius(&c, 1.0, &t, s).unwrap();
                    assert_relative_eq!(r_back, r, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn stage_grows_like_r_squared_for_e_coupling_e_core() {
        // EEE: s(R) r1 / R^2 -> 1/r0 + 1/r2 = 2 at unit ranges
        let c = PotentialClass::from_tag("EEE").unwrap();
        let t = lambda_triad(0);
        let r = 1000.0;
        let s = solve_stage(&c, 1.0, &t, r).unwrap();
        assert_relative_eq!(s / (r * r), 2.0, max_relative = 1e-2);
    }

    #[test]
    fn large_radius_solutions_stay_finite() {
        let c = PotentialClass::from_tag("PPP").unwrap();
        let t = lambda_triad(1);
        let s = solve_stage(&c, 1.0, &t, 50.0).unwrap();
        assert!(s.is_finite() && s > 0.0);
        let r_back = solve_matching_radius(&c, 1.0, &t, s).unwrap();
        assert_relative_eq!(r_back, 50.0, max_relative = 1e-8);
    }
}
