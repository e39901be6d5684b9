//! The eight-member potential family.
//!
//! Every potential is a product of three factors, each either exponential (E)
//! or power-law (P) in shape:
//!
//! ```text
//! g^2 U(s; r) = g^2(R) * V_core(s; r) * V_tail(r)
//! ```
//!
//! * coupling  E: `g^2 = (1/r0^2) exp(-R/r0)`      P: `(1/r0^2) (r0/R)^sigma0`
//! * core      E: `V_core = exp(r1 s / r)`          P: `((r1 + r)/r)^s`
//! * tail      E: `V_tail = exp(-r/r2)`             P: `(r2/(r2 + r))^sigma2`
//!
//! The coupling collapses with the matching radius `R` while the core grows
//! without bound as `r -> 0`, which is the whole point of the construction:
//! an infinitesimal overall strength attached to an arbitrarily strong
//! short-range singularity.  Because the core factor alone can reach
//! `exp(several thousand)`, the primary interface works with natural logs and
//! offers linear values only where they are representable.

use crate::error::{Error, Result};
use crate::logval::{LogVal, LN_F64_MAX};
use serde::{Deserialize, Serialize};

/// Shape of a single factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Law {
    /// Exponential factor ("E").
    Exponential,
    /// Power-law factor ("P").
    PowerLaw,
}

impl Law {
    pub fn letter(self) -> char {
        match self {
            Law::Exponential => 'E',
            Law::PowerLaw => 'P',
        }
    }

    pub fn from_letter(c: char) -> Result<Self> {
        match c {
            'E' | 'e' => Ok(Law::Exponential),
            'P' | 'p' => Ok(Law::PowerLaw),
            other => Err(Error::InvalidInput(format!(
                "unknown factor law '{other}' (expected 'E' or 'P')"
            ))),
        }
    }
}

/// Length and exponent parameters shared by all classes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassParams {
    /// Coupling range.
    pub r0: f64,
    /// Core range.
    pub r1: f64,
    /// Tail range.
    pub r2: f64,
    /// Power-law coupling exponent (used when the coupling law is P).
    pub sigma0: f64,
    /// Power-law tail exponent (used when the tail law is P).
    pub sigma2: f64,
}

impl Default for ClassParams {
    fn default() -> Self {
        // Unit ranges; sigma2 deliberately absent-by-nonsense here so that
        // `PotentialClass::from_tag` can substitute a class-appropriate value.
        ClassParams {
            r0: 1.0,
            r1: 1.0,
            r2: 1.0,
            sigma0: 5.0,
            sigma2: f64::NAN,
        }
    }
}

/// A fully specified member of the family, named by the (coupling, core,
/// tail) law triple, e.g. "EEP".
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PotentialClass {
    pub coupling: Law,
    pub core: Law,
    pub tail: Law,
    pub params: ClassParams,
}

impl PotentialClass {
    /// Validating constructor.  Enforces positivity of the ranges and the
    /// tail-exponent floors that keep the far-field convergence integrals
    /// finite: with a P tail, `sigma2 > 8` when the core is E, `sigma2 > 2`
    /// when coupling is E and core is P, and `sigma2 > 4` when both coupling
    /// and core are P.
    pub fn new(coupling: Law, core: Law, tail: Law, params: ClassParams) -> Result<Self> {
        for (name, v) in [("r0", params.r0), ("r1", params.r1), ("r2", params.r2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if coupling == Law::PowerLaw && !(params.sigma0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma0 must be positive for a power-law coupling, got {}",
                params.sigma0
            )));
        }
        if tail == Law::PowerLaw {
            let floor = match (coupling, core) {
                (_, Law::Exponential) => 8.0,
                (Law::Exponential, Law::PowerLaw) => 2.0,
                (Law::PowerLaw, Law::PowerLaw) => 4.0,
            };
            if !(params.sigma2 > floor) {
                return Err(Error::InvalidInput(format!(
                    "sigma2 must exceed {floor} for class {}{}{}, got {}",
                    coupling.letter(),
                    core.letter(),
                    tail.letter(),
                    params.sigma2
                )));
            }
        }
        Ok(PotentialClass {
            coupling,
            core,
            tail,
            params,
        })
    }

    /// Build from a three-letter tag such as "EEP" with explicit parameters.
    pub fn from_tag_with(tag: &str, params: ClassParams) -> Result<Self> {
        let chars: Vec<char> = tag.chars().collect();
        if chars.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "class tag must have three letters, got '{tag}'"
            )));
        }
        let coupling = Law::from_letter(chars[0])?;
        let core = Law::from_letter(chars[1])?;
        let tail = Law::from_letter(chars[2])?;
        let mut params = params;
        if tail == Law::PowerLaw && params.sigma2.is_nan() {
            // Smallest "comfortably valid" defaults per class.
            params.sigma2 = match (coupling, core) {
                (_, Law::Exponential) => 9.0,
                (Law::Exponential, Law::PowerLaw) => 3.0,
                (Law::PowerLaw, Law::PowerLaw) => 5.0,
            };
        }
        if tail == Law::Exponential && params.sigma2.is_nan() {
            params.sigma2 = 0.0; // unused
        }
        Self::new(coupling, core, tail, params)
    }

    /// Build from a tag with unit ranges and default exponents.
    ///
    /// ```
    /// use scatter::potentials::PotentialClass;
    ///
    /// let class = PotentialClass::from_tag("EPP").unwrap();
    /// assert_eq!(class.tag(), "EPP");
    /// // power-law tails get a class-dependent default exponent
    /// assert_eq!(class.params.sigma2, 3.0);
    /// // the coupling collapses as the matching radius grows
    /// assert!(class.coupling(20.0).unwrap() < class.coupling(10.0).unwrap());
    /// ```
    pub fn from_tag(tag: &str) -> Result<Self> {
        Self::from_tag_with(tag, ClassParams::default())
    }

    /// The three-letter tag of this class.
    pub fn tag(&self) -> String {
        [
            self.coupling.letter(),
            self.core.letter(),
            self.tail.letter(),
        ]
        .iter()
        .collect()
    }

    /// All eight tags in the canonical order used throughout the reports.
    pub fn all_tags() -> [&'static str; 8] {
        ["EEE", "EEP", "EPE", "EPP", "PEE", "PEP", "PPE", "PPP"]
    }

    // ---- coupling ---------------------------------------------------------

    /// ln g^2(R).
    pub fn log_coupling(&self, r_match: f64) -> f64 {
        let p = &self.params;
        match self.coupling {
            Law::Exponential => -2.0 * p.r0.ln() - r_match / p.r0,
            Law::PowerLaw => -2.0 * p.r0.ln() + p.sigma0 * (p.r0 / r_match).ln(),
        }
    }

    /// g^2(R) itself; collapses to zero as the matching radius grows.
    pub fn coupling(&self, r_match: f64) -> Result<f64> {
        if !(r_match > 0.0) {
            return Err(Error::InvalidInput(format!(
                "matching radius must be positive, got {r_match}"
            )));
        }
        Ok(self.log_coupling(r_match).exp())
    }

    // ---- the three log factors -------------------------------------------

    /// ln V_core(s; r).
    pub fn log_core(&self, stage: f64, r: f64) -> f64 {
        stage * self.core_exponent(r)
    }

    /// c(r) with V_core = exp(s c(r)): `r1/r` (E) or `ln(1 + r1/r)` (P).
    pub fn core_exponent(&self, r: f64) -> f64 {
        let r1 = self.params.r1;
        match self.core {
            Law::Exponential => r1 / r,
            Law::PowerLaw => (r1 / r).ln_1p(),
        }
    }

    /// ln V_tail(r).
    pub fn log_tail(&self, r: f64) -> f64 {
        let p = &self.params;
        match self.tail {
            Law::Exponential => -r / p.r2,
            Law::PowerLaw => -p.sigma2 * (r / p.r2).ln_1p(),
        }
    }

    /// ln of the full potential g^2 U(s; r) at radius `r` for matching radius
    /// `r_match` and stage `s`.
    pub fn log_potential(&self, stage: f64, r_match: f64, r: f64) -> f64 {
        self.log_coupling(r_match) + self.log_core(stage, r) + self.log_tail(r)
    }

    /// Potential value in signed-log form, with a linear view when it fits
    /// in an `f64`.
    pub fn potential_value(&self, stage: f64, r_match: f64, r: f64) -> Result<LogVal> {
        if !(r > 0.0) || !(r_match > 0.0) {
            return Err(Error::InvalidInput(format!(
                "radii must be positive (r = {r}, R = {r_match})"
            )));
        }
        if !stage.is_finite() || stage < 0.0 {
            return Err(Error::InvalidInput(format!(
                "stage must be finite and non-negative, got {stage}"
            )));
        }
        Ok(LogVal::new(1.0, self.log_potential(stage, r_match, r)))
    }

    // ---- derivatives of ln(g^2 U) with respect to r ----------------------

    /// d/dr of ln V_core exponent structure: returns c'(r).
    pub(crate) fn core_exponent_d1(&self, r: f64) -> f64 {
        let r1 = self.params.r1;
        match self.core {
            Law::Exponential => -r1 / (r * r),
            Law::PowerLaw => -r1 / (r * (r + r1)),
        }
    }

    /// c''(r).
    pub(crate) fn core_exponent_d2(&self, r: f64) -> f64 {
        let r1 = self.params.r1;
        match self.core {
            Law::Exponential => 2.0 * r1 / (r * r * r),
            Law::PowerLaw => r1 * (2.0 * r + r1) / (r * r * (r + r1) * (r + r1)),
        }
    }

    /// d/dr ln V_tail.
    pub(crate) fn tail_d1(&self, r: f64) -> f64 {
        let p = &self.params;
        match self.tail {
            Law::Exponential => -1.0 / p.r2,
            Law::PowerLaw => -p.sigma2 / (p.r2 + r),
        }
    }

    /// d^2/dr^2 ln V_tail.
    pub(crate) fn tail_d2(&self, r: f64) -> f64 {
        let p = &self.params;
        match self.tail {
            Law::Exponential => 0.0,
            Law::PowerLaw => p.sigma2 / ((p.r2 + r) * (p.r2 + r)),
        }
    }

    /// d/dt of ln(g^2 U) along the scaled coordinate t = r/R.
    pub fn dlog_potential_dt(&self, stage: f64, r_match: f64, t: f64) -> f64 {
        let r = r_match * t;
        r_match * (stage * self.core_exponent_d1(r) + self.tail_d1(r))
    }

    /// d^2/dt^2 of ln(g^2 U).
    pub fn d2log_potential_dt2(&self, stage: f64, r_match: f64, t: f64) -> f64 {
        let r = r_match * t;
        r_match * r_match * (stage * self.core_exponent_d2(r) + self.tail_d2(r))
    }

    /// True when `exp(log)` of the potential at these arguments stays within
    /// `f64` range.
    pub fn representable(&self, stage: f64, r_match: f64, r: f64) -> bool {
        self.log_potential(stage, r_match, r) < LN_F64_MAX
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_coupling_collapses() {
        let c = PotentialClass::from_tag("EEE").unwrap();
        // (1/r0^2) e^{-R/r0} with r0 = 1, R = 2
        assert_relative_eq!(
            c.coupling(2.0).unwrap(),
            (-2.0f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn power_coupling_collapses() {
        let mut params = ClassParams::default();
        params.sigma0 = 2.0;
        let c = PotentialClass::from_tag_with("PEE", params).unwrap();
        // (1/r0^2)(r0/R)^2 with r0 = 1, R = 10
        assert_relative_eq!(c.coupling(10.0).unwrap(), 0.01, max_relative = 1e-14);
    }

    #[test]
    fn potential_value_matches_hand_computation() {
        // EEE, unit ranges, s = 1, R = 1, r = 1: e^{-1} * e^{1} * e^{-1} = e^{-1}
        let c = PotentialClass::from_tag("EEE").unwrap();
        let v = c.potential_value(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v.linear().unwrap(), (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn log_and_linear_agree_when_representable() {
        for tag in PotentialClass::all_tags() {
            let c = PotentialClass::from_tag(tag).unwrap();
            for &(s, rm, r) in &[(3.0, 2.0, 0.7), (10.0, 5.0, 2.5), (40.0, 8.0, 6.0)] {
                let v = c.potential_value(s, rm, r).unwrap();
                if let Some(lin) = v.linear() {
                    // rebuild linearly factor by factor
                    let p = &c.params;
                    let g2 = c.coupling(rm).unwrap();
                    let core = match c.core {
                        Law::Exponential => (p.r1 * s / r).exp(),
                        Law::PowerLaw => ((p.r1 + r) / r).powf(s),
                    };
                    let tail = match c.tail {
                        Law::Exponential => (-r / p.r2).exp(),
                        Law::PowerLaw => (p.r2 / (p.r2 + r)).powf(p.sigma2),
                    };
                    assert_relative_eq!(lin, g2 * core * tail, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn huge_core_stays_in_log_form() {
        let c = PotentialClass::from_tag("EEE").unwrap();
        let v = c.potential_value(5000.0, 50.0, 0.5).unwrap();
        assert!(v.linear().is_none());
        assert!(v.log_abs > 9000.0);
    }

    #[test]
    fn sigma2_floors_are_enforced() {
        let mut p = ClassParams::default();
        p.sigma2 = 7.0;
        assert!(PotentialClass::from_tag_with("EEP", p).is_err()); // needs > 8
        p.sigma2 = 8.5;
        assert!(PotentialClass::from_tag_with("EEP", p).is_ok());
        p.sigma2 = 1.5;
        assert!(PotentialClass::from_tag_with("EPP", p).is_err()); // needs > 2
        p.sigma2 = 2.5;
        assert!(PotentialClass::from_tag_with("EPP", p).is_ok());
        p.sigma2 = 3.5;
        assert!(PotentialClass::from_tag_with("PPP", p).is_err()); // needs > 4
        p.sigma2 = 4.5;
        assert!(PotentialClass::from_tag_with("PPP", p).is_ok());
    }

    #[test]
    fn log_derivatives_match_finite_differences() {
        for tag in PotentialClass::all_tags() {
            let c = PotentialClass::from_tag(tag).unwrap();
            let (s, rm) = (25.0, 4.0);
            for &t in &[0.4, 0.9, 1.3, 2.5] {
                let h = 1e-5;
                let f = |tt: f64| c.log_potential(s, rm, rm * tt);
                let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
                let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                assert_relative_eq!(c.dlog_potential_dt(s, rm, t), d1, max_relative = 1e-8);
                assert_relative_eq!(
                    c.d2log_potential_dt2(s, rm, t),
                    d2,
                    max_relative = 1e-4,
                    epsilon = 1e-6
                );
            }
        }
    }
}
