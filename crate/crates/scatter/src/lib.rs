//! Quantum scattering from potentials that are simultaneously driven to
//! infinitesimal coupling and infinite short-range singularity.
//!
//! The coupling `g^2(R)` collapses and the core exponent `s` blows up as the
//! matching radius `R` grows, tied together by a balance ("Master") equation
//! at `R`.  The limit leaves behind a nontrivial scatterer.  This crate
//! provides:
//!
//! - the eight potential classes (exponential/power-law laws for coupling,
//!   core and tail) in [`potentials`],
//! - the balance equation and the effective angular-strength triad in
//!   [`matching`],
//! - local wave numbers and the convergence-driving residual term in
//!   [`localwave`],
//! - the iterative wavefunction construction and phase-shift extraction in
//!   [`series`],
//! - closed-form large-`R` behaviour in [`asymptotics`],
//! - an independent direct integrator for cross-checks in [`oracle`].
//!
//! # Example
//!
//! ```
//! use scatter::potentials::PotentialClass;
//! use scatter::matching::solution_for_radius;
//!
//! let class = PotentialClass::from_tag("EEE").unwrap();
//! let sol = solution_for_radius(&class, 1.0, 0, 2.0).unwrap();
//! // the balance fixes the core exponent in closed form
//! assert!((sol.stage - (8.0 + 2.0 * (31.0f64 / 32.0).ln())).abs() < 1e-12);
//! ```

pub mod asymptotics;
pub mod bessel;
pub mod cli;
pub mod error;
pub mod localwave;
pub mod logval;
pub mod matching;
pub mod oracle;
pub mod potentials;
pub mod quad;
pub mod report;
pub mod rootfind;
pub mod series;

pub use error::{Error, Result};
