//! Safeguarded scalar root finding: Illinois-damped regula falsi inside a
//! bisection bracket.

use crate::error::{Error, Result};

/// Find a root of `f` in `[a, b]`, where `f(a)` and `f(b)` must have opposite
/// signs.
///
/// Plain secant/regula-falsi stalls badly when one endpoint value dwarfs the
/// other (common here: logarithms of the potential span hundreds of decades).
/// The Illinois modification halves the stored value of an endpoint that is
/// retained twice in a row, which restores guaranteed bracket shrinkage and
/// superlinear convergence.
pub fn bracketed_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootFind(format!(
            "no sign change on [{a:.6e}, {b:.6e}] (f = {fa:.3e}, {fb:.3e})"
        )));
    }

    let mut retained = 0i8; // -1: kept a last time, +1: kept b
    for _ in 0..max_iter {
        let mut x = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        if !x.is_finite() || x <= a || x >= b {
            x = mid;
        }
        let fx = f(x);
        if fx == 0.0 || (b - a) < xtol * (1.0 + x.abs()) {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if retained == 1 {
                fb *= 0.5;
            }
            retained = 1;
        } else {
            b = x;
            fb = fx;
            if retained == -1 {
                fa *= 0.5;
            }
            retained = -1;
        }
    }
    Err(Error::RootFind(format!(
        "no convergence in {max_iter} iterations; bracket [{a:.6e}, {b:.6e}]"
    )))
}

/// Expand a geometric scan from `x0` until `f` changes sign, then polish.
/// Used when only one side of the bracket is known a priori.
pub fn scan_and_solve<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    factor: f64,
    max_scan: usize,
    xtol: f64,
) -> Result<f64> {
    let mut a = x0;
    let mut fa = f(a);
    if fa == 0.0 {
        return Ok(a);
    }
    let mut b = a;
    for _ in 0..max_scan {
        b *= factor;
        let fb = f(b);
        if fb == 0.0 {
            return Ok(b);
        }
        if fb.signum() != fa.signum() {
            return bracketed_root(f, a.min(b), a.max(b), xtol, 200);
        }
        a = b;
        fa = fb;
    }
    Err(Error::RootFind(format!(
        "geometric scan from {x0:.3e} (factor {factor}) found no sign change"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bracketed_root(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scan_finds_log_root() {
        let r = scan_and_solve(|x| x.ln() - 3.0, 1.0, 2.0, 60, 1e-14).unwrap();
        assert!((r - 3f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_bracket() {
        assert!(bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50).is_err());
    }
}
