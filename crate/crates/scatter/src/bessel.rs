//! Riccati-Bessel functions and far-field phase extraction.
//!
//! `riccati_j(l, x) = x j_l(x)` is the regular free radial solution and
//! `riccati_y(l, x) = -x y_l(x)` the irregular one, normalised so that for
//! large argument they approach `sin(x - l pi/2)` and `cos(x - l pi/2)`.

/// Regular Riccati-Bessel function and its derivative with respect to `x`.
///
/// Upward recurrence; accurate for the low partial waves used here (the
/// recurrence loses accuracy once `l` substantially exceeds `x`).
pub fn riccati_j(l: u32, x: f64) -> (f64, f64) {
    riccati(l, x, x.cos(), x.sin())
}

/// Irregular Riccati-Bessel function `-x y_l(x)` and its derivative.
pub fn riccati_y(l: u32, x: f64) -> (f64, f64) {
    riccati(l, x, -x.sin(), x.cos())
}

/// Shared recurrence: u_{l+1} = (2l+1)/x u_l - u_{l-1}, with the derivative
/// from u_l' = u_{l-1} - (l/x) u_l.
fn riccati(l: u32, x: f64, u_minus1: f64, u_0: f64) -> (f64, f64) {
    let mut prev = u_minus1;
    let mut cur = u_0;
    for j in 0..l {
        let next = (2.0 * j as f64 + 1.0) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    let deriv = prev - (l as f64) / x * cur;
    (cur, deriv)
}

/// Phase shift from the logarithmic derivative `beta = u'(r)/u(r)` at radius
/// `r` where the potential is negligible.  Returns the principal value in
/// `(-pi/2, pi/2]`.
pub fn extract_phase(beta: f64, r: f64, k: f64, l: u32) -> f64 {
    let x = k * r;
    let (j, jp) = riccati_j(l, x);
    let (y, yp) = riccati_y(l, x);
    // u ~ cos(d) j - sin(d) (-y-ish irregular); with our normalisation
    // u ~ cos(d) j + sin(d) y matches u -> sin(x - l pi/2 + d).
    // beta = k (cos(d) j' + sin(d) y') / (cos(d) j + sin(d) y)
    let t = (k * jp - beta * j) / (beta * y - k * yp);
    let mut d = t.atan();
    if d <= -std::f64::consts::FRAC_PI_2 {
        d += std::f64::consts::PI;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn low_order_closed_forms() {
        let x = 2.3;
        let (j0, j0p) = riccati_j(0, x);
        assert!((j0 - x.sin()).abs() < 1e-14);
        assert!((j0p - x.cos()).abs() < 1e-14);

        let (j1, j1p) = riccati_j(1, x);
        assert!((j1 - (x.sin() / x - x.cos())).abs() < 1e-14);
        assert!((j1p - (x.cos() / x - x.sin() / (x * x) + x.sin())).abs() < 1e-13);

        let (y0, _) = riccati_y(0, x);
        assert!((y0 - x.cos()).abs() < 1e-14);

        let (y1, _) = riccati_y(1, x);
        assert!((y1 - (x.cos() / x + x.sin())).abs() < 1e-14);
    }

    #[test]
    fn large_argument_asymptote() {
        let x = 400.0;
        for l in 0..4u32 {
            let (j, _) = riccati_j(l, x);
            let target = (x - l as f64 * PI / 2.0).sin();
            // next asymptotic correction is of size l(l+1)/(2x)
            let tol = l as f64 * (l as f64 + 1.0) / (2.0 * x) + 1e-3;
            assert!((j - target).abs() < tol, "l={l}: {j} vs {target}");
        }
    }

    #[test]
    fn hard_wall_phase() {
        // u = sin(k (r - rw)) outside a hard wall of radius rw: delta = -k rw (mod pi)
        let k = 1.3f64;
        let rw = 0.7f64;
        let r = 25.0f64;
        let u = (k * (r - rw)).sin();
        let up = k * (k * (r - rw)).cos();
        let d = extract_phase(up / u, r, k, 0);
        let expected = {
            let mut e = -k * rw;
            while e <= -PI / 2.0 {
                e += PI;
            }
            e
        };
        assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
    }

    #[test]
    fn free_wave_has_zero_phase() {
        let k = 0.9;
        let r = 18.0;
        for l in 0..3u32 {
            let (j, jp) = riccati_j(l, k * r);
            let d = extract_phase(k * jp / j, r, k, l);
            assert!(d.abs() < 1e-12, "l={l}: {d}");
        }
    }
}
