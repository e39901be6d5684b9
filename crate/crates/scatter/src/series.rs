//! The iterated two-region series and its matching at t = 1.
//!
//! Inner region: the order-0 pair is the WKB doublet
//! `w0^± = (k^2/K_eps^2)^{1/4} exp(∓ Phi(t))` with
//! `Phi(t) = R \int_t^1 |K_eps| dt' >= 0`.  Corrections are generated by the
//! resolvent built from that pair; the recursion is carried in ratio form
//! `h_n = w_n / w0^+` so that the astronomically small prefactor never mixes
//! into the arithmetic:
//!
//! ```text
//! h_n(t)  = 1/2 \int_0^t p(t') [1 - e^{-2(Phi(t') - Phi(t))}] h_{n-1}(t') dt'
//! h_n'(t) = R K(t) \int_0^t p(t') e^{-2(Phi(t') - Phi(t))} h_{n-1}(t') dt'
//! ```
//!
//! Outer region: the canonical oscillatory basis is
//! `y_c = amp cos(theta)`, `y_s = amp sin(theta)` with
//! `theta(t) = R \int_1^t |K_tau| dt'` and `amp = (k^2/K_tau^2)^{1/4}`; its
//! Wronskian is `k R`.  The resolvent kernel
//! `amp(t) amp(t') sin(theta(t) - theta(t')) / (k R)` is invariant under any
//! change of basis pair `(C^-, S^-)` — an algebraic identity, which is why
//! the matched coefficients cannot depend on that choice.
//!
//! Matching equates value and slope of the inner partial sum with the outer
//! combination `C^+ (sum over y_c iterates) + S^+ (sum over y_s iterates)`
//! at `t = 1`; every iterated outer term vanishes there with zero slope, so
//! `(C^+, S^+)` depend only on the inner cutoff.

use crate::bessel;
use crate::error::{Error, Result};
use crate::localwave::{self, Region};
use crate::logval::LogVal;
use crate::matching::MatchingSolution;
use crate::quad::{self, QuadOptions};
use serde::{Deserialize, Serialize};

/// Truncation orders `(N, M)` for the inner and outer iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoff {
    pub eps: usize,
    pub tau: usize,
}

impl Cutoff {
    pub fn new(eps: usize, tau: usize) -> Self {
        Cutoff { eps, tau }
    }
}

/// Tuning knobs for the grid construction.
#[derive(Debug, Clone, Copy)]
pub struct SeriesOptions {
    /// Points in the smooth part of the inner grid.
    pub eps_base_points: usize,
    /// Points per decade in the graded cluster toward t = 1.
    pub cluster_per_decade: usize,
    /// Far boundary of the outer grid; `None` picks the smallest point where
    /// the potential has collapsed below 1e-10 k^2.
    pub t_far: Option<f64>,
    /// Auxiliary outer pair (C^-, S^-); only enters Wronskian reporting.
    pub aux_pair: (f64, f64),
    /// Uniform step of the outer grid tail; `None` picks a phase-resolved
    /// default.
    pub tau_dt: Option<f64>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            eps_base_points: 520,
            cluster_per_decade: 180,
            t_far: None,
            aux_pair: (0.0, 1.0),
            tau_dt: None,
        }
    }
}

/// Matched coefficients and the pair that closes the outer basis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MatchCoefficients {
    pub c_plus: f64,
    pub s_plus: f64,
    pub c_minus: f64,
    pub s_minus: f64,
    pub cutoff: Cutoff,
}

/// Phase shift as principal value plus accumulated branch count.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhaseShift {
    /// Principal value in (-pi/2, pi/2].
    pub principal: f64,
    /// Half-turns accumulated relative to the free wave out to the far point.
    pub branches: i64,
}

/// Convergence bookkeeping exposed with every solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    /// sup |h_n| per inner order (order 0 is identically 1).
    pub term_norms_eps: Vec<f64>,
    /// sup of each outer iterate relative to the order-0 combination.
    pub term_norms_tau: Vec<f64>,
    /// |u_eps(1) - u_tau(1)| after matching (zero up to rounding).
    pub matching_residual_value: f64,
    /// Same for the slope.
    pub matching_residual_slope: f64,
}

/// One sampled point of the assembled wave function.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WaveSample {
    pub t: f64,
    /// u(t); underflows to 0 deep inside the barrier.
    pub u: f64,
    /// ln |u|, usable even where `u` underflows.
    pub log_abs_u: f64,
}

/// A fully assembled solution.
#[derive(Debug, Clone)]
pub struct ScatteringResult {
    pub sol: MatchingSolution,
    pub coeffs: MatchCoefficients,
    pub phase: PhaseShift,
    pub t_far: f64,
    pub diagnostics: Diagnostics,
    /// Inner samples (ascending t, ending at 1).
    pub eps_samples: Vec<WaveSample>,
    /// Outer samples (ascending t, starting at 1).
    pub tau_samples: Vec<WaveSample>,
}

const PHI_CAP: f64 = 1e250;
const K_CAP: f64 = 1e250;

// ---------------------------------------------------------------------------
// grids
// ---------------------------------------------------------------------------

struct EpsGrid {
    t: Vec<f64>,
    phi: Vec<f64>,
    k_lin: Vec<f64>,
    log_amp: Vec<f64>,
    ratio1: Vec<f64>,
    /// h[n][i], order n = 0..=cutoff
    h: Vec<Vec<f64>>,
    hp: Vec<Vec<f64>>,
}

fn capped_k(sol: &MatchingSolution, region: Region, t: f64) -> f64 {
    match localwave::evaluate(region, sol, t) {
        Ok(pt) if pt.k2.is_positive() => (0.5 * pt.k2.log_abs).exp().min(K_CAP),
        _ => 0.0,
    }
}

/// Four-point Gauss-Legendre value of `R \int_a^b K dt`.
fn phase_increment(sol: &MatchingSolution, region: Region, a: f64, b: f64) -> f64 {
    const X: [f64; 4] = [
        -0.861136311594052575,
        -0.339981043584856265,
        0.339981043584856265,
        0.861136311594052575,
    ];
    const W: [f64; 4] = [
        0.347854845137453857,
        0.652145154862546143,
        0.652145154862546143,
        0.347854845137453857,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for j in 0..4 {
        s += W[j] * capped_k(sol, region, c + h * X[j]);
    }
    (sol.r_match * s * h).min(PHI_CAP)
}

fn build_eps_grid(sol: &MatchingSolution, orders: usize, opts: &SeriesOptions) -> Result<EpsGrid> {
    // Inner cutoff: march down until the discriminant is negligible.
    let log_p = |t: f64| {
        localwave::evaluate(Region::Epsilon, sol, t)
            .map(|p| p.p.log_abs)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let mut t_lo = 0.9;
    while t_lo > 1e-6 && log_p(t_lo) > -80.0 {
        t_lo *= 0.85;
    }

    // Layer scale at the matching point: K^2 dips from barrier-sized values
    // to 1/(8R^2) over a width set by the potential's log slope.
    let at1 = localwave::evaluate(Region::Epsilon, sol, 1.0)?;
    let xi_star = (1.0 / at1.ratio1.abs()).min(1e-2).max(1e-13);

    let cluster_start = 0.7f64.max(t_lo);
    let xi_max = 1.0 - cluster_start;
    let xi_min = (xi_star / 30.0).min(1e-6);
    let decades = (xi_max / xi_min).log10();
    let n_cluster = ((decades * opts.cluster_per_decade as f64).ceil() as usize).max(8);

    let mut t = Vec::with_capacity(opts.eps_base_points + n_cluster + 2);
    // smooth piece, uniform in log t
    if cluster_start > t_lo {
        let la = t_lo.ln();
        let lb = cluster_start.ln();
        for i in 0..opts.eps_base_points {
            let x = la + (lb - la) * i as f64 / opts.eps_base_points as f64;
            t.push(x.exp());
        }
    }
    // graded cluster: xi = 1 - t geometric from xi_max down to xi_min
    let ratio = (xi_min / xi_max).powf(1.0 / n_cluster as f64);
    let mut xi = xi_max;
    for _ in 0..=n_cluster {
        t.push(1.0 - xi);
        xi *= ratio;
    }
    t.push(1.0);
    t.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let n = t.len();
    let mut phi = vec![0.0; n];
    let mut k_lin = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut log_amp = vec![0.0; n];
    let mut ratio1 = vec![0.0; n];
    let lk2 = (sol.k * sol.k).ln();
    for i in 0..n {
        let pt = localwave::evaluate(Region::Epsilon, sol, t[i])?;
        k_lin[i] = (0.5 * pt.k2.log_abs).exp().min(K_CAP);
        p[i] = pt.p.linear_lossy();
        log_amp[i] = 0.25 * (lk2 - pt.k2.log_abs);
        ratio1[i] = pt.ratio1;
    }
    // Phi accumulates from t = 1 downward.
    for i in (0..n - 1).rev() {
        phi[i] = (phi[i + 1] + phase_increment(sol, Region::Epsilon, t[i], t[i + 1])).min(PHI_CAP);
    }

    // the iteration
    let mut h = vec![vec![1.0; n]];
    let mut hp = vec![vec![0.0; n]];
    for _ in 0..orders {
        let prev = h.last().unwrap();
        let f: Vec<f64> = (0..n).map(|i| p[i] * prev[i]).collect();
        // running integral of f
        let mut i1 = vec![0.0; n];
        for i in 1..n {
            i1[i] = i1[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
        }
        // damped integral J_i = int f e^{-2(Phi' - Phi_i)}
        let mut j_arr = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in (1..=i).rev() {
                let e_hi = 2.0 * (phi[j] - phi[i]);
                let e_lo = 2.0 * (phi[j - 1] - phi[i]);
                if e_hi > 80.0 {
                    break;
                }
                let w_hi = (-e_hi).exp();
                let w_lo = if e_lo > 80.0 { 0.0 } else { (-e_lo).exp() };
                acc += 0.5 * (t[j] - t[j - 1]) * (f[j] * w_hi + f[j - 1] * w_lo);
            }
            j_arr[i] = acc;
        }
        let hn: Vec<f64> = (0..n).map(|i| 0.5 * (i1[i] - j_arr[i])).collect();
        let hpn: Vec<f64> = (0..n).map(|i| sol.r_match * k_lin[i] * j_arr[i]).collect();
        h.push(hn);
        hp.push(hpn);
    }

    Ok(EpsGrid {
        t,
        phi,
        k_lin,
        log_amp,
        ratio1,
        h,
        hp,
    })
}

struct TauGrid {
    t: Vec<f64>,
    theta: Vec<f64>,
    amp: Vec<f64>,
    dlog_amp: Vec<f64>,
    thp: Vec<f64>,
    /// basis[0] seeded with cos(theta), basis[1] with sin(theta);
    /// w[m][i] and wp[m][i] per outer order m
    basis: [(Vec<Vec<f64>>, Vec<Vec<f64>>); 2],
}

fn pick_t_far(sol: &MatchingSolution) -> f64 {
    let target = (1e-10 * sol.k * sol.k).ln();
    let mut t = 3.0;
    while t < 60.0
        && sol
            .class
            .log_potential(sol.stage, sol.r_match, sol.r_match * t)
            > target
    {
        t += 0.5;
    }
    t
}

fn build_tau_grid(sol: &MatchingSolution, orders: usize, opts: &SeriesOptions) -> Result<TauGrid> {
    let t_far = opts.t_far.unwrap_or_else(|| pick_t_far(sol));

    let at1 = localwave::evaluate(Region::Tau, sol, 1.0)?;
    let xi_star = (1.0 / at1.ratio1.abs()).min(1e-2).max(1e-13);
    let xi_min = (xi_star / 30.0).min(1e-6);
    let xi_max = 0.2f64.min(t_far - 1.0);
    let per_decade = opts.cluster_per_decade as f64;
    let n_cluster = (((xi_max / xi_min).log10() * per_decade).ceil() as usize).max(8);

    let mut t = vec![1.0];
    let ratio = (xi_max / xi_min).powf(1.0 / n_cluster as f64);
    let mut xi = xi_min;
    for _ in 0..=n_cluster {
        t.push(1.0 + xi);
        xi *= ratio;
    }
    // uniform, phase-resolved tail
    let kr = sol.k * sol.r_match;
    let dt = opts
        .tau_dt
        .unwrap_or_else(|| (0.025f64).min(2.0 * std::f64::consts::PI / kr / 32.0));
    let mut x = 1.0 + xi_max;
    while x < t_far {
        x += dt;
        t.push(x.min(t_far));
    }
    if *t.last().unwrap() < t_far {
        t.push(t_far);
    }
    t.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let n = t.len();
    let mut theta = vec![0.0; n];
    let mut amp = vec![0.0; n];
    let mut dlog_amp = vec![0.0; n];
    let mut thp = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let lk2 = (sol.k * sol.k).ln();
    for i in 0..n {
        let pt = localwave::evaluate(Region::Tau, sol, t[i])?;
        amp[i] = (0.25 * (lk2 - pt.k2.log_abs)).exp();
        dlog_amp[i] = -0.25 * pt.ratio1;
        thp[i] = sol.r_match * (0.5 * pt.k2.log_abs).exp();
        delta[i] = pt.delta;
    }
    for i in 1..n {
        theta[i] = theta[i - 1] + phase_increment(sol, Region::Tau, t[i - 1], t[i]);
    }

    let mut basis: [(Vec<Vec<f64>>, Vec<Vec<f64>>); 2] = Default::default();
    for (b, item) in basis.iter_mut().enumerate() {
        let w0: Vec<f64> = (0..n)
            .map(|i| {
                amp[i]
                    * if b == 0 {
                        theta[i].cos()
                    } else {
                        theta[i].sin()
                    }
            })
            .collect();
        let wp0: Vec<f64> = (0..n)
            .map(|i| {
                let (c, s) = (theta[i].cos(), theta[i].sin());
                if b == 0 {
                    amp[i] * (dlog_amp[i] * c - thp[i] * s)
                } else {
                    amp[i] * (dlog_amp[i] * s + thp[i] * c)
                }
            })
            .collect();
        let mut w = vec![w0];
        let mut wp = vec![wp0];
        for _ in 0..orders {
            let prev = w.last().unwrap();
            // kernel expansion: w_m = amp (sin A - cos B)/(kR),
            // A = int amp cos(theta') delta w, B likewise with sin
            let fc: Vec<f64> = (0..n)
                .map(|i| amp[i] * theta[i].cos() * delta[i] * prev[i])
                .collect();
            let fs: Vec<f64> = (0..n)
                .map(|i| amp[i] * theta[i].sin() * delta[i] * prev[i])
                .collect();
            let mut a_cum = vec![0.0; n];
            let mut b_cum = vec![0.0; n];
            for i in 1..n {
                let w2 = 0.5 * (t[i] - t[i - 1]);
                a_cum[i] = a_cum[i - 1] + w2 * (fc[i] + fc[i - 1]);
                b_cum[i] = b_cum[i - 1] + w2 * (fs[i] + fs[i - 1]);
            }
            let wm: Vec<f64> = (0..n)
                .map(|i| amp[i] * (theta[i].sin() * a_cum[i] - theta[i].cos() * b_cum[i]) / kr)
                .collect();
            let wpm: Vec<f64> = (0..n)
                .map(|i| {
                    dlog_amp[i] * wm[i]
                        + amp[i] * thp[i] * (theta[i].cos() * a_cum[i] + theta[i].sin() * b_cum[i])
                            / kr
                })
                .collect();
            w.push(wm);
            wp.push(wpm);
        }
        *item = (w, wp);
    }

    Ok(TauGrid {
        t,
        theta,
        amp,
        dlog_amp,
        thp,
        basis,
    })
}

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

/// Which member of the inner order-0 doublet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Inner order-0 term `w0^±(t)` in signed-log form, computed from scratch by
/// adaptive quadrature (independent of the grid machinery).
pub fn leading_term_eps(sol: &MatchingSolution, sign: Sign, t: f64) -> Result<LogVal> {
    let pt = localwave::evaluate(Region::Epsilon, sol, t)?;
    if !pt.k2.is_positive() {
        return Err(Error::Domain("K_eps^2 <= 0".into()));
    }
    let phi = sol.r_match
        * quad::integrate(
            |x| capped_k(sol, Region::Epsilon, x),
            t,
            1.0,
            QuadOptions {
                abs_tol: 1e-14,
                rel_tol: 1e-13,
                max_panels: 2000,
            },
        )?;
    let log_amp = 0.25 * ((sol.k * sol.k).ln() - pt.k2.log_abs);
    let log = match sign {
        Sign::Plus => log_amp - phi,
        Sign::Minus => log_amp + phi,
    };
    Ok(LogVal::new(1.0, log))
}

/// Outer order-0 term `C y_c(t) + S y_s(t)` by direct quadrature of the
/// phase.
pub fn leading_term_tau(sol: &MatchingSolution, c: f64, s: f64, t: f64) -> Result<f64> {
    let pt = localwave::evaluate(Region::Tau, sol, t)?;
    if !pt.k2.is_positive() {
        return Err(Error::Domain("K_tau^2 <= 0".into()));
    }
    let theta = sol.r_match
        * quad::integrate(
            |x| capped_k(sol, Region::Tau, x),
            1.0,
            t,
            QuadOptions {
                abs_tol: 1e-14,
                rel_tol: 1e-13,
                max_panels: 2000,
            },
        )?;
    let amp = (0.25 * ((sol.k * sol.k).ln() - pt.k2.log_abs)).exp();
    Ok(amp * (c * theta.cos() + s * theta.sin()))
}

/// Numerical Wronskian of the inner order-0 pair at `t`; contract: `-2 k R`
/// independent of `t`.
///
/// Differencing is done on the logs of the pair so the result stays finite
/// deep inside the barrier where the members span hundreds of orders of
/// magnitude.
pub fn wronskian_check_eps(sol: &MatchingSolution, t: f64) -> Result<f64> {
    let h = 1e-4 * t;
    let logw = |sign: Sign, x: f64| -> Result<f64> { Ok(leading_term_eps(sol, sign, x)?.log_abs) };
    let d4 = |sign: Sign| -> Result<f64> {
        Ok(
            (-logw(sign, t + 2.0 * h)? + 8.0 * logw(sign, t + h)? - 8.0 * logw(sign, t - h)?
                + logw(sign, t - 2.0 * h)?)
                / (12.0 * h),
        )
    };
    let dp = d4(Sign::Plus)?;
    let dm = d4(Sign::Minus)?;
    let pt = localwave::evaluate(Region::Epsilon, sol, t)?;
    // w^+ w^- = amp^2 = k / K, so W = amp^2 (dlog w^- - dlog w^+)
    let amp_sq = sol.k / (0.5 * pt.k2.log_abs).exp();
    Ok(amp_sq * (dm - dp))
}

/// Numerical Wronskian of the outer pair built from `(C^+, S^+)` and
/// `(C^-, S^-)`; contract: `(C^+ S^- - C^- S^+) k R` independent of `t`.
pub fn wronskian_check_tau(
    sol: &MatchingSolution,
    c_plus: f64,
    s_plus: f64,
    c_minus: f64,
    s_minus: f64,
    t: f64,
) -> Result<f64> {
    let h = 1e-5 * t;
    let wv = |c: f64, s: f64, x: f64| leading_term_tau(sol, c, s, x);
    let d4 = |c: f64, s: f64| -> Result<f64> {
        Ok(
            (-wv(c, s, t + 2.0 * h)? + 8.0 * wv(c, s, t + h)? - 8.0 * wv(c, s, t - h)?
                + wv(c, s, t - 2.0 * h)?)
                / (12.0 * h),
        )
    };
    let wp = wv(c_plus, s_plus, t)?;
    let wm = wv(c_minus, s_minus, t)?;
    Ok(wp * d4(c_minus, s_minus)? - wm * d4(c_plus, s_plus)?)
}

/// Solve the matched series at the given cutoff.
/// Build the matched two-region series and extract the phase shift.
///
/// ```
/// use scatter::matching::solution_for_radius;
/// use scatter::potentials::PotentialClass;
/// use scatter::series::{solve_series, Cutoff, SeriesOptions};
///
/// let class = PotentialClass::from_tag("EEE").unwrap();
/// let sol = solution_for_radius(&class, 1.0, 0, 3.0).unwrap();
/// let res = solve_series(&sol, Cutoff::new(6, 6), &SeriesOptions::default()).unwrap();
/// assert!((res.phase.principal - 0.5297).abs() < 0.01);
/// ```
pub fn solve_series(
    sol: &MatchingSolution,
    cutoff: Cutoff,
    opts: &SeriesOptions,
) -> Result<ScatteringResult> {
    let eps = build_eps_grid(sol, cutoff.eps, opts)?;
    let tau = build_tau_grid(sol, cutoff.tau, opts)?;
    let n_eps = eps.t.len();
    let n_tau = tau.t.len();
    let kr = sol.k * sol.r_match;

    // --- matching at t = 1 -------------------------------------------------
    let amp1 = (8.0 * sol.k * sol.k * sol.r_match * sol.r_match).powf(0.25);
    let last = n_eps - 1;
    let h_sum: f64 = eps.h.iter().map(|o| o[last]).sum();
    let hp_sum: f64 = eps.hp.iter().map(|o| o[last]).sum();
    // log-slope of w0^+ at 1: R K(1) - (1/4) (K^2)'(1)/K^2(1)
    let w0_slope = sol.r_match * eps.k_lin[last] - 0.25 * eps.ratio1[last];
    let value_eps = amp1 * h_sum;
    let slope_eps = amp1 * (w0_slope * h_sum + hp_sum);

    // outer side at t = 1: iterated terms vanish with zero slope
    let yc1 = tau.amp[0];
    let ycp1 = tau.amp[0] * tau.dlog_amp[0];
    let ysp1 = tau.amp[0] * tau.thp[0];
    if ysp1.abs() < 1e-300 {
        return Err(Error::Domain("degenerate matching system at t = 1".into()));
    }
    let c_plus = value_eps / yc1;
    let s_plus = (slope_eps - c_plus * ycp1) / ysp1;
    let coeffs = MatchCoefficients {
        c_plus,
        s_plus,
        c_minus: opts.aux_pair.0,
        s_minus: opts.aux_pair.1,
        cutoff,
    };

    // --- assemble wave samples --------------------------------------------
    let eps_samples: Vec<WaveSample> = (0..n_eps)
        .map(|i| {
            let hs: f64 = eps.h.iter().map(|o| o[i]).sum();
            let log_w0 = eps.log_amp[i] - eps.phi[i];
            let u = if log_w0 > -700.0 {
                log_w0.exp() * hs
            } else {
                0.0
            };
            WaveSample {
                t: eps.t[i],
                u,
                log_abs_u: log_w0 + hs.abs().max(1e-300).ln(),
            }
        })
        .collect();

    let mut u_tau = vec![0.0; n_tau];
    let mut up_tau = vec![0.0; n_tau];
    for i in 0..n_tau {
        for m in 0..=cutoff.tau {
            u_tau[i] += c_plus * tau.basis[0].0[m][i] + s_plus * tau.basis[1].0[m][i];
            up_tau[i] += c_plus * tau.basis[0].1[m][i] + s_plus * tau.basis[1].1[m][i];
        }
    }
    let tau_samples: Vec<WaveSample> = (0..n_tau)
        .map(|i| WaveSample {
            t: tau.t[i],
            u: u_tau[i],
            log_abs_u: u_tau[i].abs().max(1e-300).ln(),
        })
        .collect();

    // --- diagnostics -------------------------------------------------------
    let term_norms_eps: Vec<f64> = eps
        .h
        .iter()
        .map(|o| o.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
        .collect();
    let order0_sup = (0..n_tau).fold(0.0f64, |m, i| {
        m.max((c_plus * tau.basis[0].0[0][i] + s_plus * tau.basis[1].0[0][i]).abs())
    });
    let term_norms_tau: Vec<f64> = (0..=cutoff.tau)
        .map(|m| {
            (0..n_tau).fold(0.0f64, |mx, i| {
                mx.max(
                    (c_plus * tau.basis[0].0[m][i] + s_plus * tau.basis[1].0[m][i]).abs()
                        / order0_sup.max(1e-300),
                )
            })
        })
        .collect();
    let diagnostics = Diagnostics {
        term_norms_eps,
        term_norms_tau,
        matching_residual_value: (value_eps - (c_plus * yc1)).abs(),
        matching_residual_slope: (slope_eps - (c_plus * ycp1 + s_plus * ysp1)).abs(),
    };

    // --- phase shift -------------------------------------------------------
    let t_far = *tau.t.last().unwrap();
    let pot_far = sol
        .class
        .log_potential(sol.stage, sol.r_match, sol.r_match * t_far);
    if pot_far > (1e-8 * sol.k * sol.k).ln() {
        return Err(Error::NotAsymptotic(format!(
            "potential at t_far = {t_far} is only down to exp({pot_far:.1})"
        )));
    }
    let i_far = n_tau - 1;
    let beta = up_tau[i_far] / (sol.r_match * u_tau[i_far]);
    let principal = bessel::extract_phase(beta, sol.r_match * t_far, sol.k, sol.triad.l);
    let free_phase = kr * (t_far - 1.0);
    let branches = ((tau.theta[i_far] - free_phase) / std::f64::consts::PI).round() as i64;
    let phase = PhaseShift {
        principal,
        branches,
    };

    Ok(ScatteringResult {
        sol: sol.clone(),
        coeffs,
        phase,
        t_far,
        diagnostics,
        eps_samples,
        tau_samples,
    })
}

/// Evaluate the assembled wave function at `t` by interpolation on the
/// stored samples.
pub fn wavefunction(result: &ScatteringResult, t: f64) -> Result<f64> {
    let interp = |samples: &[WaveSample], t: f64| -> Option<f64> {
        if t < samples.first()?.t || t > samples.last()?.t {
            return None;
        }
        let idx = samples.partition_point(|s| s.t < t).min(samples.len() - 1);
        if idx == 0 {
            return Some(samples[0].u);
        }
        let (a, b) = (&samples[idx - 1], &samples[idx]);
        let w = (t - a.t) / (b.t - a.t);
        Some(a.u + w * (b.u - a.u))
    };
    if t <= 1.0 {
        interp(&result.eps_samples, t)
    } else {
        interp(&result.tau_samples, t)
    }
    .ok_or_else(|| Error::Domain(format!("t = {t} outside the sampled range")))
}

/// Phase shift of the matched series (convenience wrapper).
pub fn phase_shift(
    sol: &MatchingSolution,
    cutoff: Cutoff,
    opts: &SeriesOptions,
) -> Result<PhaseShift> {
    Ok(solve_series(sol, cutoff, opts)?.phase)
}

/// sup-norm relative deviation between the full matched partial sum and the
/// order-0 wave function, over the sampled window `t >= 0.25`.
pub fn leading_vs_full_deviation(
    sol: &MatchingSolution,
    cutoff: Cutoff,
    opts: &SeriesOptions,
) -> Result<f64> {
    let full = solve_series(sol, cutoff, opts)?;
    let lead = solve_series(sol, Cutoff::new(0, 0), opts)?;
    let mut sup_diff = 0.0f64;
    let mut sup_lead = 0.0f64;
    let pairs = full
        .eps_samples
        .iter()
        .zip(lead.eps_samples.iter())
        .chain(full.tau_samples.iter().zip(lead.tau_samples.iter()));
    for (a, b) in pairs {
        if a.t < 0.25 {
            continue;
        }
        sup_diff = sup_diff.max((a.u - b.u).abs());
        sup_lead = sup_lead.max(b.u.abs());
    }
    Ok(sup_diff / sup_lead.max(1e-300))
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
    fn eps_wronskian_is_minus_2kr() {
        let s = sol("EEE", 1.0, 0, 3.0);
        for &t in &[0.5, 0.6, 0.7, 0.8, 0.9] {
            let w = wronskian_check_eps(&s, t).unwrap();
            assert_relative_eq!(w, -2.0 * s.k * s.r_match, max_relative = 1e-8);
        }
    }

    #[test]
    fn tau_wronskian_matches_pair_determinant() {
        let s = sol("EEE", 1.0, 0, 3.0);
        let kr = s.k * s.r_match;
        for &t in &[1.4, 2.1, 3.0] {
            let w = wronskian_check_tau(&s, 1.0, 0.0, 0.0, 1.0, t).unwrap();
            assert_relative_eq!(w, kr, max_relative = 1e-6);
            // a skewed pair scales by the determinant
            let w2 = wronskian_check_tau(&s, 2.0, 0.5, 1.0, 1.0, t).unwrap();
            assert_relative_eq!(w2, (2.0 * 1.0 - 1.0 * 0.5) * kr, max_relative = 1e-6);
        }
    }

    #[test]
    fn matching_is_continuous() {
        let s = sol("EEE", 1.0, 0, 5.0);
        let r = solve_series(&s, Cutoff::new(2, 2), &SeriesOptions::default()).unwrap();
        let u1m = r.eps_samples.last().unwrap().u;
        let u1p = r.tau_samples.first().unwrap().u;
        assert!((u1m - u1p).abs() <= 1e-10 * u1m.abs().max(u1p.abs()));
        assert!(r.diagnostics.matching_residual_value <= 1e-10 * u1m.abs());
    }

    #[test]
    fn coefficients_do_not_depend_on_outer_cutoff() {
        let s = sol("EEE", 1.0, 0, 4.0);
        let a = solve_series(&s, Cutoff::new(1, 0), &SeriesOptions::default()).unwrap();
        let b = solve_series(&s, Cutoff::new(1, 3), &SeriesOptions::default()).unwrap();
        assert_relative_eq!(a.coeffs.c_plus, b.coeffs.c_plus, max_relative = 1e-12);
        assert_relative_eq!(a.coeffs.s_plus, b.coeffs.s_plus, max_relative = 1e-12);
    }

    #[test]
    fn aux_pair_does_not_move_the_phase() {
        let s = sol("EEE", 1.0, 0, 4.0);
        let mut opts = SeriesOptions::default();
        let p1 = phase_shift(&s, Cutoff::new(1, 1), &opts).unwrap();
        opts.aux_pair = (1.0, 1.0);
        let p2 = phase_shift(&s, Cutoff::new(1, 1), &opts).unwrap();
        assert!((p1.principal - p2.principal).abs() < 1e-10);
    }

    #[test]
    fn order0_grid_and_quadrature_agree() {
        let s = sol("EEE", 1.0, 0, 3.0);
        let r = solve_series(&s, Cutoff::new(0, 0), &SeriesOptions::default()).unwrap();
        // order-0 outer wave at an interior grid point vs direct quadrature
        let i = r.tau_samples.len() / 2;
        let t = r.tau_samples[i].t;
        let direct = leading_term_tau(&s, r.coeffs.c_plus, r.coeffs.s_plus, t).unwrap();
        assert_relative_eq!(r.tau_samples[i].u, direct, max_relative = 1e-5);
    }

    #[test]
    fn phase_shift_is_grid_converged() {
        let s = sol("EEE", 1.0, 0, 3.0);
        let coarse = phase_shift(&s, Cutoff::new(2, 2), &SeriesOptions::default()).unwrap();
        let fine = phase_shift(
            &s,
            Cutoff::new(2, 2),
            &SeriesOptions {
                eps_base_points: 520,
                cluster_per_decade: 180,
                ..SeriesOptions::default()
            },
        )
        .unwrap();
        assert!(
            (coarse.principal - fine.principal).abs() < 2e-3,
            "grid sensitivity {} vs {}",
            coarse.principal,
            fine.principal
        );
    }
}
