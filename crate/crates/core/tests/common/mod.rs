//! Shared oracle helpers for the integration suites.
//!
//! Everything here recomputes quantities by routes independent of the
//! library's closed forms: adaptive quadrature for the per-tick and
//! per-sample marginalizations, and brute-force loops where the library
//! uses sufficient statistics.

#![allow(dead_code)]

use lagscope_core::lag_tte::TtePriorConfig;
use lagscope_core::posterior::log_sum_exp;
use lagscope_core::series::{to_indicator, EventSeries, SampledSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Deterministic generator for test instances.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Adaptive Simpson quadrature with an absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 48)
}

/// Truncated-Poisson per-tick likelihood of outcome `alpha` given the
/// latent signal level `s` and background `b`.
fn tick_likelihood(alpha: u8, rate: f64) -> f64 {
    if alpha == 0 {
        (-rate).exp()
    } else {
        1.0 - (-rate).exp()
    }
}

/// Per-tick evidence by quadrature of the marginalization integrand over
/// the uniform signal prior; the independent route to `g_coefficients`.
pub fn g_quadrature(alpha: u8, beta: u8, a: f64, cfg: &TtePriorConfig, tol: f64) -> f64 {
    let width = cfg.s1 - cfg.s0;
    let f = |s: f64| {
        tick_likelihood(alpha, s + cfg.b_x) * tick_likelihood(beta, a * s + cfg.b_y) / width
    };
    adaptive_simpson(&f, cfg.s0, cfg.s1, tol)
}

/// Normalized brute-force log surface for the event mode: per-tick
/// quadrature evidence multiplied tick by tick, no sufficient statistics.
pub fn tte_brute_force_normalized(
    x: &EventSeries,
    y: &EventSeries,
    tau_grid: &[usize],
    a_grid: &[f64],
    cfg: &TtePriorConfig,
) -> Vec<f64> {
    let m = x.span_m();
    let xb = to_indicator(x);
    let yb = to_indicator(y);
    let n_a = a_grid.len();
    let mut log_post = vec![0.0; tau_grid.len() * n_a];
    for (j, &a) in a_grid.iter().enumerate() {
        let g = [
            [
                g_quadrature(0, 0, a, cfg, 1e-13),
                g_quadrature(0, 1, a, cfg, 1e-13),
            ],
            [
                g_quadrature(1, 0, a, cfg, 1e-13),
                g_quadrature(1, 1, a, cfg, 1e-13),
            ],
        ];
        let lg = [
            [g[0][0].ln(), g[0][1].ln()],
            [g[1][0].ln(), g[1][1].ln()],
        ];
        for (i, &tau) in tau_grid.iter().enumerate() {
            let mut acc = 0.0;
            for mm in 0..m {
                let xa = xb.bits()[mm] as usize;
                let ybta = yb.bits()[(mm + tau) % m] as usize;
                acc += lg[xa][ybta];
            }
            log_post[i * n_a + j] = acc;
        }
    }
    let norm = log_sum_exp(&log_post);
    for v in log_post.iter_mut() {
        *v -= norm;
    }
    log_post
}

/// Marginalized per-sample evidence by quadrature over each latent signal
/// value on a finite range wide enough that truncation is negligible; the
/// independent route to `gauss_log_posterior_general`.
pub fn gauss_quadrature_log_posterior(
    x: &SampledSeries,
    y: &SampledSeries,
    tau: usize,
    a: f64,
) -> f64 {
    let m = x.len();
    let (xv, yv) = (x.values(), y.values());
    let (sx, sy) = (x.sigmas(), y.sigmas());
    let mut log_p = 0.0;
    for i in 0..m {
        let j = (i + tau) % m;
        let wx = 1.0 / (sx[i] * sx[i]);
        let wy = 1.0 / (sy[j] * sy[j]);
        let a_m = 0.5 * (wx + a * a * wy);
        let b_m = 0.5 * (xv[i] * wx + a * yv[j] * wy);
        let c_m = 0.5 * (xv[i] * xv[i] * wx + yv[j] * yv[j] * wy);
        // substituting u = s - b_m/a_m centers the completed square at
        // zero; 12 sigma of truncation is far below 1e-12 relative
        let half_width = 12.0 / (2.0 * a_m).sqrt();
        let gauss = adaptive_simpson(
            &|u: f64| (-a_m * u * u).exp(),
            -half_width,
            half_width,
            1e-14,
        );
        log_p += b_m * b_m / a_m - c_m + gauss.ln();
    }
    let sum_logs: f64 = sx.iter().zip(sy.iter()).map(|(a, b)| a.ln() + b.ln()).sum();
    log_p - m as f64 * (2.0 * std::f64::consts::PI).ln() - sum_logs
}

/// Largest-`gamma` lag with ties to the smallest lag; the classical
/// correlation-peak estimator.
pub fn argmax_gamma(gamma: &[f64]) -> usize {
    let mut best = 0usize;
    for (tau, &g) in gamma.iter().enumerate() {
        if g > gamma[best] {
            best = tau;
        }
    }
    best
}
