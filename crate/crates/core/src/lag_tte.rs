//! Marginalized (lag, scale) posterior for time-tagged-event data.
//!
//! Per tick, an event fires with probability `1 - exp(-rate)` where the
//! rate is a latent signal level plus a known background. Marginalizing
//! the signal level over a uniform prior `[s0, s1]` tick by tick leaves a
//! per-tick evidence factor that depends only on which of the four joint
//! outcomes occurred, so the whole log posterior collapses onto the
//! circular cross-correlation:
//!
//! ```text
//! log G_total(tau, a) = c0(a) + c1(a) * gamma(tau)
//! ```
//!
//! `c0` and `c1` depend on the prior configuration and scale factor only;
//! all lag dependence enters through `gamma`. The correlation is therefore
//! a sufficient statistic for the lag, and whenever `c1(a) > 0` on the
//! whole scale grid the MAP lag coincides with the correlation peak.

use crate::error::{Error, Result};
use crate::posterior::{log_sum_exp, PosteriorSurface};
use crate::series::{to_indicator, EventSeries};
use crate::xcorr::{ccf_indicator, CcfMethod};

/// Below this argument separation, `phi` switches to its symmetric
/// expansion; the direct quotient loses digits to cancellation.
const PHI_EPS: f64 = 1e-6;

/// Prior configuration for the event mode: uniform signal-rate bounds and
/// known per-tick backgrounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TtePriorConfig {
    pub s0: f64,
    pub s1: f64,
    pub b_x: f64,
    pub b_y: f64,
}

impl TtePriorConfig {
    pub fn new(s0: f64, s1: f64, b_x: f64, b_y: f64) -> Result<Self> {
        if !(s0 >= 0.0) || !(s1 > s0) || !s1.is_finite() {
            return Err(Error::validation(format!(
                "signal prior requires 0 <= s0 < s1, got s0={s0}, s1={s1}"
            )));
        }
        if !(b_x >= 0.0) || !(b_y >= 0.0) || !b_x.is_finite() || !b_y.is_finite() {
            return Err(Error::validation(format!(
                "backgrounds must be non-negative and finite, got b_x={b_x}, b_y={b_y}"
            )));
        }
        Ok(TtePriorConfig { s0, s1, b_x, b_y })
    }

    /// Largest per-tick event probability the prior admits. The model
    /// assumes per-tick probabilities well below one; callers should warn
    /// when this exceeds 0.5.
    pub fn saturation_fraction(&self) -> f64 {
        -(-(self.s1 + self.b_x.max(self.b_y))).exp_m1()
    }
}

/// Uniform average of `exp(-s)` for `s` between `x` and `y`; equals
/// `exp(-x)` when the interval degenerates. Symmetric in its arguments.
pub fn phi(x: f64, y: f64) -> f64 {
    if (x - y).abs() > PHI_EPS {
        ((-x).exp() - (-y).exp()) / (y - x)
    } else {
        // exp(-(x+y)/2) * sinh(d)/d with d = (y-x)/2
        let d = 0.5 * (y - x);
        let ratio = if d == 0.0 { 1.0 } else { d.sinh() / d };
        (-0.5 * (x + y)).exp() * ratio
    }
}

/// Per-tick evidence of the four joint outcomes, marginalized over the
/// uniform signal prior. `gAB` is the probability of observing `x = A`
/// and `y = B` at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCoefficients {
    pub g00: f64,
    pub g01: f64,
    pub g10: f64,
    pub g11: f64,
}

impl GCoefficients {
    pub fn sum(&self) -> f64 {
        self.g00 + self.g01 + self.g10 + self.g11
    }
}

/// Closed-form per-tick evidence factors at scale `a`.
pub fn g_coefficients(a: f64, cfg: &TtePriorConfig) -> Result<GCoefficients> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::validation(format!(
            "scale factor must be positive and finite, got {a}"
        )));
    }
    let e_x = (-cfg.b_x).exp();
    let e_y = (-cfg.b_y).exp();
    let rho = 1.0 + a;
    let p1 = phi(cfg.s0, cfg.s1);
    let pa = phi(a * cfg.s0, a * cfg.s1);
    let pr = phi(rho * cfg.s0, rho * cfg.s1);
    let g = GCoefficients {
        g00: e_x * e_y * pr,
        g01: e_x * p1 - e_x * e_y * pr,
        g10: e_y * pa - e_x * e_y * pr,
        g11: 1.0 - e_x * p1 - e_y * pa + e_x * e_y * pr,
    };
    for (name, v) in [
        ("g00", g.g00),
        ("g01", g.g01),
        ("g10", g.g10),
        ("g11", g.g11),
    ] {
        if !(v > 0.0) {
            return Err(Error::PriorConfig(format!(
                "{name} = {v} at a = {a}; the prior range [{}, {}] with backgrounds \
                 ({}, {}) leaves this outcome without support",
                cfg.s0, cfg.s1, cfg.b_x, cfg.b_y
            )));
        }
    }
    Ok(g)
}

/// Data-independent (`c0`) and correlation (`c1`) coefficients of the log
/// posterior at scale `a`:
/// `log G_total(tau, a) = c0 + c1 * gamma(tau)`.
pub fn log_posterior_coeffs(
    a: f64,
    cfg: &TtePriorConfig,
    m: usize,
    n_x: usize,
    n_y: usize,
) -> Result<(f64, f64)> {
    if n_x > m || n_y > m {
        return Err(Error::validation(format!(
            "event counts ({n_x}, {n_y}) exceed span {m}"
        )));
    }
    let g = g_coefficients(a, cfg)?;
    let (l00, l01, l10, l11) = (g.g00.ln(), g.g01.ln(), g.g10.ln(), g.g11.ln());
    let c0 = (m as f64 - n_x as f64 - n_y as f64) * l00 + n_y as f64 * l01 + n_x as f64 * l10;
    let c1 = l00 - l01 - l10 + l11;
    Ok((c0, c1))
}

fn validate_grids(m: usize, tau_grid: &[usize], a_grid: &[f64]) -> Result<()> {
    if tau_grid.is_empty() || a_grid.is_empty() {
        return Err(Error::validation("lag and scale grids must be non-empty"));
    }
    if let Some(&tau) = tau_grid.iter().find(|&&t| t >= m) {
        return Err(Error::validation(format!(
            "lag {tau} outside span [0, {m})"
        )));
    }
    if let Some(&a) = a_grid.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(Error::validation(format!(
            "scale grid entries must be positive and finite, got {a}"
        )));
    }
    Ok(())
}

/// Evaluate the normalized posterior grid for an event-series pair.
pub fn tte_posterior_surface(
    x: &EventSeries,
    y: &EventSeries,
    tau_grid: &[usize],
    a_grid: &[f64],
    cfg: &TtePriorConfig,
) -> Result<PosteriorSurface> {
    let gamma = tte_gamma(x, y)?;
    validate_grids(x.span_m(), tau_grid, a_grid)?;
    let coeffs = tte_coeff_table(x, y, a_grid, cfg)?;
    build_surface(tau_grid, a_grid, &gamma, &coeffs)
}

/// Posterior with the backgrounds averaged out over finite grids with
/// uniform weights. A single-point grid reproduces the fixed-background
/// surface exactly.
pub fn marginalize_background(
    x: &EventSeries,
    y: &EventSeries,
    tau_grid: &[usize],
    a_grid: &[f64],
    cfg_base: &TtePriorConfig,
    b_grid_x: &[f64],
    b_grid_y: &[f64],
) -> Result<PosteriorSurface> {
    if b_grid_x.is_empty() || b_grid_y.is_empty() {
        return Err(Error::validation("background grids must be non-empty"));
    }
    for &b in b_grid_x.iter().chain(b_grid_y) {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::validation(format!(
                "background grid entries must be non-negative and finite, got {b}"
            )));
        }
    }
    let gamma = tte_gamma(x, y)?;
    validate_grids(x.span_m(), tau_grid, a_grid)?;

    let mut tables = Vec::with_capacity(b_grid_x.len() * b_grid_y.len());
    for &bx in b_grid_x {
        for &by in b_grid_y {
            let cfg = TtePriorConfig::new(cfg_base.s0, cfg_base.s1, bx, by)?;
            tables.push(tte_coeff_table(x, y, a_grid, &cfg)?);
        }
    }
    let log_weight = -((tables.len()) as f64).ln();

    let n_a = a_grid.len();
    let mut log_post = vec![0.0; tau_grid.len() * n_a];
    let mut cell = vec![0.0; tables.len()];
    for (i, &tau) in tau_grid.iter().enumerate() {
        let g = gamma[tau];
        for (j, _) in a_grid.iter().enumerate() {
            for (k, table) in tables.iter().enumerate() {
                let (c0, c1) = table[j];
                cell[k] = c0 + c1 * g;
            }
            log_post[i * n_a + j] = log_sum_exp(&cell) + log_weight;
        }
    }
    PosteriorSurface::new(tau_grid.to_vec(), a_grid.to_vec(), log_post)
}

/// Integer circular correlation of the two event series.
fn tte_gamma(x: &EventSeries, y: &EventSeries) -> Result<Vec<f64>> {
    if x.span_m() != y.span_m() {
        return Err(Error::validation(format!(
            "event series spans differ: {} vs {}",
            x.span_m(),
            y.span_m()
        )));
    }
    let ccf = ccf_indicator(&to_indicator(x), &to_indicator(y), CcfMethod::Fft)?;
    Ok(ccf.gamma)
}

/// `(c0, c1)` per scale-grid entry.
fn tte_coeff_table(
    x: &EventSeries,
    y: &EventSeries,
    a_grid: &[f64],
    cfg: &TtePriorConfig,
) -> Result<Vec<(f64, f64)>> {
    let m = x.span_m();
    a_grid
        .iter()
        .map(|&a| log_posterior_coeffs(a, cfg, m, x.count(), y.count()))
        .collect()
}

fn build_surface(
    tau_grid: &[usize],
    a_grid: &[f64],
    gamma: &[f64],
    coeffs: &[(f64, f64)],
) -> Result<PosteriorSurface> {
    let n_a = a_grid.len();
    let mut log_post = vec![0.0; tau_grid.len() * n_a];
    for (i, &tau) in tau_grid.iter().enumerate() {
        let g = gamma[tau];
        for (j, &(c0, c1)) in coeffs.iter().enumerate() {
            log_post[i * n_a + j] = c0 + c1 * g;
        }
    }
    PosteriorSurface::new(tau_grid.to_vec(), a_grid.to_vec(), log_post)
}

/// Default scale grid: 25 log-spaced points spanning `[0.1, 10]`.
pub fn default_a_grid() -> Vec<f64> {
    log_spaced(0.1, 10.0, 25)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
