//! Marginalized (lag, scale) posterior for evenly sampled data with
//! Gaussian noise.
//!
//! Each latent signal value is integrated out analytically against an
//! improper flat prior, leaving per-sample quadratic coefficients. With
//! per-sample noise scales the evidence is summed term by term; when both
//! noise scales are constants the sum collapses onto the circular
//! cross-correlation,
//!
//! ```text
//! log P(tau, a) = log P0 + (M/2) log(pi / A(a)) - C0 + K0(a) + K1(a) * gamma(tau)
//! ```
//!
//! so lag differences at fixed scale depend on the data only through
//! `K1(a) * gamma(tau)`. `K1(a) > 0` for `a > 0`, hence the posterior
//! ordering over lags always matches the ordering of `gamma`.
//!
//! Backgrounds are not modeled in this mode; detrend upstream. Shifts wrap
//! circularly, mirroring the event mode.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::posterior::PosteriorSurface;
use crate::series::SampledSeries;

/// Per-sample quadratic coefficients of the marginalized log likelihood:
/// `L_m = -C_m + 2 B_m S - A_m S^2` in the latent signal value `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussTerm {
    pub a_m: f64,
    pub b_m: f64,
    pub c_m: f64,
}

/// Coefficients of one sample pair `(x_m, y_{m+tau})` at scale `a`.
pub fn gauss_term(x_m: f64, y_shifted: f64, sigma_x: f64, sigma_y: f64, a: f64) -> GaussTerm {
    let wx = 1.0 / (sigma_x * sigma_x);
    let wy = 1.0 / (sigma_y * sigma_y);
    GaussTerm {
        a_m: 0.5 * (wx + a * a * wy),
        b_m: 0.5 * (x_m * wx + a * y_shifted * wy),
        c_m: 0.5 * (x_m * x_m * wx + y_shifted * y_shifted * wy),
    }
}

/// Lag-independent quantities of the constant-noise fast path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussConstants {
    /// `A(a)`, the common quadratic coefficient.
    pub a_of_a: f64,
    /// Correlation-independent part of the completed square.
    pub k0: f64,
    /// Weight multiplying `gamma(tau)`; positive for `a > 0`.
    pub k1: f64,
    /// Sum of the `C_m`, a pure data constant.
    pub c0_const: f64,
}

impl GaussConstants {
    pub fn compute(x: &[f64], y: &[f64], sigma_x: f64, sigma_y: f64, a: f64) -> Self {
        let sx2 = sigma_x * sigma_x;
        let sy2 = sigma_y * sigma_y;
        let sum_x2: f64 = x.iter().map(|v| v * v).sum();
        let sum_y2: f64 = y.iter().map(|v| v * v).sum();
        let a_of_a = 0.5 * (1.0 / sx2 + a * a / sy2);
        GaussConstants {
            a_of_a,
            k0: sum_x2 / (4.0 * a_of_a * sx2 * sx2) + a * a * sum_y2 / (4.0 * a_of_a * sy2 * sy2),
            k1: a / (a * a * sx2 + sy2),
            c0_const: 0.5 * (sum_x2 / sx2 + sum_y2 / sy2),
        }
    }
}

fn validate_pair(x: &SampledSeries, y: &SampledSeries) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "sampled series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.len())
}

fn validate_scale(a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::validation(format!(
            "scale factor must be positive and finite, got {a}"
        )));
    }
    Ok(())
}

fn validate_constant_sigma(sigma: f64, which: &str) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::validation(format!(
            "{which} must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

/// `log P0`: the product of the two per-sample normal normalizers.
fn log_p0(sigma_x: &[f64], sigma_y: &[f64]) -> f64 {
    let m = sigma_x.len() as f64;
    let sum_logs: f64 = sigma_x
        .iter()
        .zip(sigma_y.iter())
        .map(|(sx, sy)| sx.ln() + sy.ln())
        .sum();
    -m * (2.0 * std::f64::consts::PI).ln() - sum_logs
}

/// Marginalized log posterior at one `(tau, a)` cell with per-sample
/// noise scales. Shifted indices wrap circularly.
pub fn gauss_log_posterior_general(
    x: &SampledSeries,
    y: &SampledSeries,
    tau: usize,
    a: f64,
) -> Result<f64> {
    let m = validate_pair(x, y)?;
    validate_scale(a)?;
    let tau = tau % m;
    let (xv, yv) = (x.values(), y.values());
    let (sx, sy) = (x.sigmas(), y.sigmas());
    let mut quad = 0.0;
    let mut log_width = 0.0;
    for i in 0..m {
        let j = if i + tau >= m { i + tau - m } else { i + tau };
        let t = gauss_term(xv[i], yv[j], sx[i], sy[j], a);
        quad += t.b_m * t.b_m / t.a_m - t.c_m;
        log_width += 0.5 * (std::f64::consts::PI / t.a_m).ln();
    }
    Ok(log_p0(sx, sy) + quad + log_width)
}

/// Constant-noise fast path: log posterior per requested lag, sharing one
/// set of lag-independent constants.
pub fn gauss_log_posterior_constant(
    x: &SampledSeries,
    y: &SampledSeries,
    sigma_x: f64,
    sigma_y: f64,
    tau_grid: &[usize],
    a: f64,
) -> Result<Vec<f64>> {
    let m = validate_pair(x, y)?;
    validate_scale(a)?;
    validate_constant_sigma(sigma_x, "sigma_x")?;
    validate_constant_sigma(sigma_y, "sigma_y")?;
    let (xv, yv) = (x.values(), y.values());
    let k = GaussConstants::compute(xv, yv, sigma_x, sigma_y, a);
    let base = -(m as f64) * (2.0 * std::f64::consts::PI).ln()
        - m as f64 * (sigma_x.ln() + sigma_y.ln())
        + 0.5 * m as f64 * (std::f64::consts::PI / k.a_of_a).ln()
        - k.c0_const
        + k.k0;
    Ok(tau_grid
        .iter()
        .map(|&tau| {
            let tau = tau % m;
            let mut gamma = 0.0;
            for i in 0..m {
                let j = if i + tau >= m { i + tau - m } else { i + tau };
                gamma += xv[i] * yv[j];
            }
            base + k.k1 * gamma
        })
        .collect())
}

/// Noise model for [`gauss_posterior_surface`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    /// Override both series with constant scales (enables the fast path).
    Constant { sigma_x: f64, sigma_y: f64 },
    /// Use the per-sample scales carried by the series; the fast path is
    /// taken exactly when both vectors are constant.
    PerSample,
}

/// Evaluate the normalized posterior grid for a sampled-series pair.
pub fn gauss_posterior_surface(
    x: &SampledSeries,
    y: &SampledSeries,
    tau_grid: &[usize],
    a_grid: &[f64],
    noise: &NoiseSpec,
) -> Result<PosteriorSurface> {
    let m = validate_pair(x, y)?;
    if tau_grid.is_empty() || a_grid.is_empty() {
        return Err(Error::validation("lag and scale grids must be non-empty"));
    }
    if let Some(&tau) = tau_grid.iter().find(|&&t| t >= m) {
        return Err(Error::validation(format!(
            "lag {tau} outside span [0, {m})"
        )));
    }
    for &a in a_grid {
        validate_scale(a)?;
    }

    let constant = match noise {
        NoiseSpec::Constant { sigma_x, sigma_y } => {
            validate_constant_sigma(*sigma_x, "sigma_x")?;
            validate_constant_sigma(*sigma_y, "sigma_y")?;
            Some((*sigma_x, *sigma_y))
        }
        NoiseSpec::PerSample => {
            if x.has_constant_sigma() && y.has_constant_sigma() {
                Some((x.sigmas()[0], y.sigmas()[0]))
            } else {
                None
            }
        }
    };

    let n_a = a_grid.len();
    let mut log_post = vec![0.0; tau_grid.len() * n_a];
    match constant {
        Some((sx, sy)) => {
            for (j, &a) in a_grid.iter().enumerate() {
                let col = gauss_log_posterior_constant(x, y, sx, sy, tau_grid, a)?;
                for (i, v) in col.into_iter().enumerate() {
                    log_post[i * n_a + j] = v;
                }
            }
        }
        None => {
            let rows: Vec<Vec<f64>> = tau_grid
                .par_iter()
                .map(|&tau| {
                    a_grid
                        .iter()
                        .map(|&a| gauss_log_posterior_general(x, y, tau, a).expect("validated"))
                        .collect()
                })
                .collect();
            for (i, row) in rows.into_iter().enumerate() {
                log_post[i * n_a..(i + 1) * n_a].copy_from_slice(&row);
            }
        }
    }
    PosteriorSurface::new(tau_grid.to_vec(), a_grid.to_vec(), log_post)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::lag_estimates;
    use approx::assert_abs_diff_eq;

    fn constant_series(values: Vec<f64>, sigma: f64) -> SampledSeries {
        let n = values.len();
        SampledSeries::new(values, vec![sigma; n], 1.0).unwrap()
    }

    #[test]
    fn single_zero_sample() {
        let x = constant_series(vec![0.0], 1.0);
        let y = constant_series(vec![0.0], 1.0);
        let lp = gauss_log_posterior_general(&x, &y, 0, 1.0).unwrap();
        let expect = -(2.0 * std::f64::consts::PI).ln() + 0.5 * std::f64::consts::PI.ln();
        assert_abs_diff_eq!(lp, expect, epsilon = 1e-14);
    }

    #[test]
    fn k1_unit_case() {
        let k = GaussConstants::compute(&[1.0, 2.0], &[0.5, 0.25], 1.0, 1.0, 1.0);
        assert_abs_diff_eq!(k.k1, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn lag_differences_are_scaled_gamma_differences() {
        let x = constant_series(vec![0.3, -1.2, 0.8, 2.0, -0.4, 0.1], 0.7);
        let y = constant_series(vec![1.0, 0.2, -0.9, 0.5, 1.4, -0.2], 1.3);
        let a = 1.7;
        let k = GaussConstants::compute(x.values(), y.values(), 0.7, 1.3, a);
        let lp = gauss_log_posterior_constant(&x, &y, 0.7, 1.3, &[0, 1, 2, 3, 4, 5], a).unwrap();
        let gamma: Vec<f64> = (0..6)
            .map(|tau| {
                (0..6)
                    .map(|i| x.values()[i] * y.values()[(i + tau) % 6])
                    .sum::<f64>()
            })
            .collect();
        for t1 in 0..6 {
            for t2 in 0..6 {
                assert_abs_diff_eq!(
                    lp[t1] - lp[t2],
                    k.k1 * (gamma[t1] - gamma[t2]),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn identical_series_map_at_zero() {
        let x = constant_series(vec![0.1, 1.4, -0.3, 0.9, 2.2, -1.0, 0.4, 0.0], 0.5);
        let tau_grid: Vec<usize> = (0..8).collect();
        let s = gauss_posterior_surface(&x, &x, &tau_grid, &[1.0], &NoiseSpec::PerSample).unwrap();
        let est = lag_estimates(&s, (0, 7), 0.95).unwrap();
        assert_eq!(est.map_tau, 0);
    }

    #[test]
    fn huge_y_noise_flattens_lag_posterior() {
        let x = constant_series(vec![1.0, -2.0, 0.5, 3.0, -0.7, 0.2, 1.1, -0.9], 1.0);
        let y = constant_series(vec![0.4, 1.9, -1.2, 0.8, 2.5, -0.3, 0.6, 1.0], 1.0);
        let tau_grid: Vec<usize> = (0..8).collect();
        let s = gauss_posterior_surface(
            &x,
            &y,
            &tau_grid,
            &[1.0],
            &NoiseSpec::Constant {
                sigma_x: 1.0,
                sigma_y: 1e6,
            },
        )
        .unwrap();
        let marg = s.tau_log_marginal();
        let spread = marg.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - marg.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-6, "spread {spread}");
    }

    #[test]
    fn noiseless_shift_recovers_lag() {
        let base: Vec<f64> = (0..32)
            .map(|i| (i as f64 * 0.7).sin() + 0.3 * (i as f64 * 0.13).cos())
            .collect();
        let a = 1.8;
        let tau_true = 5usize;
        // y[m] = a * x[m - tau], so y[m + tau] = a * x[m]
        let shifted: Vec<f64> = (0..32).map(|i| a * base[(i + 32 - tau_true) % 32]).collect();
        let x = constant_series(base, 1e-6);
        let y = constant_series(shifted, 1e-6);
        let tau_grid: Vec<usize> = (0..32).collect();
        let a_grid = [0.9, 1.8, 3.6];
        let s = gauss_posterior_surface(&x, &y, &tau_grid, &a_grid, &NoiseSpec::PerSample).unwrap();
        let est = lag_estimates(&s, (0, 31), 0.95).unwrap();
        assert_eq!(est.map_tau, tau_true);
    }

    #[test]
    fn surface_validation_errors() {
        let x = constant_series(vec![1.0, 2.0], 1.0);
        let y = constant_series(vec![1.0, 2.0, 3.0], 1.0);
        assert!(gauss_posterior_surface(&x, &y, &[0], &[1.0], &NoiseSpec::PerSample).is_err());
        let y = constant_series(vec![1.0, 2.0], 1.0);
        assert!(gauss_posterior_surface(&x, &y, &[], &[1.0], &NoiseSpec::PerSample).is_err());
        assert!(gauss_posterior_surface(&x, &y, &[2], &[1.0], &NoiseSpec::PerSample).is_err());
        assert!(gauss_posterior_surface(&x, &y, &[0], &[-1.0], &NoiseSpec::PerSample).is_err());
        assert!(gauss_posterior_surface(
            &x,
            &y,
            &[0],
            &[1.0],
            &NoiseSpec::Constant {
                sigma_x: 0.0,
                sigma_y: 1.0
            }
        )
        .is_err());
    }
}
