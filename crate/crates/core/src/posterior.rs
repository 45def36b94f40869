//! Posterior grids over (lag, scale) and point/interval summaries.
//!
//! Both estimation modes produce the same artifact: a matrix of log
//! densities over an integer lag grid and a positive scale grid, with a
//! log-sum-exp normalizer so that the exponentiated grid sums to one.
//! Priors over the grids are uniform on the supplied points, so the
//! surface is a pure reweighting of the per-cell evidence.

use crate::error::{Error, Result};

/// Log of the sum of exponentials, evaluated in index order with the usual
/// max shift. Empty input and all `-inf` input both give `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max; // empty, all -inf, or a NaN/inf already present
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Log-density grid over `(tau, a)` with its normalization constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSurface {
    tau_grid: Vec<usize>,
    a_grid: Vec<f64>,
    /// Row-major: `log_post[i * a_grid.len() + j]` for lag i, scale j.
    log_post: Vec<f64>,
    log_norm: f64,
}

impl PosteriorSurface {
    /// Wrap a raw log-density matrix, computing the grid normalizer.
    pub fn new(tau_grid: Vec<usize>, a_grid: Vec<f64>, log_post: Vec<f64>) -> Result<Self> {
        if tau_grid.is_empty() || a_grid.is_empty() {
            return Err(Error::validation("posterior grids must be non-empty"));
        }
        if log_post.len() != tau_grid.len() * a_grid.len() {
            return Err(Error::validation(format!(
                "log-density matrix has {} entries, expected {}",
                log_post.len(),
                tau_grid.len() * a_grid.len()
            )));
        }
        let log_norm = log_sum_exp(&log_post);
        Ok(PosteriorSurface {
            tau_grid,
            a_grid,
            log_post,
            log_norm,
        })
    }

    pub fn tau_grid(&self) -> &[usize] {
        &self.tau_grid
    }

    pub fn a_grid(&self) -> &[f64] {
        &self.a_grid
    }

    /// Unnormalized log density at lag index `i`, scale index `j`.
    pub fn log_post(&self, i: usize, j: usize) -> f64 {
        self.log_post[i * self.a_grid.len() + j]
    }

    /// Log of the grid-sum normalizer.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Normalized probability mass of one grid cell.
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        (self.log_post(i, j) - self.log_norm).exp()
    }

    /// Raw log-density row for one lag.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.a_grid.len();
        &self.log_post[i * n..(i + 1) * n]
    }

    /// Unnormalized log marginal over the scale grid, one entry per lag.
    pub fn tau_log_marginal(&self) -> Vec<f64> {
        (0..self.tau_grid.len())
            .map(|i| log_summed_row(self.row(i)))
            .collect()
    }
}

fn log_summed_row(row: &[f64]) -> f64 {
    log_sum_exp(row)
}

/// Point and interval summaries of the lag marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct LagEstimates {
    /// Lag maximizing the scale-marginalized posterior (ties: smallest lag).
    pub map_tau: usize,
    /// Posterior-weighted mean lag over the window, on the linear axis.
    pub mean_tau: f64,
    /// Smallest-mass-count highest-density set, reported by its extremes.
    pub hpd_lo: usize,
    pub hpd_hi: usize,
    /// Requested credible level.
    pub level: f64,
}

/// Summarize the lag marginal restricted to the inclusive window
/// `[window.0, window.1]`.
///
/// The MAP breaks ties toward the smallest lag; the mean is taken on the
/// linear (non-circular) axis of the window; the credible set greedily
/// accumulates lags by decreasing mass until it holds at least `level`.
pub fn lag_estimates(
    surface: &PosteriorSurface,
    window: (usize, usize),
    level: f64,
) -> Result<LagEstimates> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::validation(format!(
            "credible level must be in (0, 1), got {level}"
        )));
    }
    let (lo, hi) = window;
    if lo > hi {
        return Err(Error::validation(format!(
            "window lower bound {lo} exceeds upper bound {hi}"
        )));
    }
    let marginal = surface.tau_log_marginal();
    let selected: Vec<(usize, f64)> = surface
        .tau_grid()
        .iter()
        .zip(marginal.iter())
        .filter(|(&tau, _)| lo <= tau && tau <= hi)
        .map(|(&tau, &lm)| (tau, lm))
        .collect();
    if selected.is_empty() {
        return Err(Error::validation(format!(
            "window [{lo}, {hi}] selects no grid lags"
        )));
    }

    let window_norm = log_sum_exp(&selected.iter().map(|&(_, lm)| lm).collect::<Vec<_>>());
    let masses: Vec<(usize, f64)> = selected
        .iter()
        .map(|&(tau, lm)| (tau, (lm - window_norm).exp()))
        .collect();

    let mut map_tau = masses[0].0;
    let mut best = masses[0].1;
    for &(tau, p) in &masses[1..] {
        if p > best {
            best = p;
            map_tau = tau;
        }
    }

    let mean_tau = masses.iter().map(|&(tau, p)| tau as f64 * p).sum();

    // greedy highest-density set; ties resolved toward smaller lags
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&i, &j| {
        masses[j]
            .1
            .partial_cmp(&masses[i].1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(masses[i].0.cmp(&masses[j].0))
    });
    let mut cum = 0.0;
    let mut hpd_lo = usize::MAX;
    let mut hpd_hi = 0usize;
    for &idx in &order {
        let (tau, p) = masses[idx];
        cum += p;
        hpd_lo = hpd_lo.min(tau);
        hpd_hi = hpd_hi.max(tau);
        if cum >= level {
            break;
        }
    }

    Ok(LagEstimates {
        map_tau,
        mean_tau,
        hpd_lo,
        hpd_hi,
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spike_surface(m: usize, at: usize) -> PosteriorSurface {
        let log_post: Vec<f64> = (0..m)
            .map(|t| if t == at { 0.0 } else { -1e6 })
            .collect();
        PosteriorSurface::new((0..m).collect(), vec![1.0], log_post).unwrap()
    }

    #[test]
    fn normalization_invariant() {
        let s = PosteriorSurface::new(vec![0, 1, 2], vec![0.5, 2.0], vec![0.3; 6]).unwrap();
        let total: f64 = (0..3).flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| s.mass(i, j))
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(PosteriorSurface::new(vec![], vec![1.0], vec![]).is_err());
        assert!(PosteriorSurface::new(vec![0], vec![], vec![]).is_err());
    }

    #[test]
    fn delta_spike_estimates() {
        let s = spike_surface(64, 17);
        let est = lag_estimates(&s, (0, 63), 0.95).unwrap();
        assert_eq!(est.map_tau, 17);
        assert_abs_diff_eq!(est.mean_tau, 17.0, epsilon = 1e-9);
        assert_eq!((est.hpd_lo, est.hpd_hi), (17, 17));
    }

    #[test]
    fn flat_window_mean() {
        let s = PosteriorSurface::new((0..32).collect(), vec![1.0], vec![0.0; 32]).unwrap();
        let est = lag_estimates(&s, (0, 9), 0.95).unwrap();
        assert_abs_diff_eq!(est.mean_tau, 4.5, epsilon = 1e-12);
        assert_eq!(est.map_tau, 0); // flat ties resolve to the smallest lag
        assert_eq!((est.hpd_lo, est.hpd_hi), (0, 9));
    }

    #[test]
    fn empty_window_rejected() {
        let s = spike_surface(8, 3);
        assert!(lag_estimates(&s, (10, 20), 0.95).is_err());
        assert!(lag_estimates(&s, (5, 2), 0.95).is_err());
    }

    #[test]
    fn log_sum_exp_edge_cases() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_abs_diff_eq!(log_sum_exp(&[0.0, 0.0]), 2.0_f64.ln(), epsilon = 1e-15);
        // huge offsets do not overflow
        assert_abs_diff_eq!(
            log_sum_exp(&[-1e4, -1e4 + 1.0]) + 1e4,
            1.0 + 1.0_f64.exp().recip().ln_1p(),
            epsilon = 1e-12
        );
    }
}
