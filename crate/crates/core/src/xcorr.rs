//! Circular cross-correlation and its reduction to coincidence counts.
//!
//! The correlation convention is `gamma[tau] = sum_m x[m] * y[(m+tau) mod M]`:
//! a positive lag means `y` repeats `x` `tau` ticks later. Indices wrap
//! around the span, so the relation `gamma_xy(tau) = gamma_yx(M - tau mod M)`
//! holds exactly.
//!
//! For indicator inputs `gamma[tau]` is the number of tick pairs with an
//! event in both series at separation `tau`; together with the two event
//! counts it fixes all four per-lag coincidence counts.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::series::IndicatorVector;

/// FFT correlation entries computed from indicator inputs must land within
/// this distance of an integer.
const FFT_INTEGER_TOL: f64 = 1e-6;

/// Circular cross-correlation over the full lag range `{0, .., M-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcfVector {
    /// `gamma[tau]`: counts for indicator inputs, signal-units^2 otherwise.
    pub gamma: Vec<f64>,
    /// Always true in this version; shifts wrap around the span.
    pub circular: bool,
}

impl CcfVector {
    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Per-lag counts of the four joint event/no-event outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoincidenceCounts {
    pub n00: usize,
    pub n01: usize,
    pub n10: usize,
    pub n11: usize,
    pub tau: usize,
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::validation("series must have at least one sample"));
    }
    Ok(x.len())
}

/// Reference O(M^2) circular cross-correlation.
pub fn ccf_direct(x: &[f64], y: &[f64]) -> Result<CcfVector> {
    let m = check_lengths(x, y)?;
    let mut gamma = vec![0.0; m];
    for (tau, g) in gamma.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            let j = i + tau;
            let j = if j >= m { j - m } else { j };
            acc += xi * y[j];
        }
        *g = acc;
    }
    Ok(CcfVector {
        gamma,
        circular: true,
    })
}

/// FFT-based circular cross-correlation; same values as [`ccf_direct`] up
/// to floating-point rounding.
pub fn ccf_fft(x: &[f64], y: &[f64]) -> Result<CcfVector> {
    let m = check_lengths(x, y)?;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);
    let mut fx: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut fy: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut fx);
    fft.process(&mut fy);
    // conj(X) * Y is the spectrum of the lag-positive cross-correlation
    let mut prod: Vec<Complex<f64>> = fx
        .iter()
        .zip(fy.iter())
        .map(|(a, b)| a.conj() * b)
        .collect();
    ifft.process(&mut prod);
    let scale = 1.0 / m as f64;
    Ok(CcfVector {
        gamma: prod.iter().map(|c| c.re * scale).collect(),
        circular: true,
    })
}

/// Correlation method selector for the event-count entry points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CcfMethod {
    #[default]
    Fft,
    Direct,
}

/// Cross-correlate two indicator vectors, returning exact integer counts.
///
/// The FFT path rounds each entry to the nearest integer and fails if any
/// residual exceeds 1e-6, which would indicate an internal numerical fault.
pub fn ccf_indicator(
    x: &IndicatorVector,
    y: &IndicatorVector,
    method: CcfMethod,
) -> Result<CcfVector> {
    let xs = x.to_f64();
    let ys = y.to_f64();
    match method {
        CcfMethod::Direct => ccf_direct(&xs, &ys),
        CcfMethod::Fft => {
            let mut ccf = ccf_fft(&xs, &ys)?;
            for (tau, g) in ccf.gamma.iter_mut().enumerate() {
                let rounded = g.round();
                if (*g - rounded).abs() > FFT_INTEGER_TOL {
                    return Err(Error::Inconsistency(format!(
                        "FFT correlation entry at lag {tau} is {g}, residual {:.3e} from integer",
                        (*g - rounded).abs()
                    )));
                }
                *g = rounded;
            }
            Ok(ccf)
        }
    }
}

/// Recover the four per-lag coincidence counts from one correlation entry
/// and the two event totals. The preconditions follow from the counts
/// exhausting all `m`; a violation signals corrupted inputs.
pub fn coincidence_counts(
    tau: usize,
    gamma_tau: usize,
    n_x: usize,
    n_y: usize,
    m: usize,
) -> Result<CoincidenceCounts> {
    if gamma_tau > n_x.min(n_y) {
        return Err(Error::Inconsistency(format!(
            "gamma({tau}) = {gamma_tau} exceeds min(N_X, N_Y) = {}",
            n_x.min(n_y)
        )));
    }
    if n_x + n_y - gamma_tau > m {
        return Err(Error::Inconsistency(format!(
            "N_X + N_Y - gamma = {} exceeds span M = {m}",
            n_x + n_y - gamma_tau
        )));
    }
    Ok(CoincidenceCounts {
        n00: m + gamma_tau - n_x - n_y,
        n01: n_y - gamma_tau,
        n10: n_x - gamma_tau,
        n11: gamma_tau,
        tau,
    })
}

impl CoincidenceCounts {
    /// Span covered by the four counts.
    pub fn total(&self) -> usize {
        self.n00 + self.n01 + self.n10 + self.n11
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{to_indicator, EventSeries};

    #[test]
    fn direct_single_aligned_pair() {
        let g = ccf_direct(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.gamma, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn direct_all_ones() {
        let g = ccf_direct(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(g.gamma, vec![2.0, 2.0]);
    }

    #[test]
    fn direct_event_pairs_at_common_separation() {
        let x = to_indicator(&EventSeries::new(vec![2, 5], 10).unwrap());
        let y = to_indicator(&EventSeries::new(vec![4, 7], 10).unwrap());
        let g = ccf_direct(&x.to_f64(), &y.to_f64()).unwrap();
        assert_eq!(g.gamma[2], 2.0);
    }

    #[test]
    fn direct_length_mismatch() {
        assert!(ccf_direct(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn fft_matches_examples() {
        let g = ccf_fft(&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]).unwrap();
        let rounded: Vec<f64> = g.gamma.iter().map(|v| v.round()).collect();
        assert_eq!(rounded, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn fft_all_zeros() {
        let g = ccf_indicator(
            &IndicatorVector::from_bits(vec![0, 0, 0, 0]).unwrap(),
            &IndicatorVector::from_bits(vec![0, 1, 0, 1]).unwrap(),
            CcfMethod::Fft,
        )
        .unwrap();
        assert_eq!(g.gamma, vec![0.0; 4]);
    }

    #[test]
    fn indicator_paths_agree_small() {
        let x = to_indicator(&EventSeries::new(vec![0, 3, 4, 9, 17], 32).unwrap());
        let y = to_indicator(&EventSeries::new(vec![1, 4, 5, 22], 32).unwrap());
        let d = ccf_indicator(&x, &y, CcfMethod::Direct).unwrap();
        let f = ccf_indicator(&x, &y, CcfMethod::Fft).unwrap();
        assert_eq!(d, f);
    }

    #[test]
    fn coincidence_examples() {
        let c = coincidence_counts(0, 1, 3, 2, 10).unwrap();
        assert_eq!((c.n00, c.n01, c.n10, c.n11), (6, 1, 2, 1));
        let c = coincidence_counts(0, 0, 0, 0, 5).unwrap();
        assert_eq!((c.n00, c.n01, c.n10, c.n11), (5, 0, 0, 0));
        let c = coincidence_counts(0, 2, 2, 2, 4).unwrap();
        assert_eq!((c.n00, c.n01, c.n10, c.n11), (2, 0, 0, 2));
        assert_eq!(c.total(), 4);
    }

    #[test]
    fn coincidence_precondition_violations() {
        assert!(matches!(
            coincidence_counts(0, 3, 2, 5, 10),
            Err(Error::Inconsistency(_))
        ));
        assert!(matches!(
            coincidence_counts(0, 0, 6, 6, 10),
            Err(Error::Inconsistency(_))
        ));
    }
}
