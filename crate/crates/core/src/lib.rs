//! Bayesian lag estimation between two time series, and piecewise-constant
//! signal estimation from weighted-integral measurements.
//!
//! Two data modes share one estimation artifact. For time-tagged events
//! (integer ticks, at most one event per tick) the latent per-tick signal
//! level is marginalized under a uniform prior, and for evenly sampled
//! Gaussian data it is integrated against a flat prior; in both cases the
//! log posterior over (lag, scale) reduces to an affine function of the
//! circular cross-correlation, which is computed once per pair. Posteriors
//! come back as normalized grids with MAP/mean/credible-interval
//! summaries.
//!
//! The third component fits contiguous constant-height blocks to
//! measurements that average the underlying signal through per-datum
//! weight kernels, marginalizing the heights analytically and scanning
//! changepoint placements exhaustively.
//!
//! Modules:
//! - [`series`]: data model and file ingestion
//! - [`xcorr`]: circular cross-correlation and coincidence counts
//! - [`lag_tte`]: event-mode posterior
//! - [`lag_gauss`]: sampled-mode posterior
//! - [`posterior`]: shared surface type and lag summaries
//! - [`blocks`]: piecewise-constant fitting and changepoint search
//! - [`synth`]: seeded generators for tests and benchmarks

pub mod blocks;
pub mod error;
pub mod lag_gauss;
pub mod lag_tte;
pub mod posterior;
pub mod series;
pub mod synth;
pub mod xcorr;

pub use error::{Error, Result};
