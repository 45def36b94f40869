//! Seeded synthetic-data generators for all three data modes.
//!
//! Every generator derives named ChaCha substreams from `(seed, label)`,
//! so the X and Y noise draws are independent: changing a Y-side
//! parameter never perturbs the X realization, and identical inputs give
//! bit-identical outputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::blocks::{predict, BlockModel};
use crate::error::{Error, Result};
use crate::series::{EventSeries, SampledSeries, WeightFunction, WeightedDatum};

/// Latent signal shape, realized per tick (event mode) or per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SignalSpec {
    Constant { level: f64 },
    GaussianPulse { center: f64, width: f64, amplitude: f64 },
    Table { values: Vec<f64> },
}

impl SignalSpec {
    /// Realized signal values over `m` ticks; must be non-negative.
    pub fn realize(&self, m: usize) -> Result<Vec<f64>> {
        let values = match self {
            SignalSpec::Constant { level } => vec![*level; m],
            SignalSpec::GaussianPulse {
                center,
                width,
                amplitude,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::validation(format!(
                        "pulse width must be positive, got {width}"
                    )));
                }
                (0..m)
                    .map(|i| {
                        let d = (i as f64 - center) / width;
                        amplitude * (-0.5 * d * d).exp()
                    })
                    .collect()
            }
            SignalSpec::Table { values } => {
                if values.len() != m {
                    return Err(Error::validation(format!(
                        "signal table has {} entries for span {m}",
                        values.len()
                    )));
                }
                values.clone()
            }
        };
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::validation(format!(
                "realized signal values must be non-negative and finite, got {v}"
            )));
        }
        Ok(values)
    }
}

/// Generation parameters shared by the lag-mode generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub m: usize,
    pub tau_true: usize,
    pub a_true: f64,
    #[serde(default)]
    pub b_x: f64,
    #[serde(default)]
    pub b_y: f64,
    pub seed: u64,
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::validation("span m must be at least 1"));
        }
        if self.tau_true >= self.m {
            return Err(Error::validation(format!(
                "true lag {} outside span [0, {})",
                self.tau_true, self.m
            )));
        }
        if !(self.a_true > 0.0) || !self.a_true.is_finite() {
            return Err(Error::validation(format!(
                "scale factor must be positive and finite, got {}",
                self.a_true
            )));
        }
        if !(self.b_x >= 0.0) || !(self.b_y >= 0.0) {
            return Err(Error::validation(
                "backgrounds must be non-negative".to_string(),
            ));
        }
        Ok(())
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Independent named substream of the master seed.
fn substream(seed: u64, label: &str) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(label.as_bytes()));
    rng
}

/// Per-tick event probability `1 - exp(-rate)`, rejecting saturation.
fn event_probability(rate: f64) -> Result<f64> {
    if !rate.is_finite() {
        return Err(Error::validation(format!("rate overflow: {rate}")));
    }
    let p = -(-rate).exp_m1();
    if !(p < 1.0) {
        return Err(Error::validation(format!(
            "rate {rate} saturates the per-tick event probability"
        )));
    }
    Ok(p)
}

fn draw_events(probs: &[f64], rng: &mut ChaCha12Rng) -> Vec<usize> {
    probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| rng.random::<f64>() < p)
        .map(|(m, _)| m)
        .collect()
}

/// Draw an event-series pair: per-tick Bernoulli thinning of the signal
/// plus background, with the Y rates shifted circularly by the true lag.
pub fn gen_tte(signal: &SignalSpec, cfg: &GenConfig) -> Result<(EventSeries, EventSeries)> {
    cfg.validate()?;
    let s = signal.realize(cfg.m)?;
    let px: Vec<f64> = s
        .iter()
        .map(|&v| event_probability(v + cfg.b_x))
        .collect::<Result<_>>()?;
    let py: Vec<f64> = (0..cfg.m)
        .map(|m| {
            let shifted = s[(m + cfg.m - cfg.tau_true) % cfg.m];
            event_probability(cfg.a_true * shifted + cfg.b_y)
        })
        .collect::<Result<_>>()?;
    let x_ticks = draw_events(&px, &mut substream(cfg.seed, "tte/x"));
    let y_ticks = draw_events(&py, &mut substream(cfg.seed, "tte/y"));
    Ok((
        EventSeries::new(x_ticks, cfg.m)?,
        EventSeries::new(y_ticks, cfg.m)?,
    ))
}

/// Draw a sampled-series pair with additive Gaussian noise and a circular
/// shift of the shared signal.
pub fn gen_gauss(
    signal: &SignalSpec,
    cfg: &GenConfig,
    sigma_x: f64,
    sigma_y: f64,
) -> Result<(SampledSeries, SampledSeries)> {
    cfg.validate()?;
    if !(sigma_x > 0.0) || !(sigma_y > 0.0) {
        return Err(Error::validation("noise scales must be positive".to_string()));
    }
    let s = signal.realize(cfg.m)?;
    let mut rng_x = substream(cfg.seed, "gauss/x");
    let mut rng_y = substream(cfg.seed, "gauss/y");
    let x: Vec<f64> = s
        .iter()
        .map(|&v| v + sigma_x * rng_x.sample::<f64, _>(StandardNormal))
        .collect();
    let y: Vec<f64> = (0..cfg.m)
        .map(|m| {
            let shifted = s[(m + cfg.m - cfg.tau_true) % cfg.m];
            cfg.a_true * shifted + sigma_y * rng_y.sample::<f64, _>(StandardNormal)
        })
        .collect();
    Ok((
        SampledSeries::new(x, vec![sigma_x; cfg.m], 1.0)?,
        SampledSeries::new(y, vec![sigma_y; cfg.m], 1.0)?,
    ))
}

/// Draw weighted-integral data from a block model: the model prediction
/// through each kernel plus independent Gaussian noise.
pub fn gen_blocks_data(
    model: &BlockModel,
    weights: &[WeightFunction],
    sigmas: &[f64],
    seed: u64,
) -> Result<Vec<WeightedDatum>> {
    if weights.len() != sigmas.len() {
        return Err(Error::validation(format!(
            "weights ({}) and sigmas ({}) differ in length",
            weights.len(),
            sigmas.len()
        )));
    }
    if weights.is_empty() {
        return Err(Error::validation("need at least one weight".to_string()));
    }
    let mut data: Vec<WeightedDatum> = weights
        .iter()
        .zip(sigmas.iter())
        .map(|(w, &sigma)| WeightedDatum::new(w.nominal_position(), 0.0, sigma, w.clone()))
        .collect::<Result<_>>()?;
    let clean = predict(model, &data);
    let mut rng = substream(seed, "blocks/noise");
    for (d, y0) in data.iter_mut().zip(clean) {
        d.y = y0 + d.sigma * rng.sample::<f64, _>(StandardNormal);
    }
    Ok(data)
}
