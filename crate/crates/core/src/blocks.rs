//! Piecewise-constant signal estimation from weighted-integral
//! measurements.
//!
//! Each datum averages the underlying signal through its weight kernel, so
//! a block model predicts `yhat_n = sum_j B_j G_j(n)` where `G_j(n)` is the
//! kernel mass falling inside block `j`. Overlapping kernels couple the
//! blocks; the height fit solves the resulting normal equations after
//! normalizing every row by its noise scale. Delta kernels make the Gram
//! matrix diagonal and the fit reduces to per-block inverse-variance means.
//!
//! Heights carry flat priors and are marginalized analytically, leaving a
//! determinant-penalized residual as the per-configuration log marginal.
//! Changepoint placement is an exhaustive scan over a candidate set (by
//! default the midpoints between consecutive data positions); overlapping
//! kernels couple blocks across changepoints, which rules out the usual
//! dynamic-programming shortcut.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::{WeightFunction, WeightedDatum};

/// Exhaustive search refuses to enumerate more configurations than this.
const SEARCH_LIMIT: u64 = 1_000_000;

/// Cholesky pivots at or below this relative threshold are treated as
/// singular.
const PIVOT_RTOL: f64 = 1e-12;

/// A contiguous piecewise-constant model: `n_blocks` heights separated by
/// `n_blocks - 1` interior changepoints inside a closed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    changepoints: Vec<f64>,
    heights: Vec<f64>,
    domain: (f64, f64),
}

impl BlockModel {
    pub fn new(changepoints: Vec<f64>, heights: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        if heights.is_empty() {
            return Err(Error::validation("a block model needs at least one block"));
        }
        if changepoints.len() + 1 != heights.len() {
            return Err(Error::validation(format!(
                "{} changepoints require {} heights, got {}",
                changepoints.len(),
                changepoints.len() + 1,
                heights.len()
            )));
        }
        let (lo, hi) = domain;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation(format!("bad domain [{lo}, {hi}]")));
        }
        let mut prev = lo;
        for &z in &changepoints {
            if !(prev <= z) || z > hi {
                return Err(Error::validation(format!(
                    "changepoints must be ordered within the domain; {z} violates \
                     [{prev}, {hi}]"
                )));
            }
            prev = z;
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::validation("heights must be finite"));
        }
        Ok(BlockModel {
            changepoints,
            heights,
            domain,
        })
    }

    pub fn changepoints(&self) -> &[f64] {
        &self.changepoints
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn n_blocks(&self) -> usize {
        self.heights.len()
    }

    /// Full boundary chain: domain edge, changepoints, domain edge.
    pub fn edges(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.changepoints.len() + 2);
        edges.push(self.domain.0);
        edges.extend_from_slice(&self.changepoints);
        edges.push(self.domain.1);
        edges
    }

    /// Model value at a point; zero outside the domain. A point exactly on
    /// a changepoint belongs to the lower block.
    pub fn value_at(&self, x: f64) -> f64 {
        let edges = self.edges();
        for j in 0..self.heights.len() {
            let included = if j == 0 {
                edges[0] <= x && x <= edges[1]
            } else {
                edges[j] < x && x <= edges[j + 1]
            };
            if included {
                return self.heights[j];
            }
        }
        0.0
    }
}

/// Mass of a weight kernel inside `[zeta_lo, zeta_hi]`.
///
/// Delta kernels count as contained when `zeta_lo < center <= zeta_hi`, so
/// a center exactly on a changepoint belongs to the lower block. Boxcar
/// and tabulated kernels integrate exactly; the gaussian kernel uses the
/// error function.
pub fn weight_block_product(w: &WeightFunction, zeta_lo: f64, zeta_hi: f64) -> f64 {
    weight_block_product_inner(w, zeta_lo, zeta_hi, false)
}

/// As [`weight_block_product`], but with the lower edge closed; used for
/// the first block of a model so boundary data are not lost.
fn weight_block_product_inner(
    w: &WeightFunction,
    zeta_lo: f64,
    zeta_hi: f64,
    closed_lo: bool,
) -> f64 {
    if zeta_lo > zeta_hi {
        return 0.0;
    }
    match w {
        WeightFunction::Delta { center } => {
            let inside = if closed_lo {
                zeta_lo <= *center && *center <= zeta_hi
            } else {
                zeta_lo < *center && *center <= zeta_hi
            };
            if inside {
                1.0
            } else {
                0.0
            }
        }
        WeightFunction::Boxcar { lo, hi } => {
            let overlap = (hi.min(zeta_hi) - lo.max(zeta_lo)).max(0.0);
            overlap / (hi - lo)
        }
        WeightFunction::Gaussian { center, width } => {
            let scale = width * std::f64::consts::SQRT_2;
            0.5 * (libm::erf((zeta_hi - center) / scale) - libm::erf((zeta_lo - center) / scale))
        }
        WeightFunction::Tabulated {
            abscissae,
            densities,
        } => {
            // exact integral of the piecewise-linear density, clipped
            let mut total = 0.0;
            for (xs, ds) in abscissae.windows(2).zip(densities.windows(2)) {
                let (x0, x1) = (xs[0], xs[1]);
                let a = x0.max(zeta_lo);
                let b = x1.min(zeta_hi);
                if a >= b {
                    continue;
                }
                let slope = (ds[1] - ds[0]) / (x1 - x0);
                let da = ds[0] + slope * (a - x0);
                let db = ds[0] + slope * (b - x0);
                total += 0.5 * (da + db) * (b - a);
            }
            total
        }
    }
}

/// Kernel-block masses for every datum against a boundary chain; the first
/// block is closed on the left.
fn design_row(weight: &WeightFunction, edges: &[f64]) -> Vec<f64> {
    (0..edges.len() - 1)
        .map(|j| weight_block_product_inner(weight, edges[j], edges[j + 1], j == 0))
        .collect()
}

/// Model predictions `yhat_n = sum_j B_j G_j(n)` for each datum.
pub fn predict(model: &BlockModel, data: &[WeightedDatum]) -> Vec<f64> {
    let edges = model.edges();
    data.iter()
        .map(|d| {
            design_row(&d.weight, &edges)
                .iter()
                .zip(model.heights())
                .map(|(g, b)| g * b)
                .sum()
        })
        .collect()
}

/// Noise-normalized design products: per-datum kernel masses, their Gram
/// matrix, and the data projection.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProducts {
    /// Row-major `n_data x n_blocks` matrix of `G_j(n) / sigma_n`.
    pub g: Vec<f64>,
    /// Row-major `n_blocks x n_blocks` Gram matrix.
    pub gram: Vec<f64>,
    /// `sum_n (y_n / sigma_n) * (G_j(n) / sigma_n)` per block.
    pub proj: Vec<f64>,
    /// `sum_n (y_n / sigma_n)^2`.
    pub y_sq: f64,
    pub n_blocks: usize,
}

impl DesignProducts {
    pub fn build(edges: &[f64], data: &[WeightedDatum]) -> Self {
        let nb = edges.len() - 1;
        let mut g = Vec::with_capacity(data.len() * nb);
        let mut gram = vec![0.0; nb * nb];
        let mut proj = vec![0.0; nb];
        let mut y_sq = 0.0;
        for d in data {
            let mut row = design_row(&d.weight, edges);
            let inv_sigma = 1.0 / d.sigma;
            for v in row.iter_mut() {
                *v *= inv_sigma;
            }
            let yn = d.y * inv_sigma;
            y_sq += yn * yn;
            for j in 0..nb {
                proj[j] += yn * row[j];
                for k in j..nb {
                    gram[j * nb + k] += row[j] * row[k];
                }
            }
            g.extend_from_slice(&row);
        }
        for j in 0..nb {
            for k in 0..j {
                gram[j * nb + k] = gram[k * nb + j];
            }
        }
        DesignProducts {
            g,
            gram,
            proj,
            y_sq,
            n_blocks: nb,
        }
    }
}

/// Result of a height fit at fixed changepoints.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightsFit {
    pub heights: Vec<f64>,
    /// Heights-marginalized log likelihood of this configuration.
    pub log_marginal: f64,
    /// Minimized quadratic form `H`.
    pub residual_h: f64,
}

/// Cholesky factor of a symmetric positive-definite matrix, failing on the
/// first pivot that is not positive. Returns the lower factor and the log
/// determinant of the input.
fn cholesky(gram: &[f64], nb: usize) -> Result<(Vec<f64>, f64)> {
    let mut l = vec![0.0; nb * nb];
    let mut log_det = 0.0;
    for j in 0..nb {
        let mut d = gram[j * nb + j];
        for k in 0..j {
            d -= l[j * nb + k] * l[j * nb + k];
        }
        if d <= PIVOT_RTOL * gram[j * nb + j].max(1.0) {
            return Err(Error::UnconstrainedBlock { block: j });
        }
        let root = d.sqrt();
        l[j * nb + j] = root;
        log_det += 2.0 * root.ln();
        for i in (j + 1)..nb {
            let mut v = gram[i * nb + j];
            for k in 0..j {
                v -= l[i * nb + k] * l[j * nb + k];
            }
            l[i * nb + j] = v / root;
        }
    }
    Ok((l, log_det))
}

fn cholesky_solve(l: &[f64], nb: usize, rhs: &[f64]) -> Vec<f64> {
    let mut z = rhs.to_vec();
    for i in 0..nb {
        for k in 0..i {
            z[i] -= l[i * nb + k] * z[k];
        }
        z[i] /= l[i * nb + i];
    }
    for i in (0..nb).rev() {
        for k in (i + 1)..nb {
            z[i] -= l[k * nb + i] * z[k];
        }
        z[i] /= l[i * nb + i];
    }
    z
}

/// Fit block heights at fixed interior changepoints. The domain is the
/// data's position range; every block must be constrained by at least one
/// datum or the fit fails naming the offending block.
pub fn fit_heights(changepoints: &[f64], data: &[WeightedDatum]) -> Result<HeightsFit> {
    let edges = edges_for(changepoints, data)?;
    let products = DesignProducts::build(&edges, data);
    fit_from_products(&products, data)
}

fn edges_for(changepoints: &[f64], data: &[WeightedDatum]) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::validation("no data to fit"));
    }
    let lo = data.iter().map(|d| d.x).fold(f64::INFINITY, f64::min);
    let hi = data.iter().map(|d| d.x).fold(f64::NEG_INFINITY, f64::max);
    let mut prev = lo;
    for &z in changepoints {
        if !(prev <= z) || z > hi {
            return Err(Error::validation(format!(
                "changepoint {z} outside ordered range [{prev}, {hi}]"
            )));
        }
        prev = z;
    }
    let mut edges = Vec::with_capacity(changepoints.len() + 2);
    edges.push(lo);
    edges.extend_from_slice(changepoints);
    edges.push(hi);
    Ok(edges)
}

fn fit_from_products(products: &DesignProducts, data: &[WeightedDatum]) -> Result<HeightsFit> {
    let nb = products.n_blocks;
    let (l, log_det) = cholesky(&products.gram, nb)?;
    let heights = cholesky_solve(&l, nb, &products.proj);
    let fitted: f64 = products
        .proj
        .iter()
        .zip(heights.iter())
        .map(|(p, b)| p * b)
        .sum();
    let residual_h = products.y_sq - fitted;
    let log_q: f64 = -data.iter().map(|d| d.sigma.ln()).sum::<f64>()
        - 0.5 * data.len() as f64 * (2.0 * std::f64::consts::PI).ln();
    let log_marginal = log_q - 0.5 * residual_h - 0.5 * log_det
        + 0.5 * nb as f64 * (2.0 * std::f64::consts::PI).ln();
    Ok(HeightsFit {
        heights,
        log_marginal,
        residual_h,
    })
}

/// One evaluated changepoint configuration; infeasible fits (a block with
/// no support) carry `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchEntry {
    pub changepoints: Vec<f64>,
    pub log_marginal: f64,
}

/// Outcome of an exhaustive changepoint search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: BlockModel,
    pub table: Vec<SearchEntry>,
}

/// Midpoints between consecutive distinct data positions.
pub fn default_candidates(data: &[WeightedDatum]) -> Vec<f64> {
    let mut xs: Vec<f64> = data.iter().map(|d| d.x).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

fn binomial_capped(n: usize, k: usize, cap: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap {
            return acc;
        }
    }
    acc
}

/// Exhaustively place `n_blocks - 1` changepoints from the candidate set,
/// maximizing the heights-marginalized log likelihood. Ties go to the
/// lexicographically smallest changepoint vector. Candidates default to
/// the midpoints between consecutive data positions.
pub fn search_changepoints(
    data: &[WeightedDatum],
    n_blocks: usize,
    candidates: Option<&[f64]>,
) -> Result<SearchResult> {
    if n_blocks == 0 {
        return Err(Error::validation("n_blocks must be at least 1"));
    }
    if data.is_empty() {
        return Err(Error::validation("no data to fit"));
    }
    let cands: Vec<f64> = match candidates {
        Some(c) => {
            let mut c = c.to_vec();
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            c.dedup();
            c
        }
        None => default_candidates(data),
    };
    let k = n_blocks - 1;
    if cands.len() < k {
        return Err(Error::validation(format!(
            "{} candidate changepoints cannot place {k}",
            cands.len()
        )));
    }
    let count = binomial_capped(cands.len(), k, SEARCH_LIMIT as u128);
    if count > SEARCH_LIMIT as u128 {
        return Err(Error::SearchSpace {
            configurations: count,
            limit: SEARCH_LIMIT,
        });
    }

    let combos = combinations(&cands, k);
    let fits: Vec<(Vec<f64>, Option<HeightsFit>)> = combos
        .par_iter()
        .map(|combo| {
            let fit = fit_heights(combo, data).ok();
            (combo.clone(), fit)
        })
        .collect();

    let mut table = Vec::with_capacity(fits.len());
    let mut best: Option<(usize, f64)> = None;
    for (idx, (combo, fit)) in fits.iter().enumerate() {
        let lm = fit
            .as_ref()
            .map(|f| f.log_marginal)
            .unwrap_or(f64::NEG_INFINITY);
        table.push(SearchEntry {
            changepoints: combo.clone(),
            log_marginal: lm,
        });
        let better = match best {
            None => lm > f64::NEG_INFINITY,
            Some((_, cur)) => lm > cur,
        };
        if better {
            best = Some((idx, lm));
        }
    }
    let (best_idx, _) = best.ok_or_else(|| {
        Error::validation("no feasible changepoint configuration (every fit left a block empty)")
    })?;
    let (combo, fit) = &fits[best_idx];
    let fit = fit.as_ref().expect("best entry is feasible");
    let lo = data.iter().map(|d| d.x).fold(f64::INFINITY, f64::min);
    let hi = data.iter().map(|d| d.x).fold(f64::NEG_INFINITY, f64::max);
    let best_model = BlockModel::new(combo.clone(), fit.heights.clone(), (lo, hi))?;
    Ok(SearchResult {
        best: best_model,
        table,
    })
}

fn combinations(items: &[f64], k: usize) -> Vec<Vec<f64>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let n = items.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // advance the rightmost index that can still move
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if idx[pos] != pos + n - k {
                idx[pos] += 1;
                for later in (pos + 1)..k {
                    idx[later] = idx[later - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return out;
            }
        }
    }
}

/// Choose the block count by maximizing the log marginal plus a geometric
/// prior `n_blocks * ln(gamma_prior)`.
pub fn select_n_blocks(
    data: &[WeightedDatum],
    n_max: usize,
    gamma_prior: f64,
) -> Result<BlockModel> {
    if n_max == 0 {
        return Err(Error::validation("n_max must be at least 1"));
    }
    if !(0.0 < gamma_prior && gamma_prior < 1.0) {
        return Err(Error::validation(format!(
            "gamma_prior must lie in (0, 1), got {gamma_prior}"
        )));
    }
    let mut best: Option<(f64, BlockModel)> = None;
    for nb in 1..=n_max {
        let result = match search_changepoints(data, nb, None) {
            Ok(r) => r,
            // a block count that cannot be placed feasibly is skipped
            Err(Error::Validation(_)) if nb > 1 => continue,
            Err(e) => return Err(e),
        };
        let lm = result
            .table
            .iter()
            .map(|e| e.log_marginal)
            .fold(f64::NEG_INFINITY, f64::max);
        let score = lm + nb as f64 * gamma_prior.ln();
        let better = match &best {
            None => true,
            Some((cur, _)) => score > *cur,
        };
        if better {
            best = Some((score, result.best));
        }
    }
    best.map(|(_, model)| model)
        .ok_or_else(|| Error::validation("no feasible block count"))
}
