//! Uncertainty quantification: multi-dimensional circular block bootstrap
//! and a Diebold–Mariano test for score-difference series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::PairSet;
use crate::error::{Error, Result};
use crate::scoring::elementary_unchecked;

const MAX_RETRIES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockLengths {
    /// `⌈√len⌉` along every axis.
    #[default]
    Auto,
    Fixed(Vec<usize>),
}

impl std::str::FromStr for BlockLengths {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(BlockLengths::Auto);
        }
        let lens = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&b| b > 0)
                    .ok_or_else(|| Error::Config(format!("invalid block length `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockLengths::Fixed(lens))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub seed: u64,
    pub block_lengths: BlockLengths,
    /// Confidence level of the percentile interval.
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 1000,
            seed: 0,
            block_lengths: BlockLengths::Auto,
            level: 0.95,
        }
    }
}

impl BootstrapConfig {
    pub fn new(n_resamples: usize, seed: u64) -> Self {
        BootstrapConfig {
            n_resamples,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_resamples == 0 {
            return Err(Error::Config("n_resamples must be >= 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level {} outside (0, 1)", self.level)));
        }
        Ok(())
    }

    /// Block length per axis for a sample of the given shape.
    pub fn block_shape(&self, shape: &[usize]) -> Result<Vec<usize>> {
        match &self.block_lengths {
            BlockLengths::Auto => Ok(shape.iter().map(|&n| auto_block_length(n)).collect()),
            BlockLengths::Fixed(b) if b.len() == shape.len() => {
                Ok(b.iter().zip(shape).map(|(&b, &n)| b.min(n.max(1))).collect())
            }
            BlockLengths::Fixed(b) => Err(Error::Config(format!(
                "{} block lengths for a {}-dimensional sample",
                b.len(),
                shape.len()
            ))),
        }
    }
}

/// `⌈√n⌉`, computed exactly.
pub fn auto_block_length(n: usize) -> usize {
    let mut b = (n as f64).sqrt() as usize;
    while b * b < n {
        b += 1;
    }
    while b > 1 && (b - 1) * (b - 1) >= n {
        b -= 1;
    }
    b.max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub n_resamples: usize,
}

/// Draws resampled index maps over a row-major grid.
///
/// The output grid is tiled with blocks of the configured shape (the last
/// tile along an axis is trimmed to fit). Each tile copies a block of the
/// original grid whose corner is drawn uniformly, wrapping around every
/// axis.
#[derive(Debug, Clone)]
pub struct BlockResampler {
    shape: Vec<usize>,
    block: Vec<usize>,
}

impl BlockResampler {
    pub fn new(shape: &[usize], block: &[usize]) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::EmptyData(format!("cannot resample a grid of shape {shape:?}")));
        }
        if block.len() != shape.len() || block.contains(&0) {
            return Err(Error::Config(format!(
                "invalid block shape {block:?} for grid {shape:?}"
            )));
        }
        Ok(BlockResampler {
            shape: shape.to_vec(),
            block: block.iter().zip(shape).map(|(&b, &n)| b.min(n)).collect(),
        })
    }

    pub fn n_cells(&self) -> usize {
        self.shape.iter().product()
    }

    /// Source index for every output cell, row-major.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let dims = self.shape.len();
        let tiles: Vec<usize> = self
            .shape
            .iter()
            .zip(&self.block)
            .map(|(&n, &b)| n.div_ceil(b))
            .collect();
        let n_tiles: usize = tiles.iter().product();
        // tile corners in row-major tile order, one start per axis
        let starts: Vec<usize> = (0..n_tiles * dims)
            .map(|k| rng.random_range(0..self.shape[k % dims]))
            .collect();

        let mut strides = vec![1usize; dims];
        let mut tile_strides = vec![1usize; dims];
        for d in (0..dims.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.shape[d + 1];
            tile_strides[d] = tile_strides[d + 1] * tiles[d + 1];
        }

        let mut out = Vec::with_capacity(self.n_cells());
        let mut coord = vec![0usize; dims];
        for _ in 0..self.n_cells() {
            let tile: usize = (0..dims).map(|d| (coord[d] / self.block[d]) * tile_strides[d]).sum();
            let src: usize = (0..dims)
                .map(|d| {
                    let offset = coord[d] % self.block[d];
                    ((starts[tile * dims + d] + offset) % self.shape[d]) * strides[d]
                })
                .sum();
            out.push(src);
            for d in (0..dims).rev() {
                coord[d] += 1;
                if coord[d] < self.shape[d] {
                    break;
                }
                coord[d] = 0;
            }
        }
        out
    }
}

fn resample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Statistic values for every resample, in resample order. A resample on
/// which the statistic fails is redrawn from the same stream up to a fixed
/// number of times.
pub fn replicates<F>(shape: &[usize], statistic: &F, config: &BootstrapConfig) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    config.validate()?;
    let sampler = BlockResampler::new(shape, &config.block_shape(shape)?)?;
    (0..config.n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = resample_rng(config.seed, r);
            let mut last = None;
            for _ in 0..MAX_RETRIES {
                match statistic(&sampler.draw(&mut rng)) {
                    Ok(v) => return Ok(v),
                    Err(e) => last = Some(e),
                }
            }
            Err(Error::Bootstrap(format!(
                "statistic failed {MAX_RETRIES} times on resample {r}: {}",
                last.expect("at least one attempt")
            )))
        })
        .collect()
}

/// Percentile interval (linear interpolation between order statistics).
pub fn percentile_interval(values: &[f64], level: f64) -> (f64, f64) {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    (quantile_sorted(&v, alpha / 2.0), quantile_sorted(&v, 1.0 - alpha / 2.0))
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Bootstraps a vector-valued statistic, returning one interval per
/// component. The point estimate uses the identity index map.
pub fn bootstrap_many<F>(shape: &[usize], statistic: &F, config: &BootstrapConfig) -> Result<Vec<CiResult>>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    let n: usize = shape.iter().product();
    let identity: Vec<usize> = (0..n).collect();
    let point = statistic(&identity)?;
    let reps = replicates(shape, statistic, config)?;
    Ok((0..point.len())
        .map(|k| {
            let column: Vec<f64> = reps.iter().map(|r| r[k]).collect();
            let (lo, hi) = percentile_interval(&column, config.level);
            CiResult {
                point: point[k],
                lo,
                hi,
                level: config.level,
                n_resamples: config.n_resamples,
            }
        })
        .collect())
}

/// Circular block bootstrap of a scalar statistic of a gridded sample.
///
/// `statistic` receives, for each output cell, the index of the source cell
/// it copies.
pub fn circular_block_bootstrap<F>(shape: &[usize], statistic: F, config: &BootstrapConfig) -> Result<CiResult>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    let wrapped = |idx: &[usize]| statistic(idx).map(|v| vec![v]);
    Ok(bootstrap_many(shape, &wrapped, config)?.remove(0))
}

/// Bootstrap of the mean of a gridded array whose `NaN` cells are missing.
pub fn bootstrap_mean(values: &[f64], shape: &[usize], config: &BootstrapConfig) -> Result<CiResult> {
    if values.len() != shape.iter().product::<usize>() {
        return Err(Error::Alignment("values do not fill the given shape".into()));
    }
    circular_block_bootstrap(
        shape,
        |idx| {
            let (s, n) = idx
                .iter()
                .map(|&i| values[i])
                .filter(|v| !v.is_nan())
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                Err(Error::EmptyData("resample holds only missing cells".into()))
            } else {
                Ok(s / n as f64)
            }
        },
        config,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub mean_diff: f64,
    pub statistic: f64,
    pub variance: f64,
    pub lags_used: usize,
    pub ci: (f64, f64),
    pub level: f64,
}

/// `⌊n^{1/3}⌋`, computed exactly.
fn cube_root_floor(n: usize) -> usize {
    let mut k = (n as f64).cbrt() as usize;
    while (k + 1).pow(3) <= n {
        k += 1;
    }
    while k > 0 && k.pow(3) > n {
        k -= 1;
    }
    k
}

/// Diebold–Mariano test on a per-time series of score differences.
///
/// The long-run variance is `γ(0) + 2 Σ_{k=1}^{K} γ(k)` with empirical
/// autocovariances and `K = max(lead_day − 1, ⌊n^{1/3}⌋)` (capped at
/// `n − 1`). If that sum is negative the lag sum is cut at the last
/// nonnegative partial sum.
pub fn dm_test(diff: &[f64], lead_day: u32, level: f64) -> Result<DmResult> {
    let n = diff.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} differences; need at least 2")));
    }
    if let Some(v) = diff.iter().find(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("non-finite difference {v}")));
    }
    if lead_day == 0 {
        return Err(Error::Validation("lead_day must be >= 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level {level} outside (0, 1)")));
    }
    let nf = n as f64;
    let mean = diff.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = diff.iter().map(|d| d - mean).collect();
    let autocov = |k: usize| -> f64 {
        centered[k..]
            .iter()
            .zip(&centered[..n - k])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / nf
    };
    let max_lag = ((lead_day - 1) as usize).max(cube_root_floor(n)).min(n - 1);

    let mut partial = autocov(0);
    let mut variance = partial;
    let mut lags_used = 0;
    for k in 1..=max_lag {
        partial += 2.0 * autocov(k);
        if partial >= 0.0 {
            variance = partial;
            lags_used = k;
        }
    }
    let variance = variance.max(0.0);
    let se = (variance / nf).sqrt();
    let statistic = if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    };
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    Ok(DmResult {
        mean_diff: mean,
        statistic,
        variance,
        lags_used,
        ci: (mean - z * se, mean + z * se),
        level,
    })
}

/// One row of an elementary-score comparison between two systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub theta: f64,
    pub mean_diff: f64,
    pub statistic: f64,
    pub lo50: f64,
    pub hi50: f64,
    pub lo95: f64,
    pub hi95: f64,
}

/// Spatial mean of `S_θ(A) − S_θ(B)` per time step, in ascending time
/// order. Both pair sets must cover identical positions.
pub fn elementary_difference_series(a: &PairSet, b: &PairSet, theta: f64) -> Result<Vec<f64>> {
    crate::scoring::elementary_score(theta, 0.5, false)?;
    let (Some(ta), Some(tb)) = (a.time_index(), b.time_index()) else {
        return Err(Error::Alignment("pairs carry no time index".into()));
    };
    if a.len() != b.len() || ta != tb || a.cell_index() != b.cell_index() || a.outcomes() != b.outcomes() {
        return Err(Error::Alignment("pair sets cover different positions".into()));
    }
    let diffs: Vec<f64> = (0..a.len())
        .map(|i| {
            let y = a.outcomes()[i];
            elementary_unchecked(theta, a.forecasts()[i], y) - elementary_unchecked(theta, b.forecasts()[i], y)
        })
        .collect();
    Ok(time_means(ta, &diffs))
}

/// Mean of `values` per time step, in ascending time order; steps without
/// values are skipped.
pub fn time_means(times: &[usize], values: &[f64]) -> Vec<f64> {
    let n_times = times.iter().max().map_or(0, |&t| t + 1);
    let mut sums = vec![0.0; n_times];
    let mut counts = vec![0usize; n_times];
    for (&t, &v) in times.iter().zip(values) {
        sums[t] += v;
        counts[t] += 1;
    }
    sums.iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&s, &c)| s / c as f64)
        .collect()
}

/// Mean elementary-score difference with 50% and 95% Diebold–Mariano
/// intervals at every threshold.
pub fn compare_elementary(a: &PairSet, b: &PairSet, thetas: &[f64], lead_day: u32) -> Result<Vec<ComparisonRow>> {
    thetas
        .iter()
        .map(|&theta| {
            let series = elementary_difference_series(a, b, theta)?;
            let r50 = dm_test(&series, lead_day, 0.5)?;
            let r95 = dm_test(&series, lead_day, 0.95)?;
            Ok(ComparisonRow {
                theta,
                mean_diff: r95.mean_diff,
                statistic: r95.statistic,
                lo50: r50.ci.0,
                hi50: r50.ci.1,
                lo95: r95.ci.0,
                hi95: r95.ci.1,
            })
        })
        .collect()
}
