//! Synthetic four-system experiment.
//!
//! True event probabilities `p_i` are drawn from a Beta distribution
//! rescaled to a support interval (default Beta(1, 3) on `[0, 0.5]`). Four
//! systems forecast them: Ideal issues `p_i`, Under `p_i / 2`, Over `2 p_i`
//! and Jitter `p_i + r_i` clipped to `[0, 1]` with Gaussian noise `r_i`.
//! Outcomes are Bernoulli(`p_i`). Probabilities, outcomes and noise come
//! from separate ChaCha streams of one seed, so all systems share the same
//! `(p_i, y_i)` realization.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::dataset::{base_rate, PairSet};
use crate::decomposition::{corp_decompose, Decomposition};
use crate::diagnostics::{auc_pr, roc_curve, ThresholdSweep};
use crate::error::{Error, Result};
use crate::scoring::{mean_score, ScoringRule};

const STREAM_PROBABILITIES: u64 = 0;
const STREAM_OUTCOMES: u64 = 1;
const STREAM_JITTER: u64 = 2;

pub const SYSTEM_NAMES: [&str; 4] = ["Ideal", "Under", "Over", "Jitter"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_trials: usize,
    pub seed: u64,
    pub beta_shape: (f64, f64),
    pub support: (f64, f64),
    pub jitter_sd: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_trials: 100_000,
            seed: 1,
            beta_shape: (1.0, 3.0),
            support: (0.0, 0.5),
            jitter_sd: 0.1,
        }
    }
}

impl SyntheticConfig {
    pub fn new(n_trials: usize, seed: u64) -> Self {
        SyntheticConfig {
            n_trials,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be positive".into()));
        }
        let (a, b) = self.beta_shape;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Config(format!("beta shape ({a}, {b}) must be positive")));
        }
        let (lo, hi) = self.support;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::Config(format!(
                "support ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1"
            )));
        }
        if !(self.jitter_sd >= 0.0 && self.jitter_sd.is_finite()) {
            return Err(Error::Config(format!(
                "jitter sd {} must be nonnegative",
                self.jitter_sd
            )));
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniform draw strictly inside `(0, 1)`.
fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Quantile function of Beta(a, b) on `[0, 1]`. Closed forms are used when
/// either shape parameter is 1.
pub fn beta_quantile(u: f64, a: f64, b: f64) -> f64 {
    if a == 1.0 {
        1.0 - (1.0 - u).powf(1.0 / b)
    } else if b == 1.0 {
        u.powf(1.0 / a)
    } else {
        Beta::new(a, b).expect("validated shape").inverse_cdf(u)
    }
}

/// Standard normal quantile: Acklam's rational approximation refined by one
/// Halley step, accurate to about 1e−15 in the body.
pub fn normal_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let p_low = 0.02425;
    let x = if u < p_low {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - p_low {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement
    let e = 0.5 * erfc(-x / std::f64::consts::SQRT_2) - u;
    let step = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - step / (1.0 + x * step / 2.0)
}

/// True event probabilities, one per trial.
pub fn sample_probabilities(config: &SyntheticConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let (a, b) = config.beta_shape;
    let (lo, hi) = config.support;
    let mut rng = stream(config.seed, STREAM_PROBABILITIES);
    Ok((0..config.n_trials)
        .map(|_| lo + (hi - lo) * beta_quantile(rng.random::<f64>(), a, b))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSystems {
    pub probabilities: Vec<f64>,
    pub outcomes: Vec<bool>,
    pub ideal: Vec<f64>,
    pub under: Vec<f64>,
    pub over: Vec<f64>,
    pub jitter: Vec<f64>,
}

impl SyntheticSystems {
    /// `(name, pairs)` for the four systems in fixed order.
    pub fn pair_sets(&self) -> Result<Vec<(&'static str, PairSet)>> {
        [&self.ideal, &self.under, &self.over, &self.jitter]
            .into_iter()
            .zip(SYSTEM_NAMES)
            .map(|(f, name)| Ok((name, PairSet::new(f.clone(), self.outcomes.clone())?)))
            .collect()
    }
}

/// Forecasts of the four systems and the simulated outcomes.
pub fn make_systems(probabilities: &[f64], config: &SyntheticConfig) -> Result<SyntheticSystems> {
    config.validate()?;
    if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Validation(format!("probability {p} outside [0, 1]")));
    }
    let mut outcome_rng = stream(config.seed, STREAM_OUTCOMES);
    let mut noise_rng = stream(config.seed, STREAM_JITTER);
    let outcomes = probabilities.iter().map(|&p| outcome_rng.random::<f64>() < p).collect();
    let jitter = probabilities
        .iter()
        .map(|&p| (p + config.jitter_sd * normal_quantile(open_unit(&mut noise_rng))).clamp(0.0, 1.0))
        .collect();
    Ok(SyntheticSystems {
        probabilities: probabilities.to_vec(),
        outcomes,
        ideal: probabilities.to_vec(),
        under: probabilities.iter().map(|p| p / 2.0).collect(),
        over: probabilities.iter().map(|p| (2.0 * p).min(1.0)).collect(),
        jitter,
    })
}

pub fn generate(config: &SyntheticConfig) -> Result<SyntheticSystems> {
    make_systems(&sample_probabilities(config)?, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemResult {
    pub name: String,
    pub max_csi: f64,
    pub max_csi_threshold: f64,
    pub auc_pr: f64,
    pub mean_brier: f64,
    pub auc_roc: f64,
    pub decomposition: Decomposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: SyntheticConfig,
    pub base_rate: f64,
    pub systems: Vec<SystemResult>,
}

impl ExperimentResult {
    pub fn system(&self, name: &str) -> Option<&SystemResult> {
        self.systems.iter().find(|s| s.name == name)
    }
}

pub fn evaluate_system(name: &str, pairs: &PairSet) -> Result<SystemResult> {
    let (max_csi, max_csi_threshold) = ThresholdSweep::new(pairs)?
        .max_csi()
        .ok_or_else(|| Error::Undefined(format!("CSI undefined for `{name}`")))?;
    Ok(SystemResult {
        name: name.to_string(),
        max_csi,
        max_csi_threshold,
        auc_pr: auc_pr(pairs)?,
        mean_brier: mean_score(pairs, &ScoringRule::Brier)?,
        auc_roc: roc_curve(pairs, false)?.auc,
        decomposition: corp_decompose(pairs, &ScoringRule::Brier)?,
    })
}

/// Generates one realization and evaluates every system on it.
pub fn run_experiment(config: &SyntheticConfig) -> Result<ExperimentResult> {
    let systems = generate(config)?;
    evaluate(config, &systems)
}

pub fn evaluate(config: &SyntheticConfig, systems: &SyntheticSystems) -> Result<ExperimentResult> {
    let sets = systems.pair_sets()?;
    let results = sets
        .par_iter()
        .map(|(name, pairs)| evaluate_system(name, pairs))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        config: config.clone(),
        base_rate: base_rate(&sets[0].1),
        systems: results,
    })
}
