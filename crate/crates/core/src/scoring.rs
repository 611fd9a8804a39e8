//! Proper scoring rules for probability forecasts of binary events.
//!
//! Every rule here is a mixture of elementary scores
//!
//! ```text
//! S_θ(x, y) = 2θ        if y = 0 and x > θ
//!           = 2(1 − θ)  if y = 1 and x ≤ θ
//!           = 0         otherwise
//! ```
//!
//! over decision thresholds θ ∈ (0, 1): the Brier score mixes them
//! uniformly, the logarithmic score with density 1/(2θ(1 − θ)), and a FIRM
//! score places point masses on a finite set of thresholds.

use serde::{Deserialize, Serialize};

use crate::dataset::PairSet;
use crate::error::{Error, Result};

fn check_xy(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Validation(format!("forecast {x} outside [0, 1]")))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("threshold {theta} outside (0, 1)")))
    }
}

/// Squared error `(x − y)²`.
pub fn brier(x: f64, y: bool) -> Result<f64> {
    check_xy(x)?;
    Ok(brier_unchecked(x, y))
}

#[inline]
pub(crate) fn brier_unchecked(x: f64, y: bool) -> f64 {
    let d = x - if y { 1.0 } else { 0.0 };
    d * d
}

/// Natural-log penalty; `+∞` for a certain forecast that turns out wrong.
pub fn log_score(x: f64, y: bool) -> Result<f64> {
    check_xy(x)?;
    Ok(log_unchecked(x, y))
}

#[inline]
pub(crate) fn log_unchecked(x: f64, y: bool) -> f64 {
    if y {
        -x.ln()
    } else {
        -(1.0 - x).ln()
    }
}

/// Elementary score at decision threshold `theta`. A forecast equal to the
/// threshold counts as "no event".
pub fn elementary_score(theta: f64, x: f64, y: bool) -> Result<f64> {
    check_theta(theta)?;
    check_xy(x)?;
    Ok(elementary_unchecked(theta, x, y))
}

#[inline]
pub(crate) fn elementary_unchecked(theta: f64, x: f64, y: bool) -> f64 {
    match (y, x > theta) {
        (false, true) => 2.0 * theta,
        (true, false) => 2.0 * (1.0 - theta),
        _ => 0.0,
    }
}

/// Decision thresholds with positive weights defining a FIRM score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFirmSpec")]
pub struct FirmSpec {
    thresholds: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawFirmSpec {
    thresholds: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawFirmSpec> for FirmSpec {
    type Error = Error;

    fn try_from(raw: RawFirmSpec) -> Result<Self> {
        FirmSpec::new(raw.thresholds, raw.weights)
    }
}

impl FirmSpec {
    pub fn new(thresholds: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Validation("FIRM spec needs at least one threshold".into()));
        }
        if thresholds.len() != weights.len() {
            return Err(Error::Validation(format!(
                "{} thresholds but {} weights",
                thresholds.len(),
                weights.len()
            )));
        }
        for &t in &thresholds {
            check_theta(t)?;
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("FIRM thresholds must be strictly increasing".into()));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Validation(format!("FIRM weight {w} must be positive")));
        }
        Ok(FirmSpec { thresholds, weights })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of categories, one more than the number of thresholds.
    pub fn n_categories(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// Category of a probability: the number of thresholds strictly below
    /// it, so category `c` covers `(θ_c, θ_{c+1}]`.
    pub fn category(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&t| t < x)
    }

    fn score_unchecked(&self, x: f64, y: bool) -> f64 {
        self.thresholds
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * elementary_unchecked(t, x, y))
            .sum()
    }
}

/// Weighted sum of elementary scores at the spec's thresholds.
pub fn firm_score(spec: &FirmSpec, x: f64, y: bool) -> Result<f64> {
    check_xy(x)?;
    Ok(spec.score_unchecked(x, y))
}

/// Penalties of a categorical forecast product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringMatrix {
    pub categories: Vec<String>,
    /// `penalties[c] = [penalty if no event, penalty if event]`.
    pub penalties: Vec<[f64; 2]>,
}

impl ScoringMatrix {
    pub fn lookup(&self, category: usize, y: bool) -> f64 {
        self.penalties[category][usize::from(y)]
    }
}

/// Categorical scoring matrix equivalent to the FIRM score: a forecast in
/// category `c` scores `2 Σ_{i<=c} w_i θ_i` when no event occurs and
/// `2 Σ_{i>c} w_i (1 − θ_i)` when it does (1-based thresholds).
pub fn firm_matrix(spec: &FirmSpec) -> ScoringMatrix {
    let k = spec.thresholds.len();
    let mut penalties = Vec::with_capacity(k + 1);
    let mut categories = Vec::with_capacity(k + 1);
    for c in 0..=k {
        let non_event: f64 = (0..c).map(|i| 2.0 * spec.weights[i] * spec.thresholds[i]).sum();
        let event: f64 = (c..k).map(|i| 2.0 * spec.weights[i] * (1.0 - spec.thresholds[i])).sum();
        penalties.push([non_event, event]);
        let lo = if c == 0 { 0.0 } else { spec.thresholds[c - 1] };
        let hi = if c == k { 1.0 } else { spec.thresholds[c] };
        let open = if c == 0 { '[' } else { '(' };
        categories.push(format!("{open}{lo}, {hi}]"));
    }
    ScoringMatrix { categories, penalties }
}

/// A scoring rule as accepted on the command line and in JSON:
/// `{"rule":"brier"}`, `{"rule":"log"}`, `{"rule":"elementary","theta":0.3}`,
/// `{"rule":"firm","thresholds":[..],"weights":[..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum ScoringRule {
    Brier,
    Log,
    Elementary { theta: f64 },
    Firm(FirmSpec),
}

impl ScoringRule {
    pub fn elementary(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(ScoringRule::Elementary { theta })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScoringRule::Elementary { theta } => check_theta(*theta),
            _ => Ok(()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rule: ScoringRule =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid rule `{text}`: {e}")))?;
        rule.validate()?;
        Ok(rule)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rule serializes")
    }

    /// Short label used in CSV outputs.
    pub fn label(&self) -> String {
        match self {
            ScoringRule::Brier => "brier".into(),
            ScoringRule::Log => "log".into(),
            ScoringRule::Elementary { theta } => format!("elementary({theta})"),
            ScoringRule::Firm(spec) => format!("firm({};{})", join(&spec.thresholds), join(&spec.weights)),
        }
    }

    pub fn score(&self, x: f64, y: bool) -> Result<f64> {
        check_xy(x)?;
        self.validate()?;
        Ok(self.score_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn score_unchecked(&self, x: f64, y: bool) -> f64 {
        match self {
            ScoringRule::Brier => brier_unchecked(x, y),
            ScoringRule::Log => log_unchecked(x, y),
            ScoringRule::Elementary { theta } => elementary_unchecked(*theta, x, y),
            ScoringRule::Firm(spec) => spec.score_unchecked(x, y),
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Whether an infinite per-pair score may propagate into a mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InfinitePolicy {
    #[default]
    Reject,
    Propagate,
}

/// Arithmetic mean of per-pair scores. Infinite scores are rejected.
pub fn mean_score(pairs: &PairSet, rule: &ScoringRule) -> Result<f64> {
    mean_score_with(pairs, rule, InfinitePolicy::Reject)
}

pub fn mean_score_with(pairs: &PairSet, rule: &ScoringRule, policy: InfinitePolicy) -> Result<f64> {
    rule.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyData("no pairs to score".into()));
    }
    let total = sum_scores(pairs.forecasts(), pairs.outcomes(), rule);
    if total.is_infinite() && policy == InfinitePolicy::Reject {
        return Err(Error::Undefined(format!(
            "{} score is infinite for a certain forecast that missed",
            rule.label()
        )));
    }
    Ok(total / pairs.len() as f64)
}

pub(crate) fn sum_scores(forecasts: &[f64], outcomes: &[bool], rule: &ScoringRule) -> f64 {
    forecasts
        .iter()
        .zip(outcomes)
        .map(|(&x, &y)| rule.score_unchecked(x, y))
        .sum()
}

/// Mixing measure over decision thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingMeasure {
    /// `dH(θ) = dθ`
    Uniform,
    /// `dH(θ) = dθ / (2θ(1 − θ))`
    LogMeasure,
}

impl std::str::FromStr for MixingMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(MixingMeasure::Uniform),
            "log" | "log_measure" => Ok(MixingMeasure::LogMeasure),
            other => Err(Error::Config(format!("unsupported mixing measure `{other}`"))),
        }
    }
}

/// Closed form of `∫ S_θ(x, y) dH(θ)` over `(0, 1)`.
///
/// For `y = 0` only thresholds below `x` contribute (`∫_0^x 2θ dH`), for
/// `y = 1` only thresholds at or above `x` (`∫_x^1 2(1 − θ) dH`).
pub fn mixture_score(x: f64, y: bool, measure: MixingMeasure) -> Result<f64> {
    check_xy(x)?;
    Ok(match (measure, y) {
        (MixingMeasure::Uniform, false) => x * x,
        (MixingMeasure::Uniform, true) => (1.0 - x) * (1.0 - x),
        (MixingMeasure::LogMeasure, false) => -(-x).ln_1p(),
        (MixingMeasure::LogMeasure, true) => -x.ln(),
    })
}
