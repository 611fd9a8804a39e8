//! CORP decomposition of a mean score into miscalibration (MCB),
//! discrimination (DSC) and uncertainty (UNC):
//!
//! ```text
//! S̄ = MCB − DSC + UNC,  MCB = S̄ − S̄_c,  DSC = S̄_r − S̄_c,  UNC = S̄_r
//! ```
//!
//! where `S̄_c` scores the isotonically recalibrated forecasts and `S̄_r` the
//! best constant forecast (the base rate).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{self, base_rate, DatasetManifest, GridField, LoadedDataset, PairSet};
use crate::error::{Error, Result};
use crate::inference::{self, BootstrapConfig, CiResult};
use crate::recalibration::fitted_values;
use crate::scoring::{mean_score_with, sum_scores, InfinitePolicy, ScoringRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub rule: ScoringRule,
    pub mean_score: f64,
    pub mcb: f64,
    pub dsc: f64,
    pub unc: f64,
    pub s_calibrated: f64,
    pub s_reference: f64,
    pub best_constant: f64,
}

/// Constant forecast minimizing the mean score. The base rate minimizes
/// every rule in scope; for elementary and FIRM rules it is one of several
/// minimizers.
pub fn best_constant(pairs: &PairSet, rule: &ScoringRule) -> Result<f64> {
    rule.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyData("no pairs".into()));
    }
    Ok(base_rate(pairs))
}

pub fn corp_decompose(pairs: &PairSet, rule: &ScoringRule) -> Result<Decomposition> {
    decompose_slices(pairs.forecasts(), pairs.outcomes(), rule)
}

pub(crate) fn decompose_slices(forecasts: &[f64], outcomes: &[bool], rule: &ScoringRule) -> Result<Decomposition> {
    rule.validate()?;
    let n = forecasts.len();
    if n == 0 {
        return Err(Error::EmptyData("no pairs to decompose".into()));
    }
    let nf = n as f64;
    let mean_score = sum_scores(forecasts, outcomes, rule) / nf;
    let fitted = fitted_values(forecasts, outcomes);
    let s_calibrated = sum_scores(&fitted, outcomes, rule) / nf;
    let events = outcomes.iter().filter(|&&y| y).count() as f64;
    let r = events / nf;
    // skip empty outcome classes so 0 · ∞ never arises under the log rule
    let mut s_reference = 0.0;
    if events > 0.0 {
        s_reference += events * rule.score_unchecked(r, true);
    }
    if events < nf {
        s_reference += (nf - events) * rule.score_unchecked(r, false);
    }
    s_reference /= nf;
    Ok(Decomposition {
        rule: rule.clone(),
        mean_score,
        mcb: mean_score - s_calibrated,
        dsc: s_reference - s_calibrated,
        unc: s_reference,
        s_calibrated,
        s_reference,
        best_constant: r,
    })
}

/// Mean score of an external reference forecast over the positions of
/// `pairs` (which must carry time and cell indices).
pub fn reference_score(pairs: &PairSet, reference: &GridField, rule: &ScoringRule) -> Result<f64> {
    let (Some(times), Some(cells)) = (pairs.time_index(), pairs.cell_index()) else {
        return Err(Error::Alignment("pairs carry no grid positions".into()));
    };
    let [nt, ny, nx] = reference.shape();
    let slice = ny * nx;
    let mut values = Vec::with_capacity(pairs.len());
    for (&t, &c) in times.iter().zip(cells) {
        if t >= nt || c >= slice {
            return Err(Error::Alignment(format!(
                "pair position (time {t}, cell {c}) outside reference grid {:?}",
                reference.shape()
            )));
        }
        let v = reference
            .get(t * slice + c)
            .ok_or_else(|| Error::Alignment(format!("reference missing at time {t}, cell {c}")))?;
        values.push(v);
    }
    let reference_pairs = pairs.with_forecasts(values)?;
    mean_score_with(&reference_pairs, rule, InfinitePolicy::Propagate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub system: String,
    pub lead_day: u32,
    pub mcb: f64,
    pub dsc: f64,
    pub unc: f64,
    pub mean_score: f64,
    pub ci_mcb: Option<(f64, f64)>,
    pub ci_dsc: Option<(f64, f64)>,
}

/// One miscalibration–discrimination point per system and lead day.
pub fn diagram_points(
    manifest: &DatasetManifest,
    rule: &ScoringRule,
    bootstrap: Option<&BootstrapConfig>,
) -> Result<Vec<DiagramPoint>> {
    let data = dataset::load_manifest(manifest, Default::default())?;
    diagram_points_for(&data, rule, bootstrap)
}

pub fn diagram_points_for(
    data: &LoadedDataset,
    rule: &ScoringRule,
    bootstrap: Option<&BootstrapConfig>,
) -> Result<Vec<DiagramPoint>> {
    data.combinations()
        .into_par_iter()
        .map(|(system, lead)| {
            let forecast = &data.system(&system)?.by_lead[&lead];
            let observation = &data.observation_by_lead[&lead];
            let pairs = dataset::flatten_pairs(forecast, observation)?;
            let d = corp_decompose(&pairs, rule)?;
            let (ci_mcb, ci_dsc) = match bootstrap {
                Some(cfg) => {
                    let [mcb, dsc] = bootstrap_mcb_dsc(forecast, observation, rule, cfg)?;
                    (Some((mcb.lo, mcb.hi)), Some((dsc.lo, dsc.hi)))
                }
                None => (None, None),
            };
            Ok(DiagramPoint {
                system,
                lead_day: lead,
                mcb: d.mcb,
                dsc: d.dsc,
                unc: d.unc,
                mean_score: d.mean_score,
                ci_mcb,
                ci_dsc,
            })
        })
        .collect()
}

/// Circular block bootstrap of MCB and DSC over the `(time, y, x)` grid,
/// refitting the recalibration inside every resample.
pub fn bootstrap_mcb_dsc(
    forecast: &GridField,
    observation: &GridField,
    rule: &ScoringRule,
    config: &BootstrapConfig,
) -> Result<[CiResult; 2]> {
    if forecast.shape() != observation.shape() {
        return Err(Error::Alignment("forecast and observation grids differ".into()));
    }
    let stat = |index: &[usize]| -> Result<Vec<f64>> {
        let mut xs = Vec::with_capacity(index.len());
        let mut ys = Vec::with_capacity(index.len());
        for &i in index {
            if let (Some(x), Some(y)) = (forecast.get(i), observation.get(i)) {
                xs.push(x);
                ys.push(y == 1.0);
            }
        }
        let d = decompose_slices(&xs, &ys, rule)?;
        Ok(vec![d.mcb, d.dsc])
    };
    let cis = inference::bootstrap_many(&forecast.shape(), &stat, config)?;
    let mut it = cis.into_iter();
    Ok([it.next().expect("mcb"), it.next().expect("dsc")])
}
