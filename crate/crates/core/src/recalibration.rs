//! Isotonic recalibration of forecasts with the pool-adjacent-violators
//! algorithm.
//!
//! Pairs are sorted by forecast value (ties broken by original position),
//! identical forecasts are pooled into a single unit, and adjacent units are
//! merged while their event frequencies fail to increase strictly. The
//! resulting step function maps each forecast value to the empirical event
//! frequency of its block.

use serde::{Deserialize, Serialize};

use crate::dataset::PairSet;
use crate::error::{Error, Result};

/// One pooled block of the fit: all forecasts in `[forecast_lo, forecast_hi]`
/// are mapped to `fitted`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub forecast_lo: f64,
    pub forecast_hi: f64,
    pub fitted: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicFit {
    pub blocks: Vec<Block>,
    pub source_n: usize,
}

impl IsotonicFit {
    /// Value of the step function at `x`: the block containing `x`, else the
    /// nearest block below it, else the first block.
    pub fn apply(&self, x: f64) -> f64 {
        let idx = self.blocks.partition_point(|b| b.forecast_lo <= x);
        self.blocks[idx.saturating_sub(1)].fitted
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.blocks).expect("blocks serialize")
    }

    pub fn from_json(text: &str, source_n: Option<usize>) -> Result<Self> {
        let blocks: Vec<Block> = serde_json::from_str(text).map_err(|e| Error::Format(format!("isotonic fit: {e}")))?;
        let n = blocks.iter().map(|b| b.count).sum();
        Ok(IsotonicFit {
            blocks,
            source_n: source_n.unwrap_or(n),
        })
    }
}

struct Pooled {
    lo: f64,
    hi: f64,
    events: f64,
    count: f64,
    /// first position in sorted order
    start: usize,
}

/// Fit plus, for every sorted position, the block it falls into.
struct PavOutput {
    order: Vec<usize>,
    blocks: Vec<Pooled>,
}

fn pav(forecasts: &[f64], outcomes: &[bool]) -> PavOutput {
    let n = forecasts.len();
    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so ties keep their original order
    order.sort_by(|&a, &b| forecasts[a].total_cmp(&forecasts[b]));

    let mut stack: Vec<Pooled> = Vec::new();
    let mut pos = 0;
    while pos < n {
        let x = forecasts[order[pos]];
        let start = pos;
        let mut events = 0.0;
        while pos < n && forecasts[order[pos]] == x {
            if outcomes[order[pos]] {
                events += 1.0;
            }
            pos += 1;
        }
        stack.push(Pooled {
            lo: x,
            hi: x,
            events,
            count: (pos - start) as f64,
            start,
        });
        // merge while the previous block's frequency is not strictly lower;
        // counts are integers, so cross-multiplication is exact
        while stack.len() >= 2 {
            let last = &stack[stack.len() - 1];
            let prev = &stack[stack.len() - 2];
            if prev.events * last.count >= last.events * prev.count {
                let last = stack.pop().expect("len >= 2");
                let prev = stack.last_mut().expect("len >= 1");
                prev.hi = last.hi;
                prev.events += last.events;
                prev.count += last.count;
            } else {
                break;
            }
        }
    }
    PavOutput { order, blocks: stack }
}

/// Isotonic (nondecreasing) least-squares fit of outcomes on forecasts.
pub fn pav_fit(pairs: &PairSet) -> Result<IsotonicFit> {
    if pairs.is_empty() {
        return Err(Error::EmptyData("cannot fit an empty pair set".into()));
    }
    let out = pav(pairs.forecasts(), pairs.outcomes());
    Ok(IsotonicFit {
        blocks: out
            .blocks
            .iter()
            .map(|b| Block {
                forecast_lo: b.lo,
                forecast_hi: b.hi,
                fitted: b.events / b.count,
                count: b.count as usize,
            })
            .collect(),
        source_n: pairs.len(),
    })
}

pub fn apply_fit(fit: &IsotonicFit, x: f64) -> f64 {
    fit.apply(x)
}

/// In-sample fitted value for every pair, in the original pair order.
pub(crate) fn fitted_values(forecasts: &[f64], outcomes: &[bool]) -> Vec<f64> {
    let out = pav(forecasts, outcomes);
    let mut fitted = vec![0.0; forecasts.len()];
    for (k, b) in out.blocks.iter().enumerate() {
        let end = out.blocks.get(k + 1).map_or(forecasts.len(), |n| n.start);
        let v = b.events / b.count;
        for &i in &out.order[b.start..end] {
            fitted[i] = v;
        }
    }
    fitted
}

/// Replaces every forecast by its in-sample isotonic fitted value.
pub fn recalibrate(pairs: &PairSet) -> Result<PairSet> {
    if pairs.is_empty() {
        return Err(Error::EmptyData("cannot recalibrate an empty pair set".into()));
    }
    pairs.with_forecasts(fitted_values(pairs.forecasts(), pairs.outcomes()))
}
