//! Threshold-sweep diagnostics: contingency statistics, performance and
//! precision–recall curves, ROC curves, Murphy curves and CORP reliability
//! curves.
//!
//! Two threshold conventions coexist. Contingency-style sweeps forecast an
//! event when `x ≥ θ`; elementary scores (and hence Murphy curves) treat
//! `x ≤ θ` as "no event".

use serde::{Deserialize, Serialize};

use crate::dataset::PairSet;
use crate::error::{Error, Result};
use crate::inference::{self, BootstrapConfig};
use crate::recalibration::{pav_fit, recalibrate, Block, IsotonicFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyCounts {
    pub hits: u64,
    pub misses: u64,
    pub false_alarms: u64,
    pub correct_negatives: u64,
}

impl ContingencyCounts {
    pub fn total(&self) -> u64 {
        self.hits + self.misses + self.false_alarms + self.correct_negatives
    }
}

/// Counts with an event forecast iff `x ≥ theta`.
pub fn contingency(pairs: &PairSet, theta: f64) -> Result<ContingencyCounts> {
    if pairs.is_empty() {
        return Err(Error::EmptyData("no pairs".into()));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Validation(format!("threshold {theta} outside (0, 1]")));
    }
    let mut c = ContingencyCounts::default();
    for (&x, &y) in pairs.forecasts().iter().zip(pairs.outcomes()) {
        match (x >= theta, y) {
            (true, true) => c.hits += 1,
            (false, true) => c.misses += 1,
            (true, false) => c.false_alarms += 1,
            (false, false) => c.correct_negatives += 1,
        }
    }
    Ok(c)
}

/// Categorical statistics; `None` where a denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoricalStats {
    pub pod: Option<f64>,
    pub sr: Option<f64>,
    pub csi: Option<f64>,
    pub fb: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn categorical_stats(c: &ContingencyCounts) -> CategoricalStats {
    let (h, m, f) = (c.hits, c.misses, c.false_alarms);
    CategoricalStats {
        pod: ratio(h, h + m),
        sr: ratio(h, h + f),
        csi: ratio(h, h + m + f),
        fb: ratio(h + f, h + m),
    }
}

/// Cumulative contingency counts at every distinct forecast value, from the
/// highest value down.
#[derive(Debug, Clone)]
pub struct ThresholdSweep {
    /// Distinct forecast values, descending.
    pub thresholds: Vec<f64>,
    /// Events with `x ≥ thresholds[k]`.
    pub hits: Vec<u64>,
    /// Non-events with `x ≥ thresholds[k]`.
    pub false_alarms: Vec<u64>,
    pub n_events: u64,
    pub n_non_events: u64,
}

impl ThresholdSweep {
    pub fn new(pairs: &PairSet) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyData("no pairs".into()));
        }
        let mut sorted: Vec<(f64, bool)> = pairs
            .forecasts()
            .iter()
            .copied()
            .zip(pairs.outcomes().iter().copied())
            .collect();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut thresholds = Vec::new();
        let mut hits = Vec::new();
        let mut false_alarms = Vec::new();
        let (mut h, mut f) = (0u64, 0u64);
        let mut i = 0;
        while i < sorted.len() {
            let x = sorted[i].0;
            while i < sorted.len() && sorted[i].0 == x {
                if sorted[i].1 {
                    h += 1;
                } else {
                    f += 1;
                }
                i += 1;
            }
            thresholds.push(x);
            hits.push(h);
            false_alarms.push(f);
        }
        Ok(ThresholdSweep {
            thresholds,
            hits,
            false_alarms,
            n_events: h,
            n_non_events: f,
        })
    }

    /// Counts for an arbitrary threshold (event iff `x ≥ theta`).
    pub fn counts_at(&self, theta: f64) -> ContingencyCounts {
        // number of distinct values ≥ theta
        let k = self.thresholds.partition_point(|&v| v >= theta);
        let (h, f) = if k == 0 {
            (0, 0)
        } else {
            (self.hits[k - 1], self.false_alarms[k - 1])
        };
        self.counts(h, f)
    }

    fn counts(&self, h: u64, f: u64) -> ContingencyCounts {
        ContingencyCounts {
            hits: h,
            misses: self.n_events - h,
            false_alarms: f,
            correct_negatives: self.n_non_events - f,
        }
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.n_events == 0 || self.n_non_events == 0 {
            return Err(Error::Undefined("needs at least one event and one non-event".into()));
        }
        Ok(())
    }

    /// Largest CSI over all distinct forecast values and the highest
    /// threshold attaining it.
    pub fn max_csi(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (k, &t) in self.thresholds.iter().enumerate() {
            if let Some(csi) = categorical_stats(&self.counts(self.hits[k], self.false_alarms[k])).csi {
                if best.is_none_or(|(b, _)| csi > b) {
                    best = Some((csi, t));
                }
            }
        }
        best
    }

    /// Average precision: `Σ_k precision_k · (recall_k − recall_{k−1})`
    /// over distinct thresholds in descending order.
    pub fn average_precision(&self) -> Result<f64> {
        self.require_both_classes()?;
        let p = self.n_events as f64;
        let mut ap = 0.0;
        let mut prev_hits = 0u64;
        for k in 0..self.thresholds.len() {
            let h = self.hits[k];
            if h > prev_hits {
                let precision = h as f64 / (h + self.false_alarms[k]) as f64;
                ap += precision * (h - prev_hits) as f64 / p;
                prev_hits = h;
            }
        }
        Ok(ap)
    }
}

/// Largest CSI over every distinct forecast value, with its threshold.
pub fn max_csi(pairs: &PairSet) -> Result<Option<(f64, f64)>> {
    Ok(ThresholdSweep::new(pairs)?.max_csi())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformancePoint {
    pub threshold: f64,
    pub counts: ContingencyCounts,
    pub stats: CategoricalStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    /// `(recall, precision)`; recall is POD and precision is SR.
    pub points: Vec<(f64, f64)>,
    pub auc_pr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCurve {
    pub points: Vec<PerformancePoint>,
    /// Thresholds where POD or SR is undefined; absent from `pr.points`.
    pub skipped: Vec<f64>,
    /// Largest CSI over the grid and its threshold.
    pub max_csi: Option<(f64, f64)>,
    pub pr: PrCurve,
}

/// Categorical statistics on a threshold grid.
pub fn performance_curve(pairs: &PairSet, thresholds: &[f64]) -> Result<PerformanceCurve> {
    if thresholds.is_empty() {
        return Err(Error::Validation("empty threshold grid".into()));
    }
    if let Some(t) = thresholds.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::Validation(format!("threshold {t} outside (0, 1]")));
    }
    let sweep = ThresholdSweep::new(pairs)?;
    let mut points = Vec::with_capacity(thresholds.len());
    let mut skipped = Vec::new();
    let mut pr_points = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for &t in thresholds {
        let counts = sweep.counts_at(t);
        let stats = categorical_stats(&counts);
        match (stats.pod, stats.sr) {
            (Some(pod), Some(sr)) => pr_points.push((pod, sr)),
            _ => skipped.push(t),
        }
        if let Some(csi) = stats.csi {
            if best.is_none_or(|(b, _)| csi > b) {
                best = Some((csi, t));
            }
        }
        points.push(PerformancePoint {
            threshold: t,
            counts,
            stats,
        });
    }
    Ok(PerformanceCurve {
        points,
        skipped,
        max_csi: best,
        pr: PrCurve {
            points: pr_points,
            auc_pr: sweep.average_precision().ok(),
        },
    })
}

/// Precision–recall curve over every distinct forecast value.
pub fn pr_curve(pairs: &PairSet) -> Result<PrCurve> {
    let sweep = ThresholdSweep::new(pairs)?;
    let auc = sweep.average_precision()?;
    let p = sweep.n_events as f64;
    let points = (0..sweep.thresholds.len())
        .filter(|&k| sweep.hits[k] + sweep.false_alarms[k] > 0)
        .map(|k| {
            let h = sweep.hits[k] as f64;
            (h / p, h / (sweep.hits[k] + sweep.false_alarms[k]) as f64)
        })
        .collect();
    Ok(PrCurve {
        points,
        auc_pr: Some(auc),
    })
}

/// Area under the precision–recall curve (average-precision estimator).
pub fn auc_pr(pairs: &PairSet) -> Result<f64> {
    ThresholdSweep::new(pairs)?.average_precision()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false_alarm_rate, hit_rate)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub concave: bool,
}

impl RocCurve {
    /// Highest hit rate of the curve at false-alarm rate `far`, by linear
    /// interpolation between points.
    pub fn hit_rate_at(&self, far: f64) -> f64 {
        let k = self.points.partition_point(|p| p.0 <= far);
        if k == 0 {
            return self.points[0].1;
        }
        let (x1, y1) = self.points[k - 1];
        if k == self.points.len() || x1 == far {
            return y1;
        }
        let (x2, y2) = self.points[k];
        y1 + (y2 - y1) * (far - x1) / (x2 - x1)
    }

    /// `true` when this curve lies on or above `other` everywhere.
    pub fn dominates(&self, other: &RocCurve, tol: f64) -> bool {
        self.points
            .iter()
            .chain(&other.points)
            .all(|&(x, _)| self.hit_rate_at(x) + tol >= other.hit_rate_at(x))
    }
}

/// ROC curve sweeping every distinct forecast value (event iff `x ≥ θ`);
/// with `concave`, forecasts are first replaced by their isotonic fit.
pub fn roc_curve(pairs: &PairSet, concave: bool) -> Result<RocCurve> {
    let sweep = if concave {
        ThresholdSweep::new(&recalibrate(pairs)?)?
    } else {
        ThresholdSweep::new(pairs)?
    };
    sweep.require_both_classes()?;
    let p = sweep.n_events as f64;
    let n = sweep.n_non_events as f64;
    let mut points = Vec::with_capacity(sweep.thresholds.len() + 1);
    points.push((0.0, 0.0));
    let mut twice_area = 0u128;
    let (mut ph, mut pf) = (0u64, 0u64);
    for k in 0..sweep.thresholds.len() {
        let (h, f) = (sweep.hits[k], sweep.false_alarms[k]);
        points.push((f as f64 / n, h as f64 / p));
        // trapezoid in integer units of 1/(2PN)
        twice_area += (f - pf) as u128 * (h + ph) as u128;
        ph = h;
        pf = f;
    }
    Ok(RocCurve {
        points,
        auc: twice_area as f64 / (2.0 * p * n),
        concave,
    })
}

/// Mean elementary score as an exact function of the decision threshold.
///
/// On each segment `[lo, hi)` the mean score is `intercept + slope · θ`;
/// segment boundaries are the distinct forecast values in `(0, 1)` plus any
/// requested grid points. The curve jumps at forecast values and is
/// right-continuous there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MurphyCurve {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub segments: Vec<MurphySegment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MurphySegment {
    pub lo: f64,
    pub hi: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl MurphySegment {
    pub fn eval(&self, theta: f64) -> f64 {
        self.intercept + self.slope * theta
    }

    pub fn integral(&self) -> f64 {
        self.intercept * (self.hi - self.lo) + 0.5 * self.slope * (self.hi * self.hi - self.lo * self.lo)
    }
}

impl MurphyCurve {
    fn segment_index(&self, theta: f64) -> usize {
        self.segments.partition_point(|s| s.lo <= theta).saturating_sub(1)
    }

    /// Mean elementary score at `theta ∈ (0, 1)`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.segments[self.segment_index(theta)].eval(theta)
    }

    /// Limit from the left at `theta`.
    pub fn eval_left(&self, theta: f64) -> f64 {
        let k = self.segments.partition_point(|s| s.lo < theta).saturating_sub(1);
        self.segments[k].eval(theta)
    }

    /// Exact integral over `(0, 1)`; equals the mean Brier score.
    pub fn integral(&self) -> f64 {
        self.segments.iter().map(MurphySegment::integral).sum()
    }

    /// `true` when this curve lies on or below `other` for every threshold.
    pub fn dominates(&self, other: &MurphyCurve, tol: f64) -> bool {
        let mut cuts: Vec<f64> = self
            .segments
            .iter()
            .chain(&other.segments)
            .flat_map(|s| [s.lo, s.hi])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2).all(|w| {
            let (lo, hi) = (w[0], w[1]);
            let a = &self.segments[self.segment_index(lo)];
            let b = &other.segments[other.segment_index(lo)];
            a.eval(lo) <= b.eval(lo) + tol && a.eval(hi) <= b.eval(hi) + tol
        })
    }
}

/// Exact Murphy curve; `grid` points inside `(0, 1)` become extra knots.
pub fn murphy_curve(pairs: &PairSet, grid: Option<&[f64]>) -> Result<MurphyCurve> {
    if pairs.is_empty() {
        return Err(Error::EmptyData("no pairs".into()));
    }
    let mut events: Vec<f64> = Vec::new();
    let mut non_events: Vec<f64> = Vec::new();
    for (&x, &y) in pairs.forecasts().iter().zip(pairs.outcomes()) {
        if y {
            events.push(x);
        } else {
            non_events.push(x);
        }
    }
    events.sort_by(f64::total_cmp);
    non_events.sort_by(f64::total_cmp);

    let mut knots: Vec<f64> = pairs
        .forecasts()
        .iter()
        .chain(grid.unwrap_or(&[]))
        .copied()
        .filter(|&t| t > 0.0 && t < 1.0)
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let n = pairs.len() as f64;
    let mut bounds = Vec::with_capacity(knots.len() + 2);
    bounds.push(0.0);
    bounds.extend(&knots);
    bounds.push(1.0);
    let segments: Vec<MurphySegment> = bounds
        .windows(2)
        .map(|w| {
            let lo = w[0];
            // non-events with x > θ and events with x ≤ θ, for θ ∈ [lo, hi)
            let a = (non_events.len() - non_events.partition_point(|&x| x <= lo)) as f64;
            let b = events.partition_point(|&x| x <= lo) as f64;
            MurphySegment {
                lo,
                hi: w[1],
                intercept: 2.0 * b / n,
                slope: 2.0 * (a - b) / n,
            }
        })
        .collect();
    let values = segments[1..].iter().map(|s| s.eval(s.lo)).collect();
    Ok(MurphyCurve {
        knots,
        values,
        segments,
    })
}

/// Per-time-step spatial mean of `S_θ(A) − S_θ(B)`.
pub fn murphy_difference(a: &PairSet, b: &PairSet, theta: f64) -> Result<Vec<f64>> {
    inference::elementary_difference_series(a, b, theta)
}

/// Bins of width 0.1, right-open except the last, which includes 1.
pub fn histogram_bin(x: f64) -> usize {
    ((x * 10.0).floor() as usize).min(9)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub forecast: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityCurve {
    pub points: Vec<Block>,
    pub histogram: [u64; 10],
    /// Bootstrap band at the block endpoints of the fit.
    pub band: Option<Vec<BandPoint>>,
}

/// CORP reliability curve with forecast histogram and optional bootstrap
/// band. The bootstrap treats the pairs as a series in their given order.
pub fn reliability_curve(pairs: &PairSet, bootstrap: Option<&BootstrapConfig>) -> Result<ReliabilityCurve> {
    let fit = pav_fit(pairs)?;
    let mut histogram = [0u64; 10];
    for &x in pairs.forecasts() {
        histogram[histogram_bin(x)] += 1;
    }
    let band = match bootstrap {
        Some(cfg) => Some(reliability_band(pairs, &fit, cfg)?),
        None => None,
    };
    Ok(ReliabilityCurve {
        points: fit.blocks,
        histogram,
        band,
    })
}

fn reliability_band(pairs: &PairSet, fit: &IsotonicFit, cfg: &BootstrapConfig) -> Result<Vec<BandPoint>> {
    let mut at: Vec<f64> = fit.blocks.iter().flat_map(|b| [b.forecast_lo, b.forecast_hi]).collect();
    at.dedup();
    let stat = |idx: &[usize]| -> Result<Vec<f64>> {
        let refit = pav_fit(&pairs.select(idx)?)?;
        Ok(at.iter().map(|&x| refit.apply(x)).collect())
    };
    let cis = inference::bootstrap_many(&[pairs.len()], &stat, cfg)?;
    Ok(at
        .iter()
        .zip(cis)
        .map(|(&forecast, ci)| BandPoint {
            forecast,
            lo: ci.lo,
            hi: ci.hi,
        })
        .collect())
}

/// Probability above which forecasting an event maximizes the expected CSI
/// of the next case.
pub fn csi_hedging_bound(csi_current: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&csi_current) {
        return Err(Error::Validation(format!("CSI {csi_current} outside [0, 1]")));
    }
    Ok(csi_current / (csi_current + 1.0))
}

/// Expected CSI after one more case, forecasting an event or not, when the
/// event has probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HedgingDemo {
    pub history: ContingencyCounts,
    pub theta: f64,
    pub p: f64,
    pub csi_current: f64,
    pub bound: f64,
    pub expected_csi_event: f64,
    pub expected_csi_honest: f64,
}

impl HedgingDemo {
    /// The honest forecast `p < θ` is not an event forecast, yet forecasting
    /// an event yields the higher expected CSI.
    pub fn hedging_pays(&self) -> bool {
        self.theta > self.p && self.p >= self.bound && self.expected_csi_event > self.expected_csi_honest
    }
}

fn csi_of(h: u64, m: u64, f: u64) -> f64 {
    if h + m + f == 0 {
        0.0
    } else {
        h as f64 / (h + m + f) as f64
    }
}

/// Enumerates both outcomes of the next case for each of the two choices.
pub fn csi_expectations(history: ContingencyCounts, theta: f64, p: f64) -> Result<HedgingDemo> {
    if !(0.0..=1.0).contains(&p) || !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Validation("p must lie in [0, 1] and θ in (0, 1]".into()));
    }
    let ContingencyCounts {
        hits: h,
        misses: m,
        false_alarms: f,
        ..
    } = history;
    let csi_current = csi_of(h, m, f);
    let event = p * csi_of(h + 1, m, f) + (1.0 - p) * csi_of(h, m, f + 1);
    let honest = if p >= theta {
        event
    } else {
        p * csi_of(h, m + 1, f) + (1.0 - p) * csi_of(h, m, f)
    };
    Ok(HedgingDemo {
        history,
        theta,
        p,
        csi_current,
        bound: csi_hedging_bound(csi_current)?,
        expected_csi_event: event,
        expected_csi_honest: honest,
    })
}

/// Searches small histories and a percent grid of `(θ, p)` for a case
/// where hedging beats the honest forecast.
pub fn find_hedging_example() -> Option<HedgingDemo> {
    for total in 1..=6u64 {
        for h in 1..=total {
            for m in 0..=(total - h) {
                let f = total - h - m;
                let history = ContingencyCounts {
                    hits: h,
                    misses: m,
                    false_alarms: f,
                    correct_negatives: 0,
                };
                for tp in 1..100u32 {
                    for pp in 0..tp {
                        let demo = csi_expectations(history, tp as f64 / 100.0, pp as f64 / 100.0).ok()?;
                        if demo.hedging_pays() {
                            return Some(demo);
                        }
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(x: &[f64], y: &[f64]) -> PairSet {
        PairSet::from_numeric(x.to_vec(), y).unwrap()
    }

    #[test]
    fn contingency_boundary_inclusive() {
        assert_eq!(contingency(&pairs(&[0.4], &[1.0]), 0.4).unwrap().hits, 1);
        assert_eq!(contingency(&pairs(&[0.39], &[1.0]), 0.4).unwrap().misses, 1);
        let c = contingency(&pairs(&[0.2, 0.6, 0.8], &[0.0, 0.0, 1.0]), 0.5).unwrap();
        assert_eq!((c.hits, c.false_alarms, c.misses, c.correct_negatives), (1, 1, 0, 1));
        assert!(contingency(&pairs(&[0.2], &[0.0]), 0.0).is_err());
    }

    #[test]
    fn categorical_formulas() {
        let s = categorical_stats(&ContingencyCounts {
            hits: 1,
            misses: 1,
            false_alarms: 0,
            correct_negatives: 0,
        });
        assert_eq!((s.pod, s.sr, s.csi, s.fb), (Some(0.5), Some(1.0), Some(0.5), Some(0.5)));
        let s = categorical_stats(&ContingencyCounts {
            hits: 0,
            misses: 0,
            false_alarms: 3,
            correct_negatives: 1,
        });
        assert_eq!(s.pod, None);
        assert_eq!(s.fb, None);
    }

    #[test]
    fn single_pair_performance() {
        let c = performance_curve(&pairs(&[0.5], &[1.0]), &[0.4]).unwrap();
        let s = c.points[0].stats;
        assert_eq!((s.pod, s.sr, s.csi), (Some(1.0), Some(1.0), Some(1.0)));
        assert_eq!(c.max_csi, Some((1.0, 0.4)));
    }

    #[test]
    fn performance_skips_undefined() {
        let c = performance_curve(&pairs(&[0.2, 0.3], &[1.0, 0.0]), &[0.1, 0.9]).unwrap();
        assert_eq!(c.skipped, vec![0.9]);
        assert_eq!(c.pr.points.len(), 1);
    }

    #[test]
    fn sweep_matches_direct_counts() {
        let p = pairs(&[0.1, 0.4, 0.4, 0.7, 0.9, 0.2], &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let sweep = ThresholdSweep::new(&p).unwrap();
        for t in [0.05, 0.1, 0.15, 0.4, 0.5, 0.9, 1.0] {
            assert_eq!(sweep.counts_at(t), contingency(&p, t).unwrap(), "θ={t}");
        }
    }

    #[test]
    fn perfect_separation() {
        let p = pairs(&[0.9, 0.9, 0.1, 0.1, 0.1], &[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(auc_pr(&p).unwrap(), 1.0);
        let roc = roc_curve(&p, false).unwrap();
        assert!(roc.points.contains(&(0.0, 1.0)));
        assert_eq!(roc.auc, 1.0);
    }

    #[test]
    fn uninformative_forecasts() {
        let p = pairs(&[0.3; 4], &[1.0, 0.0, 0.0, 1.0]);
        let roc = roc_curve(&p, false).unwrap();
        assert_eq!(roc.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(roc.auc, 0.5);
        assert!(matches!(
            roc_curve(&pairs(&[0.3], &[1.0]), false),
            Err(Error::Undefined(_))
        ));
        assert!(matches!(auc_pr(&pairs(&[0.3], &[0.0])), Err(Error::Undefined(_))));
    }

    #[test]
    fn concave_roc_not_below_raw() {
        let p = pairs(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6], &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let raw = roc_curve(&p, false).unwrap();
        let cav = roc_curve(&p, true).unwrap();
        assert!(cav.auc >= raw.auc);
        assert!(cav.dominates(&raw, 1e-12));
    }

    #[test]
    fn murphy_single_pair() {
        let c = murphy_curve(&pairs(&[0.5], &[0.0]), None).unwrap();
        assert_eq!(c.knots, vec![0.5]);
        assert!((c.eval(0.3) - 0.6).abs() < 1e-15);
        assert_eq!(c.eval(0.5), 0.0);
        assert_eq!(c.eval(0.7), 0.0);
        assert!((c.eval_left(0.5) - 1.0).abs() < 1e-15);
        assert!((c.integral() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn murphy_perfect_is_zero() {
        let c = murphy_curve(&pairs(&[0.0, 1.0, 1.0], &[0.0, 1.0, 1.0]), Some(&[0.25, 0.5])).unwrap();
        assert_eq!(c.knots, vec![0.25, 0.5]);
        assert!(c.values.iter().all(|&v| v == 0.0));
        assert_eq!(c.integral(), 0.0);
    }

    #[test]
    fn murphy_matches_elementary_mean() {
        let p = pairs(&[0.1, 0.4, 0.4, 0.7, 0.9, 0.2], &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let c = murphy_curve(&p, None).unwrap();
        for k in 1..100 {
            let t = k as f64 / 100.0;
            let direct = crate::scoring::mean_score(&p, &crate::scoring::ScoringRule::Elementary { theta: t }).unwrap();
            assert!((c.eval(t) - direct).abs() < 1e-12, "θ={t}");
        }
    }

    #[test]
    fn reliability_examples() {
        let p = pairs(&[0.95; 5], &[1.0; 5]);
        let r = reliability_curve(&p, None).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.points[0].fitted, 1.0);
        assert_eq!(r.histogram[9], 5);
        let p = pairs(&[0.25, 0.25, 0.25, 0.25, 0.5, 0.5], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let r = reliability_curve(&p, None).unwrap();
        assert_eq!(
            r.points.iter().map(|b| (b.forecast_lo, b.fitted)).collect::<Vec<_>>(),
            vec![(0.25, 0.25), (0.5, 0.5)]
        );
        assert_eq!(r.histogram.iter().sum::<u64>(), 6);
        assert_eq!(r.histogram[2], 4);
        assert_eq!(r.histogram[5], 2);
    }

    #[test]
    fn reliability_band_brackets() {
        let x: Vec<f64> = (0..200).map(|i| (i % 10) as f64 / 10.0 + 0.05).collect();
        let y: Vec<f64> = (0..200)
            .map(|i| if (i * 7) % 10 < (i % 10) { 1.0 } else { 0.0 })
            .collect();
        let p = pairs(&x, &y);
        let r = reliability_curve(&p, Some(&BootstrapConfig::new(100, 3))).unwrap();
        for b in r.band.unwrap() {
            assert!(b.lo <= b.hi);
        }
    }

    #[test]
    fn histogram_edges() {
        assert_eq!(histogram_bin(0.0), 0);
        assert_eq!(histogram_bin(0.1), 1);
        assert_eq!(histogram_bin(0.999), 9);
        assert_eq!(histogram_bin(1.0), 9);
    }

    #[test]
    fn hedging_bounds() {
        assert_eq!(csi_hedging_bound(0.0).unwrap(), 0.0);
        assert_eq!(csi_hedging_bound(1.0).unwrap(), 0.5);
        assert!(csi_hedging_bound(1.5).is_err());
    }

    #[test]
    fn hedging_example_by_hand() {
        let history = ContingencyCounts {
            hits: 1,
            misses: 1,
            false_alarms: 0,
            correct_negatives: 0,
        };
        let d = csi_expectations(history, 0.4, 0.35).unwrap();
        assert_eq!(d.csi_current, 0.5);
        // event: 0.35·2/3 + 0.65·1/3; honest: 0.35·1/3 + 0.65·1/2
        assert!((d.expected_csi_event - (0.35 * 2.0 / 3.0 + 0.65 / 3.0)).abs() < 1e-15);
        assert!((d.expected_csi_honest - (0.35 / 3.0 + 0.65 / 2.0)).abs() < 1e-15);
        assert!(d.hedging_pays());
    }
}
