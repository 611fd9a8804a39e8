//! Independent brute-force oracles shared by the integration tests.

#![allow(dead_code)]

pub mod golden;

use corpverify::PairSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random pairs with forecasts on a `levels`-point grid (so ties occur)
/// and outcomes drawn from the forecast itself.
pub fn random_pairs(rng: &mut ChaCha8Rng, n: usize, levels: u32) -> PairSet {
    let x: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0..=levels) as f64 / levels as f64)
        .collect();
    let y: Vec<bool> = x.iter().map(|&p| rng.random::<f64>() < p.clamp(0.05, 0.95)).collect();
    PairSet::new(x, y).unwrap()
}

pub fn naive_brier(x: &[f64], y: &[bool]) -> f64 {
    let s: f64 = x
        .iter()
        .zip(y)
        .map(|(&x, &y)| (x - if y { 1.0 } else { 0.0 }).powi(2))
        .sum();
    s / x.len() as f64
}

/// Isotonic least-squares fit by exhaustive search over contiguous
/// partitions of the sorted forecasts. Tied forecasts may not be split.
/// Returns fitted values in the original pair order.
pub fn isotonic_oracle(x: &[f64], y: &[bool]) -> Vec<f64> {
    let n = x.len();
    assert!(n <= 16, "oracle is exponential in n");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let ys: Vec<f64> = order.iter().map(|&i| if y[i] { 1.0 } else { 0.0 }).collect();
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    // bit k set means a cut between sorted positions k and k + 1
    for cuts in 0u32..(1u32 << (n - 1)) {
        if (0..n - 1).any(|k| cuts & (1 << k) != 0 && xs[k] == xs[k + 1]) {
            continue;
        }
        let mut fitted = vec![0.0; n];
        let mut start = 0;
        let mut prev_mean = f64::NEG_INFINITY;
        let mut ok = true;
        for end in 1..=n {
            if end == n || cuts & (1 << (end - 1)) != 0 {
                let mean = ys[start..end].iter().sum::<f64>() / (end - start) as f64;
                if mean < prev_mean {
                    ok = false;
                    break;
                }
                fitted[start..end].fill(mean);
                prev_mean = mean;
                start = end;
            }
        }
        if !ok {
            continue;
        }
        let sse: f64 = fitted.iter().zip(&ys).map(|(f, y)| (f - y).powi(2)).sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b - 1e-15) {
            best = Some((sse, fitted));
        }
    }
    let fitted = best.expect("the single-block partition is always feasible").1;
    let mut out = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        out[i] = fitted[k];
    }
    out
}

/// Mann–Whitney estimate of the ROC area, ties counted one half.
pub fn rank_auc(x: &[f64], y: &[bool]) -> f64 {
    let (mut wins, mut pos, mut neg) = (0.0, 0.0, 0.0);
    for (i, &yi) in y.iter().enumerate() {
        if yi {
            pos += 1.0;
        } else {
            neg += 1.0;
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if !yj {
                wins += if x[i] > x[j] {
                    1.0
                } else if x[i] == x[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    wins / (pos * neg)
}

/// `(hits, misses, false_alarms)` with an event forecast iff `x ≥ θ`.
pub fn counts(x: &[f64], y: &[bool], theta: f64) -> (u64, u64, u64) {
    let (mut h, mut m, mut f) = (0, 0, 0);
    for (&x, &y) in x.iter().zip(y) {
        match (x >= theta, y) {
            (true, true) => h += 1,
            (false, true) => m += 1,
            (true, false) => f += 1,
            _ => {}
        }
    }
    (h, m, f)
}

fn distinct_descending(x: &[f64]) -> Vec<f64> {
    let mut t = x.to_vec();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    t
}

/// Largest CSI over every distinct forecast value.
pub fn max_csi_oracle(x: &[f64], y: &[bool]) -> Option<f64> {
    distinct_descending(x)
        .into_iter()
        .filter_map(|t| {
            let (h, m, f) = counts(x, y, t);
            (h + m + f > 0).then(|| h as f64 / (h + m + f) as f64)
        })
        .reduce(f64::max)
}

/// Average precision recomputed from scratch at every distinct threshold.
pub fn average_precision_oracle(x: &[f64], y: &[bool]) -> f64 {
    let events = y.iter().filter(|&&v| v).count() as f64;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for t in distinct_descending(x) {
        let (h, _, f) = counts(x, y, t);
        let recall = h as f64 / events;
        if recall > prev_recall {
            ap += (recall - prev_recall) * h as f64 / (h + f) as f64;
            prev_recall = recall;
        }
    }
    ap
}

/// Mean elementary score at `theta`, written out case by case.
pub fn mean_elementary(x: &[f64], y: &[bool], theta: f64) -> f64 {
    let mut s = 0.0;
    for (&x, &y) in x.iter().zip(y) {
        if !y && x > theta {
            s += 2.0 * theta;
        } else if y && x <= theta {
            s += 2.0 * (1.0 - theta);
        }
    }
    s / x.len() as f64
}

/// Mean FIRM score as a weighted sum of elementary scores.
pub fn mean_firm(x: &[f64], y: &[bool], thresholds: &[f64], weights: &[f64]) -> f64 {
    thresholds
        .iter()
        .zip(weights)
        .map(|(&t, &w)| w * mean_elementary(x, y, t))
        .sum()
}

/// Mean-score discrimination component with the isotonic oracle, for a
/// rule whose mean score is `mean`.
pub fn dsc_oracle(x: &[f64], y: &[bool], mean: impl Fn(&[f64], &[bool]) -> f64) -> f64 {
    let rate = y.iter().filter(|&&v| v).count() as f64 / y.len() as f64;
    let reference = mean(&vec![rate; x.len()], y);
    let calibrated = mean(&isotonic_oracle(x, y), y);
    reference - calibrated
}
