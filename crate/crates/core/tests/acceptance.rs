//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::Instant;

use corpverify::diagnostics::{self, find_hedging_example, murphy_curve, roc_curve};
use corpverify::inference::{bootstrap_mean, dm_test, elementary_difference_series, BootstrapConfig};
use corpverify::scoring::{mixture_score, MixingMeasure};
use corpverify::synthetic::{self, SyntheticConfig, SyntheticSystems};
use corpverify::{corp_decompose, pav_fit, recalibrate, FirmSpec, PairSet, ScoringRule};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn synthetic_summary(systems: &SyntheticSystems, config: &SyntheticConfig) -> Outcome {
    let start = Instant::now();
    let r = synthetic::evaluate(config, systems).map_err(|e| e.to_string())?;
    let s = |name: &str| r.system(name).unwrap();
    let (ideal, under, over, jitter) = (s("Ideal"), s("Under"), s("Over"), s("Jitter"));
    let mut problems = Vec::new();
    for sys in [ideal, under, over] {
        if !within(sys.max_csi, 0.214, 0.005) {
            problems.push(format!("{} max CSI {:.4}", sys.name, sys.max_csi));
        }
        if !within(sys.auc_pr, 0.275, 0.005) {
            problems.push(format!("{} AUCPR {:.4}", sys.name, sys.auc_pr));
        }
        if sys.max_csi != ideal.max_csi || sys.auc_pr != ideal.auc_pr {
            problems.push(format!("{} differs from Ideal", sys.name));
        }
    }
    for (sys, target) in [(ideal, 0.100), (under, 0.106), (over, 0.125), (jitter, 0.108)] {
        if !within(sys.mean_brier, target, 0.002) {
            problems.push(format!("{} Brier {:.4}", sys.name, sys.mean_brier));
        }
    }
    if !within(jitter.max_csi, 0.178, 0.005) {
        problems.push(format!("Jitter max CSI {:.4}", jitter.max_csi));
    }
    if !within(jitter.auc_pr, 0.224, 0.005) {
        problems.push(format!("Jitter AUCPR {:.4}", jitter.auc_pr));
    }
    let detail = format!(
        "max CSI {:.4}/{:.4}, AUCPR {:.4}/{:.4}, Brier {:.4}/{:.4}/{:.4}/{:.4} (evaluation {:.1}s) {}",
        ideal.max_csi,
        jitter.max_csi,
        ideal.auc_pr,
        jitter.auc_pr,
        ideal.mean_brier,
        under.mean_brier,
        over.mean_brier,
        jitter.mean_brier,
        start.elapsed().as_secs_f64(),
        problems.join("; ")
    );
    check(problems.is_empty(), detail)
}

fn analytic_brier(systems: &SyntheticSystems, config: &SyntheticConfig) -> Outcome {
    // p = lo + w·B with B ~ Beta(a, b)
    let (a, b) = config.beta_shape;
    let (lo, hi) = config.support;
    let w = hi - lo;
    let m1 = a / (a + b);
    let m2 = a * (a + 1.0) / ((a + b) * (a + b + 1.0));
    let ep = lo + w * m1;
    let ep2 = lo * lo + 2.0 * lo * w * m1 + w * w * m2;
    assert!(2.0 * hi <= 1.0, "Over is 2p only when the support stays below 1/2");
    // x = c·p gives E(x − Y)² = c² E p² − 2c E p² + E p
    let brier = |c: f64| c * c * ep2 - 2.0 * c * ep2 + ep;
    let expected = [("Ideal", brier(1.0)), ("Under", brier(0.5)), ("Over", brier(2.0))];
    let y = &systems.outcomes;
    let mut parts = Vec::new();
    let mut ok = true;
    for ((name, target), x) in expected.iter().zip([&systems.ideal, &systems.under, &systems.over]) {
        let s: Vec<f64> = x
            .iter()
            .zip(y)
            .map(|(&x, &y)| (x - if y { 1.0 } else { 0.0 }).powi(2))
            .collect();
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let z = (mean - target) / (var / n).sqrt();
        ok &= z.abs() <= 3.0;
        parts.push(format!("{name} {mean:.5} vs {target:.5} (z={z:+.2})"));
    }
    check(ok, parts.join(", "))
}

fn random_firm(rng: &mut impl Rng) -> ScoringRule {
    let k = rng.random_range(1..=4);
    let mut t: Vec<f64> = (0..k).map(|_| rng.random_range(1..100) as f64 / 100.0).collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    let w = t.iter().map(|_| rng.random_range(0.1..3.0)).collect();
    ScoringRule::Firm(FirmSpec::new(t, w).unwrap())
}

fn corp_identity() -> Outcome {
    let mut rng = common::rng(31);
    let mut worst: f64 = 0.0;
    let mut min_component = f64::INFINITY;
    for _ in 0..200 {
        let n = rng.random_range(1..=500);
        let levels = rng.random_range(2..=200);
        let pairs = common::random_pairs(&mut rng, n, levels);
        let rule = match rng.random_range(0..3) {
            0 => ScoringRule::Brier,
            1 => random_firm(&mut rng),
            _ => ScoringRule::elementary(rng.random_range(1..100) as f64 / 100.0).unwrap(),
        };
        let d = corp_decompose(&pairs, &rule).map_err(|e| e.to_string())?;
        worst = worst.max((d.mean_score - (d.mcb - d.dsc + d.unc)).abs());
        min_component = min_component.min(d.mcb).min(d.dsc);
    }
    check(
        worst <= 1e-12 && min_component >= -1e-12,
        format!("max |S − (MCB − DSC + UNC)| = {worst:.1e}, min(MCB, DSC) = {min_component:.1e}"),
    )
}

fn murphy_integral() -> Outcome {
    let mut rng = common::rng(41);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=400);
        let pairs = if rng.random_bool(0.5) {
            let levels = rng.random_range(2..=50);
            common::random_pairs(&mut rng, n, levels)
        } else {
            let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let y = x.iter().map(|&p| rng.random::<f64>() < p).collect();
            PairSet::new(x, y).unwrap()
        };
        let curve = murphy_curve(&pairs, None).map_err(|e| e.to_string())?;
        worst = worst.max((curve.integral() - common::naive_brier(pairs.forecasts(), pairs.outcomes())).abs());
    }
    check(worst <= 1e-10, format!("max |∫ Murphy − Brier| = {worst:.1e}"))
}

fn mixtures() -> Outcome {
    let mut rng = common::rng(51);
    let mut worst: [f64; 2] = [0.0; 2];
    for _ in 0..1000 {
        let x: f64 = rng.random_range(0.001..0.999);
        let y: bool = rng.random();
        let o = if y { 1.0 } else { 0.0 };
        let brier = (x - o) * (x - o);
        let log = if y { -x.ln() } else { -(1.0 - x).ln() };
        let u = mixture_score(x, y, MixingMeasure::Uniform).map_err(|e| e.to_string())?;
        let l = mixture_score(x, y, MixingMeasure::LogMeasure).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max((u - brier).abs());
        worst[1] = worst[1].max((l - log).abs());
    }
    check(
        worst[0] <= 1e-12 && worst[1] <= 1e-12,
        format!("uniform {:.1e}, log {:.1e}", worst[0], worst[1]),
    )
}

fn pav_oracle() -> Outcome {
    let mut rng = common::rng(61);
    let mut worst: f64 = 0.0;
    for pattern in 0u32..256 {
        let mut x: Vec<f64> = Vec::new();
        while x.len() < 8 {
            let v: f64 = rng.random();
            if !x.contains(&v) {
                x.push(v);
            }
        }
        let y: Vec<bool> = (0..8).map(|k| pattern & (1 << k) != 0).collect();
        let pairs = PairSet::new(x.clone(), y.clone()).unwrap();
        let fit = pav_fit(&pairs).map_err(|e| e.to_string())?;
        for (xi, o) in x.iter().zip(common::isotonic_oracle(&x, &y)) {
            worst = worst.max((fit.apply(*xi) - o).abs());
        }
    }
    check(worst <= 1e-10, format!("256 patterns, max deviation {worst:.1e}"))
}

fn dominance_equivalences() -> Outcome {
    let mut rng = common::rng(71);
    let (mut dominated, mut counterexamples, mut trials) = (0, 0, 0);
    while trials < 500 {
        let n = rng.random_range(2..=50);
        let levels = rng.random_range(4..=40);
        let a = common::random_pairs(&mut rng, n, levels);
        if a.n_events() == 0 || a.n_events() == n {
            continue;
        }
        trials += 1;
        let b = match rng.random_range(0..3) {
            // coarsening: information contained in A
            0 => {
                let k = rng.random_range(1..=4) as f64;
                a.map_forecasts(|x| (x * k).floor() / k).unwrap()
            }
            1 => {
                let noise: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
                let x = a
                    .forecasts()
                    .iter()
                    .zip(&noise)
                    .map(|(x, e)| (x + e).clamp(0.0, 1.0))
                    .collect();
                a.with_forecasts(x).unwrap()
            }
            _ => a.with_forecasts((0..n).map(|_| rng.random()).collect()).unwrap(),
        };
        let (ra, rb) = (recalibrate(&a).unwrap(), recalibrate(&b).unwrap());
        let (ma, mb) = (murphy_curve(&ra, None).unwrap(), murphy_curve(&rb, None).unwrap());
        let rules: Vec<ScoringRule> = std::iter::once(ScoringRule::Brier)
            .chain((0..5).map(|_| random_firm(&mut rng)))
            .collect();
        for (better, worse, mbetter, mworse) in [(&ra, &rb, &ma, &mb), (&rb, &ra, &mb, &ma)] {
            if !mbetter.dominates(mworse, 1e-12) {
                continue;
            }
            dominated += 1;
            let roc_ok = roc_curve(better, true)
                .unwrap()
                .dominates(&roc_curve(worse, true).unwrap(), 1e-9);
            let dsc_ok = rules.iter().all(|rule| {
                let db = corp_decompose(better, rule).unwrap().dsc;
                let dw = corp_decompose(worse, rule).unwrap().dsc;
                db >= dw - 1e-9
            });
            if !(roc_ok && dsc_ok) {
                counterexamples += 1;
            }
        }
    }
    check(
        counterexamples == 0 && dominated > 0,
        format!("{trials} system pairs, {dominated} Murphy dominances checked, {counterexamples} counterexamples"),
    )
}

fn monotone_invariance(systems: &SyntheticSystems) -> Outcome {
    let n = 100_000;
    let y = systems.outcomes[..n].to_vec();
    let ideal = PairSet::new(systems.ideal[..n].to_vec(), y).unwrap();
    assert!(ideal.forecasts().iter().all(|&x| x <= 0.5));
    let half = ideal.map_forecasts(|x| x / 2.0).unwrap();
    let double = ideal.map_forecasts(|x| (2.0 * x).min(1.0)).unwrap();
    let summary = |p: &PairSet| -> corpverify::Result<(f64, f64, f64)> {
        Ok((
            diagnostics::max_csi(p)?.unwrap().0,
            diagnostics::auc_pr(p)?,
            roc_curve(p, false)?.auc,
        ))
    };
    let base = summary(&ideal).map_err(|e| e.to_string())?;
    let same_summary = summary(&half).unwrap() == base && summary(&double).unwrap() == base;

    let grid: Vec<f64> = (1..=50).map(|k| k as f64 / 100.0).collect();
    let curve = |p: &PairSet, f: &dyn Fn(f64) -> f64| {
        let t: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        diagnostics::performance_curve(p, &t)
            .unwrap()
            .points
            .into_iter()
            .map(|pt| pt.counts)
            .collect::<Vec<_>>()
    };
    let reference = curve(&ideal, &|t| t);
    let same_curves = curve(&half, &|t| t / 2.0) == reference && curve(&double, &|t| (2.0 * t).min(1.0)) == reference;
    check(
        same_summary && same_curves,
        format!(
            "max CSI {:.4}, AUCPR {:.4}, AUC {:.4} unchanged: {same_summary}; performance curves coincide: {same_curves}",
            base.0, base.1, base.2
        ),
    )
}

fn hedging() -> Outcome {
    let Some(demo) = find_hedging_example() else {
        return Err("no example found".into());
    };
    let h = demo.history;
    let csi = |h: u64, m: u64, f: u64| {
        if h + m + f == 0 {
            0.0
        } else {
            h as f64 / (h + m + f) as f64
        }
    };
    let current = csi(h.hits, h.misses, h.false_alarms);
    let (p, theta) = (demo.p, demo.theta);
    let forecast_event =
        p * csi(h.hits + 1, h.misses, h.false_alarms) + (1.0 - p) * csi(h.hits, h.misses, h.false_alarms + 1);
    let honest = p * csi(h.hits, h.misses + 1, h.false_alarms) + (1.0 - p) * current;
    let ok = theta > p && p >= current / (current + 1.0) && forecast_event > honest;
    check(
        ok,
        format!(
            "history h={} m={} f={}, θ={theta}, p={p}: E[CSI | event] = {forecast_event:.4} > E[CSI | honest] = {honest:.4}",
            h.hits, h.misses, h.false_alarms
        ),
    )
}

fn brier_ranking() -> Outcome {
    let holds: usize = (1..=100u64)
        .into_par_iter()
        .map(|seed| {
            let cfg = SyntheticConfig::new(100_000, seed);
            let s = synthetic::generate(&cfg).unwrap();
            let b = |x: &[f64]| common::naive_brier(x, &s.outcomes);
            let (i, u, j, o) = (b(&s.ideal), b(&s.under), b(&s.jitter), b(&s.over));
            usize::from(i < u && u < j && j < o)
        })
        .sum();
    check(
        holds >= 95,
        format!("Ideal < Under < Jitter < Over in {holds}/100 repetitions"),
    )
}

fn inference_sanity(systems: &SyntheticSystems) -> Outcome {
    let n = 10_000;
    // 100 time steps of 100 cells each
    let pairs = PairSet::new(systems.ideal[..n].to_vec(), systems.outcomes[..n].to_vec())
        .and_then(|p| {
            p.with_indices(
                Some((0..n).map(|i| i / 100).collect()),
                Some((0..n).map(|i| i % 100).collect()),
            )
        })
        .unwrap();
    let diff = elementary_difference_series(&pairs, &pairs, 0.2).map_err(|e| e.to_string())?;
    let dm = dm_test(&diff, 1, 0.95).map_err(|e| e.to_string())?;
    let dm_ok = dm.statistic == 0.0 && dm.ci == (0.0, 0.0);

    let field = vec![0.3; 12 * 5 * 4];
    let ci = bootstrap_mean(&field, &[12, 5, 4], &BootstrapConfig::new(200, 7)).map_err(|e| e.to_string())?;
    let boot_ok = ci.lo == ci.hi && ci.hi == ci.point;

    let (phi, len, trials) = (0.5, 500, 2000u64);
    let covered: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = common::rng(1_000 + t);
            let mut e: f64 = rng.sample::<f64, _>(StandardNormal) / (1.0f64 - phi * phi).sqrt();
            let series: Vec<f64> = (0..len)
                .map(|_| {
                    e = phi * e + rng.sample::<f64, _>(StandardNormal);
                    e
                })
                .collect();
            let r = dm_test(&series, 1, 0.95).unwrap();
            usize::from(r.ci.0 <= 0.0 && 0.0 <= r.ci.1)
        })
        .sum();
    let coverage = covered as f64 / trials as f64;
    let cov_ok = (0.92..=0.98).contains(&coverage);
    check(
        dm_ok && boot_ok && cov_ok,
        format!(
            "DM on identical systems: statistic {}; constant-field CI [{}, {}]; AR(1) φ={phi} coverage {:.1}%",
            dm.statistic,
            ci.lo,
            ci.hi,
            100.0 * coverage
        ),
    )
}

fn golden_cli() -> Outcome {
    let failures: Vec<String> = common::golden::CASES
        .iter()
        .filter_map(|(case, args)| common::golden::check_case(case, args).err())
        .collect();
    check(
        failures.is_empty(),
        format!(
            "{} CLI cases on the bundled gridded dataset {}",
            common::golden::CASES.len(),
            failures.join("; ")
        ),
    )
}

fn main() {
    let config = SyntheticConfig::new(1_000_000, 1);
    let start = Instant::now();
    let systems = synthetic::generate(&config).expect("synthetic generation");
    let generation = start.elapsed().as_secs_f64();

    let criteria: Vec<Criterion> = vec![
        (
            "1 synthetic summary at n = 10^6, seed 1",
            Box::new(|| synthetic_summary(&systems, &config)),
        ),
        (
            "2 analytic Brier within 3 SE",
            Box::new(|| analytic_brier(&systems, &config)),
        ),
        ("3 CORP identity and nonnegativity", Box::new(corp_identity)),
        ("4 Murphy integral equals Brier", Box::new(murphy_integral)),
        ("5 mixture closed forms", Box::new(mixtures)),
        ("6 PAV against exhaustive oracle", Box::new(pav_oracle)),
        ("7 dominance equivalences", Box::new(dominance_equivalences)),
        (
            "8 monotone-transform invariance",
            Box::new(|| monotone_invariance(&systems)),
        ),
        ("9 CSI hedging example", Box::new(hedging)),
        ("10 Brier ranking over 100 repetitions", Box::new(brier_ranking)),
        ("11 inference sanity", Box::new(|| inference_sanity(&systems))),
        ("12 golden CLI regression", Box::new(golden_cli)),
    ];
    println!("synthetic generation at n = 10^6: {generation:.1}s");
    let mut failed = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
