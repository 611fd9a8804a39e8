//! Command line front end.
//!
//! Every subcommand writes fixed-name files into `--out` plus a `run.json`
//! provenance record. Exit codes: 0 success, 1 usage or validation error,
//! 2 data error.

pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::dataset::{self, AlignStrictness, DatasetManifest, LoadedDataset, PairSet};
use crate::decomposition::{self, reference_score};
use crate::diagnostics::{self, ThresholdSweep};
use crate::error::{Error, Result};
use crate::inference::{self, BlockLengths, BootstrapConfig};
use crate::scoring::{self, FirmSpec, ScoringRule};
use crate::synthetic::{self, SyntheticConfig};

use svg::{emit_svg, PlotKind, Series};

#[derive(Debug, Parser)]
#[command(
    name = "corpverify",
    version,
    about = "Verification of probability forecasts for binary events"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean score per system and lead day
    Score(ScoreArgs),
    /// CORP decomposition (MCB, DSC, UNC) per system and lead day
    Decompose(DecomposeArgs),
    /// Murphy curves, or per-time elementary score differences with --diff
    Murphy(MurphyArgs),
    /// CORP reliability curves with forecast histograms
    Reliability(ReliabilityArgs),
    /// ROC curves and AUC
    Roc(RocArgs),
    /// Precision-recall curves and average precision
    Pr(PrArgs),
    /// POD, SR, CSI and frequency bias on a threshold grid
    Performance(PerformanceArgs),
    /// FIRM scores for categorical decision thresholds
    Firm(FirmArgs),
    /// Elementary score differences between two systems with Diebold-Mariano intervals
    Compare(CompareArgs),
    /// Synthetic Ideal/Under/Over/Jitter experiment
    Synthetic(SyntheticArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG renderings
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset manifest (JSON)
    #[arg(long)]
    pub manifest: PathBuf,
    /// Missing-data alignment scope
    #[arg(long, value_enum, default_value = "joint")]
    pub strictness: Strictness,
    /// Round forecast probabilities to whole percent on ingest
    #[arg(long)]
    pub round_percent: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Strictness {
    Joint,
    PerLeadDay,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    /// Number of bootstrap resamples (0 disables the bootstrap)
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Block lengths: `auto` or comma-separated per-axis lengths
    #[arg(long, default_value = "auto")]
    pub block: String,
}

impl BootstrapArgs {
    fn config(&self) -> Result<Option<BootstrapConfig>> {
        if self.bootstrap == 0 {
            return Ok(None);
        }
        Ok(Some(BootstrapConfig {
            n_resamples: self.bootstrap,
            seed: self.seed,
            block_lengths: self.block.parse::<BlockLengths>()?,
            level: 0.95,
        }))
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Scoring rule as JSON, e.g. '{"rule":"brier"}'
    #[arg(long, default_value = r#"{"rule":"brier"}"#)]
    pub rule: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = r#"{"rule":"brier"}"#)]
    pub rule: String,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    /// Reference forecast (long CSV, may hold several lead days)
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MurphyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated evaluation thresholds (default 0.01, 0.02, ..., 0.99)
    #[arg(long)]
    pub grid: Option<String>,
    /// Two systems whose elementary score difference is reported per time step
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub diff: Option<Vec<String>>,
    /// Decision threshold for --diff
    #[arg(long)]
    pub theta: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReliabilityArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Recalibrate forecasts before sweeping thresholds
    #[arg(long)]
    pub concave: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PrArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PerformanceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated thresholds (default: every distinct forecast value)
    #[arg(long)]
    pub thresholds: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FirmArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub thresholds: String,
    #[arg(long)]
    pub weights: String,
    /// Reference system subtracted from every system's mean FIRM score
    #[arg(long)]
    pub compare: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[arg(long, default_value_t = 1)]
    pub lead_day: u32,
    /// Comma-separated thresholds (default 0.01, ..., 0.99)
    #[arg(long)]
    pub thetas: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Beta shape parameters `a,b`
    #[arg(long, default_value = "1,3")]
    pub beta: String,
    /// Support interval `lo,hi`
    #[arg(long, default_value = "0,0.5")]
    pub support: String,
    #[arg(long, default_value_t = 0.1)]
    pub jitter_sd: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `argv` (including the program name), runs one subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid {what} value `{p}`")))
        })
        .collect()
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64)> {
    match parse_list(text, what)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(Error::Config(format!("{what} needs exactly two values"))),
    }
}

fn percent_grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

fn fmt(v: f64) -> String {
    // avoid printing negative zero
    (v + 0.0).to_string()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Collects output files and writes them together with `run.json`.
struct Run<'a> {
    command: &'static str,
    args: &'a [String],
    out: PathBuf,
    inputs: Vec<PathBuf>,
    seeds: serde_json::Map<String, serde_json::Value>,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    fn new(command: &'static str, args: &'a [String], out: &Path) -> Result<Self> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(Run {
            command,
            args,
            out: out.to_path_buf(),
            inputs: Vec::new(),
            seeds: Default::default(),
            outputs: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<()> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(name, &text)
    }

    fn svg(&mut self, name: &str, kind: PlotKind, series: &[Series], unc: Option<f64>) -> Result<()> {
        let doc = emit_svg(kind, series, unc)?;
        self.write(name, &doc)
    }

    fn finish(self) -> Result<()> {
        let inputs = self
            .inputs
            .iter()
            .map(|p| {
                let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
                let digest = Sha256::digest(&bytes);
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                Ok(json!({"path": p.display().to_string(), "sha256": hex}))
            })
            .collect::<Result<Vec<_>>>()?;
        let record = json!({
            "command": self.command,
            "arguments": self.args,
            "version": env!("CARGO_PKG_VERSION"),
            "seeds": self.seeds,
            "inputs": inputs,
            "outputs": self.outputs,
        });
        let path = self.out.join("run.json");
        let text = serde_json::to_string_pretty(&record).expect("json") + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

struct Data {
    loaded: LoadedDataset,
    round_percent: bool,
}

impl Data {
    fn load(args: &DataArgs, run: &mut Run) -> Result<Self> {
        let manifest = DatasetManifest::load(&args.manifest)?;
        run.inputs.push(args.manifest.clone());
        run.inputs
            .extend(manifest.input_paths().into_iter().map(Path::to_path_buf));
        let strictness = match args.strictness {
            Strictness::Joint => AlignStrictness::Joint,
            Strictness::PerLeadDay => AlignStrictness::PerLeadDay,
        };
        Ok(Data {
            loaded: dataset::load_manifest(&manifest, strictness)?,
            round_percent: args.round_percent,
        })
    }

    fn pairs(&self, system: &str, lead: u32) -> Result<PairSet> {
        let pairs = self.loaded.pairs(system, lead)?;
        if self.round_percent {
            pairs.map_forecasts(|x| (x * 100.0).round() / 100.0)
        } else {
            Ok(pairs)
        }
    }

    /// `(system, lead_day, pairs)` for every combination in manifest order.
    fn all(&self) -> Result<Vec<(String, u32, PairSet)>> {
        self.loaded
            .combinations()
            .into_iter()
            .map(|(s, d)| {
                let p = self.pairs(&s, d)?;
                Ok((s, d, p))
            })
            .collect()
    }
}

fn series_name(system: &str, lead: u32) -> String {
    format!("{system} d{lead}")
}

fn execute(command: &Command, args: &[String]) -> Result<()> {
    match command {
        Command::Score(a) => cmd_score(a, args),
        Command::Decompose(a) => cmd_decompose(a, args),
        Command::Murphy(a) => cmd_murphy(a, args),
        Command::Reliability(a) => cmd_reliability(a, args),
        Command::Roc(a) => cmd_roc(a, args),
        Command::Pr(a) => cmd_pr(a, args),
        Command::Performance(a) => cmd_performance(a, args),
        Command::Firm(a) => cmd_firm(a, args),
        Command::Compare(a) => cmd_compare(a, args),
        Command::Synthetic(a) => cmd_synthetic(a, args),
    }
}

fn cmd_score(a: &ScoreArgs, args: &[String]) -> Result<()> {
    let rule = ScoringRule::from_json(&a.rule)?;
    let mut run = Run::new("score", args, &a.output.out)?;
    let data = Data::load(&a.data, &mut run)?;
    let mut rows = Vec::new();
    for (system, lead, pairs) in data.all()? {
        let s = scoring::mean_score_with(&pairs, &rule, scoring::InfinitePolicy::Propagate)?;
        rows.push(vec![
            system,
            lead.to_string(),
            rule.label(),
            pairs.len().to_string(),
            fmt(s),
        ]);
    }
    run.csv("scores.csv", "system,lead_day,rule,n,mean_score", &rows)?;
    run.finish()
}

fn cmd_decompose(a: &DecomposeArgs, args: &[String]) -> Result<()> {
    let rule = ScoringRule::from_json(&a.rule)?;
    let boot = a.bootstrap.config()?;
    let mut run = Run::new("decompose", args, &a.output.out)?;
    if let Some(cfg) = &boot {
        run.seeds.insert("bootstrap".into(), json!(cfg.seed));
    }
    let data = Data::load(&a.data, &mut run)?;
    let mut loaded = data.loaded.clone();
    if data.round_percent {
        for s in &mut loaded.systems {
            for f in s.by_lead.values_mut() {
                let cells = (0..f.len())
                    .map(|i| f.get(i).map(|x| (x * 100.0).round() / 100.0))
                    .collect();
                *f = dataset::GridField::new(f.name.clone(), f.kind, f.axes.clone(), cells, f.lead_day)?;
            }
        }
    }
    let points = decomposition::diagram_points_for(&loaded, &rule, boot.as_ref())?;
    let lo = |ci: Option<(f64, f64)>| ci.map(|c| fmt(c.0)).unwrap_or_default();
    let hi = |ci: Option<(f64, f64)>| ci.map(|c| fmt(c.1)).unwrap_or_default();
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.system.clone(),
                p.lead_day.to_string(),
                rule.label(),
                fmt(p.mean_score),
                fmt(p.mcb),
                fmt(p.dsc),
                fmt(p.unc),
                lo(p.ci_mcb),
                hi(p.ci_mcb),
                lo(p.ci_dsc),
                hi(p.ci_dsc),
            ]
        })
        .collect();
    run.csv(
        "decomposition.csv",
        "system,lead_day,rule,mean_score,mcb,dsc,unc,mcb_lo,mcb_hi,dsc_lo,dsc_hi",
        &rows,
    )?;

    if let Some(reference) = &a.reference {
        run.inputs.push(reference.clone());
        let fields = dataset::load_long_csv_by_lead(reference, dataset::ValueKind::Probability)?;
        let mut rows = Vec::new();
        let leads: std::collections::BTreeSet<u32> = points.iter().map(|p| p.lead_day).collect();
        for lead in leads {
            let field = fields
                .get(&Some(lead))
                .or_else(|| fields.get(&None))
                .ok_or_else(|| Error::Alignment(format!("reference has no lead day {lead}")))?
                .reindex(&loaded.axes)?;
            // score the reference on the positions shared by every system
            let obs = &loaded.observation_by_lead[&lead];
            let aligned = dataset::align_missing(&[field, obs.clone()])?;
            let pairs = dataset::flatten_pairs(&aligned[1].clone(), &aligned[1])
                .and_then(|p| p.with_forecasts(vec![0.0; p.len()]))?;
            let s = reference_score(&pairs, &aligned[0], &rule)?;
            rows.push(vec![lead.to_string(), rule.label(), fmt(s)]);
        }
        run.csv("reference.csv", "lead_day,rule,mean_score", &rows)?;
    }

    if a.output.svg {
        let mut series: Vec<Series> = Vec::new();
        for p in &points {
            series.push(Series::markers(
                series_name(&p.system, p.lead_day),
                vec![(p.mcb, p.dsc)],
            ));
        }
        let unc = points.first().map(|p| p.unc);
        run.svg("mcb_dsc.svg", PlotKind::McbDsc, &series, unc)?;
    }
    run.finish()
}

fn cmd_murphy(a: &MurphyArgs, args: &[String]) -> Result<()> {
    let mut run = Run::new("murphy", args, &a.output.out)?;
    let data = Data::load(&a.data, &mut run)?;
    if let Some(pair) = &a.diff {
        let theta = a.theta.ok_or_else(|| Error::Config("--diff requires --theta".into()))?;
        let (sa, sb) = (&pair[0], &pair[1]);
        let mut rows = Vec::new();
        let leads_a: Vec<u32> = data.loaded.system(sa)?.by_lead.keys().copied().collect();
        for lead in leads_a {
            if !data.loaded.system(sb)?.by_lead.contains_key(&lead) {
                continue;
            }
            let pa = data.pairs(sa, lead)?;
            let pb = data.pairs(sb, lead)?;
            let series = diagnostics::murphy_difference(&pa, &pb, theta)?;
            let mut times: Vec<usize> = pa.time_index().unwrap_or(&[]).to_vec();
            times.sort_unstable();
            times.dedup();
            for (t, d) in times.iter().zip(series) {
                rows.push(vec![
                    sa.clone(),
                    sb.clone(),
                    lead.to_string(),
                    fmt(theta),
                    data.loaded.axes.time[*t].to_string(),
                    fmt(d),
                ]);
            }
        }
        run.csv("murphy_diff.csv", "system_a,system_b,lead_day,theta,time,diff", &rows)?;
        return run.finish();
    }
    let grid = match &a.grid {
        Some(g) => parse_list(g, "grid")?,
        None => percent_grid(),
    };
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (system, lead, pairs) in data.all()? {
        let curve = diagnostics::murphy_curve(&pairs, Some(&grid))?;
        let pts: Vec<(f64, f64)> = grid.iter().map(|&t| (t, curve.eval(t))).collect();
        for &(t, v) in &pts {
            rows.push(vec![system.clone(), lead.to_string(), fmt(t), fmt(v)]);
        }
        series.push(Series::line(series_name(&system, lead), pts));
    }
    run.csv("murphy.csv", "system,lead_day,theta,mean_score", &rows)?;
    if a.output.svg {
        run.svg("murphy.svg", PlotKind::Murphy, &series, None)?;
    }
    run.finish()
}

fn reliability_rows(
    system: &str,
    lead: &str,
    curve: &diagnostics::ReliabilityCurve,
    rows: &mut Vec<Vec<String>>,
    hist: &mut Vec<Vec<String>>,
    band: &mut Vec<Vec<String>>,
) {
    for b in &curve.points {
        rows.push(vec![
            system.into(),
            lead.into(),
            fmt(b.forecast_lo),
            fmt(b.forecast_hi),
            fmt(b.fitted),
            b.count.to_string(),
        ]);
    }
    for (k, c) in curve.histogram.iter().enumerate() {
        hist.push(vec![
            system.into(),
            lead.into(),
            fmt(k as f64 / 10.0),
            fmt((k + 1) as f64 / 10.0),
            c.to_string(),
        ]);
    }
    for p in curve.band.iter().flatten() {
        band.push(vec![system.into(), lead.into(), fmt(p.forecast), fmt(p.lo), fmt(p.hi)]);
    }
}

fn reliability_series(name: String, curve: &diagnostics::ReliabilityCurve) -> Series {
    let pts = curve
        .points
        .iter()
        .flat_map(|b| [(b.forecast_lo, b.fitted), (b.forecast_hi, b.fitted)])
        .collect();
    Series::line(name, pts)
}

fn cmd_reliability(a: &ReliabilityArgs, args: &[String]) -> Result<()> {
    let boot = a.bootstrap.config()?;
    let mut run = Run::new("reliability", args, &a.output.out)?;
    if let Some(cfg) = &boot {
        run.seeds.insert("bootstrap".into(), json!(cfg.seed));
    }
    let data = Data::load(&a.data, &mut run)?;
    let (mut rows, mut hist, mut band) = (Vec::new(), Vec::new(), Vec::new());
    let mut series = Vec::new();
    for (system, lead, pairs) in data.all()? {
        let curve = diagnostics::reliability_curve(&pairs, boot.as_ref())?;
        reliability_rows(&system, &lead.to_string(), &curve, &mut rows, &mut hist, &mut band);
        series.push(reliability_series(series_name(&system, lead), &curve));
    }
    run.csv(
        "reliability.csv",
        "system,lead_day,forecast_lo,forecast_hi,recalibrated,count",
        &rows,
    )?;
    run.csv("histogram.csv", "system,lead_day,bin_lo,bin_hi,count", &hist)?;
    if boot.is_some() {
        run.csv("reliability_band.csv", "system,lead_day,forecast,lo,hi", &band)?;
    }
    if a.output.svg {
        run.svg("reliability.svg", PlotKind::Reliability, &series, None)?;
    }
    run.finish()
}

fn cmd_roc(a: &RocArgs, args: &[String]) -> Result<()> {
    let mut run = Run::new("roc", args, &a.output.out)?;
    let data = Data::load(&a.data, &mut run)?;
    let (mut rows, mut aucs, mut series) = (Vec::new(), Vec::new(), Vec::new());
    for (system, lead, pairs) in data.all()? {
        let roc = diagnostics::roc_curve(&pairs, a.concave)?;
        for &(f, h) in &roc.points {
            rows.push(vec![system.clone(), lead.to_string(), fmt(f), fmt(h)]);
        }
        aucs.push(vec![
            system.clone(),
            lead.to_string(),
            a.concave.to_string(),
            fmt(roc.auc),
        ]);
        series.push(Series::line(series_name(&system, lead), roc.points));
    }
    run.csv("roc.csv", "system,lead_day,false_alarm_rate,hit_rate", &rows)?;
    run.csv("roc_auc.csv", "system,lead_day,concave,auc", &aucs)?;
    if a.output.svg {
        run.svg("roc.svg", PlotKind::Roc, &series, None)?;
    }
    run.finish()
}

fn cmd_pr(a: &PrArgs, args: &[String]) -> Result<()> {
    let mut run = Run::new("pr", args, &a.output.out)?;
    let data = Data::load(&a.data, &mut run)?;
    let (mut rows, mut aucs, mut series) = (Vec::new(), Vec::new(), Vec::new());
    for (system, lead, pairs) in data.all()? {
        let pr = diagnostics::pr_curve(&pairs)?;
        for &(r, p) in &pr.points {
            rows.push(vec![system.clone(), lead.to_string(), fmt(r), fmt(p)]);
        }
        aucs.push(vec![system.clone(), lead.to_string(), fmt_opt(pr.auc_pr)]);
        series.push(Series::line(series_name(&system, lead), pr.points));
    }
    run.csv("pr.csv", "system,lead_day,recall,precision", &rows)?;
    run.csv("pr_auc.csv", "system,lead_day,auc_pr", &aucs)?;
    if a.output.svg {
        run.svg("pr.svg", PlotKind::Pr, &series, None)?;
    }
    run.finish()
}

fn performance_rows(system: &str, lead: &str, curve: &diagnostics::PerformanceCurve, rows: &mut Vec<Vec<String>>) {
    for p in &curve.points {
        let c = p.counts;
        rows.push(vec![
            system.into(),
            lead.into(),
            fmt(p.threshold),
            fmt_opt(p.stats.pod),
            fmt_opt(p.stats.sr),
            fmt_opt(p.stats.csi),
            fmt_opt(p.stats.fb),
            c.hits.to_string(),
            c.misses.to_string(),
            c.false_alarms.to_string(),
            c.correct_negatives.to_string(),
        ]);
    }
}

const PERFORMANCE_HEADER: &str = "system,lead_day,threshold,pod,sr,csi,fb,hits,misses,false_alarms,correct_negatives";

fn performance_series(name: String, curve: &diagnostics::PerformanceCurve) -> Series {
    // x = SR, y = POD
    Series::line(name, curve.pr.points.iter().map(|&(pod, sr)| (sr, pod)).collect())
}

fn cmd_performance(a: &PerformanceArgs, args: &[String]) -> Result<()> {
    let mut run = Run::new("performance", args, &a.output.out)?;
    let data = Data::load(&a.data, &mut run)?;
    let grid = a
        .thresholds
        .as_deref()
        .map(|t| parse_list(t, "threshold"))
        .transpose()?;
    let (mut rows, mut best, mut series) = (Vec::new(), Vec::new(), Vec::new());
    for (system, lead, pairs) in data.all()? {
        let thresholds = match &grid {
            Some(g) => g.clone(),
            None => {
                let mut t = ThresholdSweep::new(&pairs)?.thresholds;
                t.retain(|&v| v > 0.0);
                t.reverse();
                t
            }
        };
        if thresholds.is_empty() {
            return Err(Error::Undefined(format!("`{system}` only forecasts 0")));
        }
        let curve = diagnostics::performance_curve(&pairs, &thresholds)?;
        performance_rows(&system, &lead.to_string(), &curve, &mut rows);
        best.push(vec![
            system.clone(),
            lead.to_string(),
            fmt_opt(curve.max_csi.map(|m| m.0)),
            fmt_opt(curve.max_csi.map(|m| m.1)),
            fmt_opt(curve.pr.auc_pr),
        ]);
        series.push(performance_series(series_name(&system, lead), &curve));
    }
    run.csv("performance.csv", PERFORMANCE_HEADER, &rows)?;
    run.csv("max_csi.csv", "system,lead_day,max_csi,threshold,auc_pr", &best)?;
    if a.output.svg {
        run.svg("performance.svg", PlotKind::Performance, &series, None)?;
    }
    run.finish()
}

fn cmd_firm(a: &FirmArgs, args: &[String]) -> Result<()> {
    let spec = FirmSpec::new(
        parse_list(&a.thresholds, "threshold")?,
        parse_list(&a.weights, "weight")?,
    )?;
    let rule = ScoringRule::Firm(spec.clone());
    let mut run = Run::new("firm", args, &a.output.out)?;
    let data = Data::load(&a.data, &mut run)?;

    let matrix = scoring::firm_matrix(&spec);
    let rows: Vec<Vec<String>> = matrix
        .categories
        .iter()
        .zip(&matrix.penalties)
        .enumerate()
        .map(|(c, (label, p))| vec![c.to_string(), format!("\"{label}\""), fmt(p[0]), fmt(p[1])])
        .collect();
    run.csv("firm_matrix.csv", "category,range,non_event,event", &rows)?;

    let mut scores = Vec::new();
    for (system, lead, pairs) in data.all()? {
        scores.push((system, lead, scoring::mean_score(&pairs, &rule)?));
    }
    let rows: Vec<Vec<String>> = scores
        .iter()
        .map(|(s, d, v)| vec![s.clone(), d.to_string(), fmt(*v)])
        .collect();
    run.csv("firm.csv", "system,lead_day,mean_firm", &rows)?;

    if let Some(reference) = &a.compare {
        data.loaded.system(reference)?;
        let mut rows = Vec::new();
        for (system, lead, score) in &scores {
            if system == reference {
                continue;
            }
            let Some((_, _, ref_score)) = scores.iter().find(|(s, d, _)| s == reference && d == lead) else {
                continue;
            };
            rows.push(vec![
                system.clone(),
                lead.to_string(),
                reference.clone(),
                fmt(score - ref_score),
            ]);
        }
        run.csv("firm_diff.csv", "system,lead_day,reference,difference", &rows)?;
    }
    run.finish()
}

fn cmd_compare(a: &CompareArgs, args: &[String]) -> Result<()> {
    let thetas = match &a.thetas {
        Some(t) => parse_list(t, "theta")?,
        None => percent_grid(),
    };
    let mut run = Run::new("compare", args, &a.output.out)?;
    let data = Data::load(&a.data, &mut run)?;
    let pa = data.pairs(&a.a, a.lead_day)?;
    let pb = data.pairs(&a.b, a.lead_day)?;
    let table = inference::compare_elementary(&pa, &pb, &thetas, a.lead_day)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            [r.theta, r.mean_diff, r.statistic, r.lo50, r.hi50, r.lo95, r.hi95]
                .map(fmt)
                .to_vec()
        })
        .collect();
    run.csv("compare.csv", "theta,mean_diff,stat,lo50,hi50,lo95,hi95", &rows)?;
    run.finish()
}

#[derive(Serialize)]
struct SyntheticReport<'a> {
    version: &'static str,
    result: &'a synthetic::ExperimentResult,
}

fn cmd_synthetic(a: &SyntheticArgs, args: &[String]) -> Result<()> {
    let config = SyntheticConfig {
        n_trials: a.n,
        seed: a.seed,
        beta_shape: parse_pair(&a.beta, "beta")?,
        support: parse_pair(&a.support, "support")?,
        jitter_sd: a.jitter_sd,
    };
    config.validate()?;
    let mut run = Run::new("synthetic", args, &a.output.out)?;
    run.seeds.insert("synthetic".into(), json!(a.seed));
    let systems = synthetic::generate(&config)?;
    let result = synthetic::evaluate(&config, &systems)?;
    let report = serde_json::to_string_pretty(&SyntheticReport {
        version: env!("CARGO_PKG_VERSION"),
        result: &result,
    })
    .expect("report serializes");
    run.write("synthetic.json", &(report + "\n"))?;

    let grid: Vec<f64> = (1..=50).map(|i| i as f64 / 50.0).collect();
    let (mut perf, mut rel, mut hist, mut band, mut murphy, mut roc) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut perf_s, mut rel_s, mut murphy_s, mut roc_s) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (name, pairs) in systems.pair_sets()? {
        let curve = diagnostics::performance_curve(&pairs, &grid)?;
        performance_rows(name, "", &curve, &mut perf);
        perf_s.push(performance_series(name.into(), &curve));

        let r = diagnostics::reliability_curve(&pairs, None)?;
        reliability_rows(name, "", &r, &mut rel, &mut hist, &mut band);
        rel_s.push(reliability_series(name.into(), &r));

        let m = diagnostics::murphy_curve(&pairs, None)?;
        let pts: Vec<(f64, f64)> = percent_grid().into_iter().map(|t| (t, m.eval(t))).collect();
        for &(t, v) in &pts {
            murphy.push(vec![name.into(), String::new(), fmt(t), fmt(v)]);
        }
        murphy_s.push(Series::line(name, pts));

        let c = diagnostics::roc_curve(&pairs, false)?;
        let step = (c.points.len() / 500).max(1);
        let mut pts: Vec<(f64, f64)> = c.points.iter().copied().step_by(step).collect();
        if pts.last() != c.points.last() {
            pts.push(*c.points.last().expect("anchored curve"));
        }
        for &(f, h) in &pts {
            roc.push(vec![name.into(), String::new(), fmt(f), fmt(h)]);
        }
        roc_s.push(Series::line(name, pts));
    }
    run.csv("performance.csv", PERFORMANCE_HEADER, &perf)?;
    run.csv(
        "reliability.csv",
        "system,lead_day,forecast_lo,forecast_hi,recalibrated,count",
        &rel,
    )?;
    run.csv("histogram.csv", "system,lead_day,bin_lo,bin_hi,count", &hist)?;
    run.csv("murphy.csv", "system,lead_day,theta,mean_score", &murphy)?;
    run.csv("roc.csv", "system,lead_day,false_alarm_rate,hit_rate", &roc)?;
    if a.output.svg {
        run.svg("performance.svg", PlotKind::Performance, &perf_s, None)?;
        run.svg("reliability.svg", PlotKind::Reliability, &rel_s, None)?;
        run.svg("murphy.svg", PlotKind::Murphy, &murphy_s, None)?;
        run.svg("roc.svg", PlotKind::Roc, &roc_s, None)?;
    }
    run.finish()
}
