//! Gridded forecast/observation fields, cross-system missing-data alignment
//! and flattening into scoring-ready pair sets.
//!
//! The interchange format is a long CSV with the header
//! `time,y,x,lead_day,value`. Coordinates are opaque integer labels; the
//! grid of a field is the Cartesian product of the distinct labels seen on
//! each axis, and every combination absent from the file (or present with an
//! empty `value`) is masked as missing.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LONG_CSV_HEADER: [&str; 5] = ["time", "y", "x", "lead_day", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Probability,
    Binary,
}

/// Coordinate labels of the three grid axes, each sorted ascending and
/// without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Axes {
    pub time: Vec<i64>,
    pub y: Vec<i64>,
    pub x: Vec<i64>,
}

impl Axes {
    pub fn new(time: Vec<i64>, y: Vec<i64>, x: Vec<i64>) -> Result<Self> {
        for (name, labels) in [("time", &time), ("y", &y), ("x", &x)] {
            if labels.is_empty() {
                return Err(Error::Validation(format!("axis `{name}` has no labels")));
            }
            if labels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!(
                    "axis `{name}` labels must be strictly increasing"
                )));
            }
        }
        Ok(Axes { time, y, x })
    }

    /// `(time, y, x)` axis lengths.
    pub fn shape(&self) -> [usize; 3] {
        [self.time.len(), self.y.len(), self.x.len()]
    }

    pub fn n_cells(&self) -> usize {
        self.time.len() * self.y.len() * self.x.len()
    }

    /// Union of the labels of two axis sets.
    pub fn union(&self, other: &Axes) -> Axes {
        fn merge(a: &[i64], b: &[i64]) -> Vec<i64> {
            a.iter()
                .chain(b)
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        }
        Axes {
            time: merge(&self.time, &other.time),
            y: merge(&self.y, &other.y),
            x: merge(&self.x, &other.x),
        }
    }

    fn mismatched(&self, other: &Axes) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.time != other.time {
            out.push("time");
        }
        if self.y != other.y {
            out.push("y");
        }
        if self.x != other.x {
            out.push("x");
        }
        out
    }

    fn position(&self, t: i64, y: i64, x: i64) -> Option<usize> {
        let ti = self.time.binary_search(&t).ok()?;
        let yi = self.y.binary_search(&y).ok()?;
        let xi = self.x.binary_search(&x).ok()?;
        Some((ti * self.y.len() + yi) * self.x.len() + xi)
    }
}

/// A forecast or observation field on a `(time, y, x)` grid stored in
/// row-major order. Masked cells hold `NaN`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridField {
    pub name: String,
    pub kind: ValueKind,
    pub axes: Axes,
    values: Vec<f64>,
    mask: Vec<bool>,
    pub lead_day: Option<u32>,
}

impl GridField {
    /// Builds a field from raw parts. `None` entries are missing.
    pub fn new(
        name: impl Into<String>,
        kind: ValueKind,
        axes: Axes,
        cells: Vec<Option<f64>>,
        lead_day: Option<u32>,
    ) -> Result<Self> {
        if cells.len() != axes.n_cells() {
            return Err(Error::Validation(format!(
                "{} cells supplied for a grid of shape {:?}",
                cells.len(),
                axes.shape()
            )));
        }
        if lead_day == Some(0) {
            return Err(Error::Validation("lead_day must be >= 1".into()));
        }
        let mut values = Vec::with_capacity(cells.len());
        let mut mask = Vec::with_capacity(cells.len());
        for (i, cell) in cells.into_iter().enumerate() {
            match cell {
                Some(v) => {
                    check_value(kind, v).map_err(|msg| Error::Validation(format!("cell {i}: {msg}")))?;
                    values.push(v);
                    mask.push(false);
                }
                None => {
                    values.push(f64::NAN);
                    mask.push(true);
                }
            }
        }
        Ok(GridField {
            name: name.into(),
            kind,
            axes,
            values,
            mask,
            lead_day,
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.axes.shape()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `true` marks a missing cell.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        (!self.mask[index]).then(|| self.values[index])
    }

    pub fn n_missing(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    fn set_missing(&mut self, index: usize) {
        self.mask[index] = true;
        self.values[index] = f64::NAN;
    }

    /// Re-expresses the field on a superset grid; new cells are missing.
    pub fn reindex(&self, axes: &Axes) -> Result<GridField> {
        let [nt, ny, nx] = self.shape();
        let mut cells = vec![None; axes.n_cells()];
        for ti in 0..nt {
            for yi in 0..ny {
                for xi in 0..nx {
                    let src = (ti * ny + yi) * nx + xi;
                    let dst = axes
                        .position(self.axes.time[ti], self.axes.y[yi], self.axes.x[xi])
                        .ok_or_else(|| {
                            Error::Alignment(format!("field `{}` has coordinates outside the target grid", self.name))
                        })?;
                    cells[dst] = self.get(src);
                }
            }
        }
        GridField::new(self.name.clone(), self.kind, axes.clone(), cells, self.lead_day)
    }

    /// Writes the field as long CSV, one row per grid cell, with masked
    /// cells written as an empty `value`.
    pub fn write_long_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_long_csv_to(BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn write_long_csv_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", LONG_CSV_HEADER.join(","))?;
        let lead = self.lead_day.map(|d| d.to_string()).unwrap_or_default();
        let [nt, ny, nx] = self.shape();
        for ti in 0..nt {
            for yi in 0..ny {
                for xi in 0..nx {
                    let i = (ti * ny + yi) * nx + xi;
                    let value = self.get(i).map(|v| v.to_string()).unwrap_or_default();
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        self.axes.time[ti], self.axes.y[yi], self.axes.x[xi], lead, value
                    )?;
                }
            }
        }
        w.flush()
    }
}

impl PartialEq for GridField {
    /// Equal metadata, masks and unmasked values.
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.kind == other.kind
            && self.axes == other.axes
            && self.lead_day == other.lead_day
            && self.mask == other.mask
            && (0..self.len()).all(|i| self.mask[i] || self.values[i] == other.values[i])
    }
}

fn check_value(kind: ValueKind, v: f64) -> std::result::Result<(), String> {
    match kind {
        ValueKind::Probability if !(0.0..=1.0).contains(&v) => Err(format!("probability {v} outside [0, 1]")),
        ValueKind::Binary if v != 0.0 && v != 1.0 => Err(format!("binary value {v} not in {{0, 1}}")),
        _ => Ok(()),
    }
}

/// One parsed data row of a long CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRow {
    pub line: usize,
    pub time: i64,
    pub y: i64,
    pub x: i64,
    pub lead_day: Option<u32>,
    pub value: Option<f64>,
}

/// Parsed content of a long CSV file before it is placed on a grid.
#[derive(Debug, Clone, Default)]
pub struct LongTable {
    pub rows: Vec<LongRow>,
}

impl LongTable {
    pub fn read(path: impl AsRef<Path>, kind: ValueKind) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, kind)
    }

    pub fn from_reader<R: Read>(reader: R, kind: ValueKind) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| Error::Format(e.to_string()))?,
            None => return Err(Error::Format("missing header line".into())),
        };
        for (i, expected) in LONG_CSV_HEADER.iter().enumerate() {
            match header.get(i) {
                Some(found) if found.trim() == *expected => {}
                Some(found) => {
                    return Err(Error::Format(format!(
                        "header column {} must be `{expected}`, found `{found}`",
                        i + 1
                    )))
                }
                None => return Err(Error::Format(format!("header is missing column `{expected}`"))),
            }
        }
        if let Some(extra) = header.get(LONG_CSV_HEADER.len()) {
            return Err(Error::Format(format!("unexpected header column `{extra}`")));
        }

        let mut rows = Vec::new();
        for (k, record) in records.enumerate() {
            let line = k + 2;
            let record = record.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
            if record.len() == 1 && record[0].trim().is_empty() {
                continue;
            }
            if record.len() != LONG_CSV_HEADER.len() {
                return Err(Error::Format(format!(
                    "line {line}: expected 5 fields, found {}",
                    record.len()
                )));
            }
            let int = |col: usize| -> Result<i64> {
                record[col].trim().parse::<i64>().map_err(|_| {
                    Error::Format(format!(
                        "line {line}: column `{}` is not an integer: `{}`",
                        LONG_CSV_HEADER[col], &record[col]
                    ))
                })
            };
            let lead_day = match record[3].trim() {
                "" => None,
                s => Some(s.parse::<u32>().ok().filter(|&d| d >= 1).ok_or_else(|| {
                    Error::Format(format!(
                        "line {line}: column `lead_day` must be an integer >= 1, found `{s}`"
                    ))
                })?),
            };
            let value = match record[4].trim() {
                "" => None,
                s => {
                    let v = s
                        .parse::<f64>()
                        .map_err(|_| Error::Format(format!("line {line}: column `value` is not a decimal: `{s}`")))?;
                    check_value(kind, v).map_err(|msg| Error::Validation(format!("row {line}: {msg}")))?;
                    Some(v)
                }
            };
            rows.push(LongRow {
                line,
                time: int(0)?,
                y: int(1)?,
                x: int(2)?,
                lead_day,
                value,
            });
        }
        Ok(LongTable { rows })
    }

    /// Grid spanned by the distinct coordinate labels of all rows.
    pub fn axes(&self) -> Result<Axes> {
        if self.rows.is_empty() {
            return Err(Error::EmptyData("long CSV has no data rows".into()));
        }
        let collect = |f: fn(&LongRow) -> i64| -> Vec<i64> {
            self.rows.iter().map(f).collect::<BTreeSet<_>>().into_iter().collect()
        };
        Axes::new(collect(|r| r.time), collect(|r| r.y), collect(|r| r.x))
    }

    pub fn lead_days(&self) -> BTreeSet<Option<u32>> {
        self.rows.iter().map(|r| r.lead_day).collect()
    }

    /// Places the rows matching `lead_day` (all rows when `None`) on `axes`.
    pub fn to_field(&self, name: &str, kind: ValueKind, axes: &Axes, lead_day: Option<u32>) -> Result<GridField> {
        let mut cells: Vec<Option<f64>> = vec![None; axes.n_cells()];
        let mut seen = vec![false; axes.n_cells()];
        for row in &self.rows {
            if lead_day.is_some() && row.lead_day != lead_day {
                continue;
            }
            let pos = axes
                .position(row.time, row.y, row.x)
                .ok_or_else(|| Error::Alignment(format!("line {}: coordinates outside the grid", row.line)))?;
            if seen[pos] {
                return Err(Error::Format(format!(
                    "line {}: duplicate entry for (time={}, y={}, x={})",
                    row.line, row.time, row.y, row.x
                )));
            }
            seen[pos] = true;
            cells[pos] = row.value;
        }
        GridField::new(name, kind, axes.clone(), cells, lead_day)
    }
}

/// Loads a single-lead-day long CSV file.
///
/// The field's grid is inferred from the distinct coordinates in the file.
/// Files holding several lead days must be split with
/// [`load_long_csv_by_lead`].
pub fn load_long_csv(path: impl AsRef<Path>, kind: ValueKind) -> Result<GridField> {
    let path = path.as_ref();
    let table = LongTable::read(path, kind)?;
    let axes = table.axes()?;
    let leads = table.lead_days();
    if leads.len() > 1 {
        return Err(Error::Format(format!(
            "{} holds {} lead days; load it per lead day",
            path.display(),
            leads.len()
        )));
    }
    let lead = leads.into_iter().next().flatten();
    table.to_field(&field_name(path), kind, &axes, lead)
}

/// Loads a long CSV file holding any number of lead days, one field per
/// lead day, all on the grid spanned by the whole file.
pub fn load_long_csv_by_lead(path: impl AsRef<Path>, kind: ValueKind) -> Result<BTreeMap<Option<u32>, GridField>> {
    let path = path.as_ref();
    let table = LongTable::read(path, kind)?;
    let axes = table.axes()?;
    let name = field_name(path);
    table
        .lead_days()
        .into_iter()
        .map(|lead| Ok((lead, table.to_field(&name, kind, &axes, lead)?)))
        .collect()
}

fn field_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Applies the union of all input masks to every field.
///
/// A cell is missing in every output iff it is missing in any input.
pub fn align_missing(fields: &[GridField]) -> Result<Vec<GridField>> {
    let Some(first) = fields.first() else {
        return Ok(Vec::new());
    };
    for f in &fields[1..] {
        let bad = first.axes.mismatched(&f.axes);
        if !bad.is_empty() {
            return Err(Error::Alignment(format!(
                "fields `{}` and `{}` differ on axes: {}",
                first.name,
                f.name,
                bad.join(", ")
            )));
        }
    }
    let mut union = vec![false; first.len()];
    for f in fields {
        for (u, &m) in union.iter_mut().zip(&f.mask) {
            *u |= m;
        }
    }
    Ok(fields
        .iter()
        .map(|f| {
            let mut out = f.clone();
            for (i, &m) in union.iter().enumerate() {
                if m {
                    out.set_missing(i);
                }
            }
            out
        })
        .collect())
}

/// Paired forecast probabilities and binary outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSet {
    forecasts: Vec<f64>,
    outcomes: Vec<bool>,
    time_index: Option<Vec<usize>>,
    cell_index: Option<Vec<usize>>,
}

impl PairSet {
    pub fn new(forecasts: Vec<f64>, outcomes: Vec<bool>) -> Result<Self> {
        if forecasts.len() != outcomes.len() {
            return Err(Error::Validation(format!(
                "{} forecasts but {} outcomes",
                forecasts.len(),
                outcomes.len()
            )));
        }
        if forecasts.is_empty() {
            return Err(Error::EmptyData("pair set has no pairs".into()));
        }
        if let Some((i, x)) = forecasts.iter().enumerate().find(|(_, x)| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Validation(format!("forecast {i} = {x} outside [0, 1]")));
        }
        Ok(PairSet {
            forecasts,
            outcomes,
            time_index: None,
            cell_index: None,
        })
    }

    /// Convenience constructor from numeric outcomes, which must be 0 or 1.
    pub fn from_numeric(forecasts: Vec<f64>, outcomes: &[f64]) -> Result<Self> {
        let outcomes = outcomes
            .iter()
            .enumerate()
            .map(|(i, &y)| match y {
                0.0 => Ok(false),
                1.0 => Ok(true),
                y => Err(Error::Validation(format!("outcome {i} = {y} not in {{0, 1}}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(forecasts, outcomes)
    }

    pub fn with_indices(mut self, time_index: Option<Vec<usize>>, cell_index: Option<Vec<usize>>) -> Result<Self> {
        for idx in [&time_index, &cell_index].into_iter().flatten() {
            if idx.len() != self.len() {
                return Err(Error::Validation(format!(
                    "index of length {} for {} pairs",
                    idx.len(),
                    self.len()
                )));
            }
        }
        self.time_index = time_index;
        self.cell_index = cell_index;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.forecasts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forecasts.is_empty()
    }

    pub fn forecasts(&self) -> &[f64] {
        &self.forecasts
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn time_index(&self) -> Option<&[usize]> {
        self.time_index.as_deref()
    }

    pub fn cell_index(&self) -> Option<&[usize]> {
        self.cell_index.as_deref()
    }

    pub fn n_events(&self) -> usize {
        self.outcomes.iter().filter(|&&y| y).count()
    }

    /// Same outcomes and indices with new forecasts.
    pub fn with_forecasts(&self, forecasts: Vec<f64>) -> Result<Self> {
        let mut out = PairSet::new(forecasts, self.outcomes.clone())?;
        out.time_index = self.time_index.clone();
        out.cell_index = self.cell_index.clone();
        Ok(out)
    }

    /// Applies `f` to every forecast.
    pub fn map_forecasts(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_forecasts(self.forecasts.iter().map(|&x| f(x)).collect())
    }

    /// Pairs at the given positions, in order (positions may repeat).
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        let pick = |v: &Option<Vec<usize>>| v.as_ref().map(|v| positions.iter().map(|&i| v[i]).collect());
        let out = PairSet::new(
            positions.iter().map(|&i| self.forecasts[i]).collect(),
            positions.iter().map(|&i| self.outcomes[i]).collect(),
        )?;
        out.with_indices(pick(&self.time_index), pick(&self.cell_index))
    }
}

/// Pairs every jointly non-missing cell, ordered time-major, then `y`,
/// then `x`. `cell_index` is the row-major position within a time slice.
pub fn flatten_pairs(forecast: &GridField, observation: &GridField) -> Result<PairSet> {
    let bad = forecast.axes.mismatched(&observation.axes);
    if !bad.is_empty() {
        return Err(Error::Alignment(format!(
            "forecast `{}` and observation `{}` differ on axes: {}",
            forecast.name,
            observation.name,
            bad.join(", ")
        )));
    }
    if observation.kind != ValueKind::Binary {
        return Err(Error::Validation(format!(
            "observation `{}` must be a binary field",
            observation.name
        )));
    }
    let [_, ny, nx] = forecast.shape();
    let slice = ny * nx;
    let mut forecasts = Vec::new();
    let mut outcomes = Vec::new();
    let mut times = Vec::new();
    let mut cells = Vec::new();
    for i in 0..forecast.len() {
        if let (Some(x), Some(y)) = (forecast.get(i), observation.get(i)) {
            forecasts.push(x);
            outcomes.push(y == 1.0);
            times.push(i / slice);
            cells.push(i % slice);
        }
    }
    if forecasts.is_empty() {
        return Err(Error::EmptyData(format!(
            "no jointly non-missing cells for `{}`",
            forecast.name
        )));
    }
    PairSet::new(forecasts, outcomes)?.with_indices(Some(times), Some(cells))
}

/// Relative frequency of events.
pub fn base_rate(pairs: &PairSet) -> f64 {
    pairs.n_events() as f64 / pairs.len() as f64
}

/// Scope over which missing-data masks are unioned when loading a manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignStrictness {
    /// One union over all systems, all lead days and the observation.
    #[default]
    Joint,
    /// A separate union per lead day over all systems and the observation.
    PerLeadDay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemEntry {
    pub name: String,
    pub path: PathBuf,
    pub lead_days: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub systems: Vec<SystemEntry>,
    pub observation: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_mask: Option<PathBuf>,
}

impl DatasetManifest {
    /// Reads a JSON manifest; relative paths are resolved against the
    /// manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for s in &mut m.systems {
            resolve(&mut s.path);
        }
        resolve(&mut m.observation);
        if let Some(r) = m.region_mask.as_mut() {
            resolve(r);
        }
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.systems.is_empty() {
            return Err(Error::Validation("manifest lists no systems".into()));
        }
        let mut names = BTreeSet::new();
        for s in &self.systems {
            if !names.insert(&s.name) {
                return Err(Error::Validation(format!("duplicate system name `{}`", s.name)));
            }
            if s.lead_days.is_empty() || s.lead_days.contains(&0) {
                return Err(Error::Validation(format!("system `{}` needs lead days >= 1", s.name)));
            }
        }
        Ok(())
    }

    /// All input files, in manifest order.
    pub fn input_paths(&self) -> Vec<&Path> {
        let mut out: Vec<&Path> = self.systems.iter().map(|s| s.path.as_path()).collect();
        out.push(&self.observation);
        if let Some(r) = &self.region_mask {
            out.push(r);
        }
        out
    }
}

/// A manifest's fields on a common grid with missing data aligned.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub axes: Axes,
    pub observation: GridField,
    /// Observation after the per-lead-day union (equal to `observation`
    /// under joint alignment).
    pub observation_by_lead: BTreeMap<u32, GridField>,
    pub systems: Vec<LoadedSystem>,
}

#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub name: String,
    pub by_lead: BTreeMap<u32, GridField>,
}

impl LoadedDataset {
    pub fn system(&self, name: &str) -> Result<&LoadedSystem> {
        self.systems
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Config(format!("unknown system `{name}`")))
    }

    pub fn pairs(&self, system: &str, lead_day: u32) -> Result<PairSet> {
        let sys = self.system(system)?;
        let field = sys
            .by_lead
            .get(&lead_day)
            .ok_or_else(|| Error::Config(format!("system `{system}` has no lead day {lead_day}")))?;
        flatten_pairs(field, &self.observation_by_lead[&lead_day])
    }

    /// `(system, lead_day)` combinations in manifest order.
    pub fn combinations(&self) -> Vec<(String, u32)> {
        self.systems
            .iter()
            .flat_map(|s| s.by_lead.keys().map(move |&d| (s.name.clone(), d)))
            .collect()
    }
}

/// Loads every file named by the manifest onto the union grid and applies
/// the missing-data rule.
pub fn load_manifest(manifest: &DatasetManifest, strictness: AlignStrictness) -> Result<LoadedDataset> {
    manifest.validate()?;
    let obs_table = LongTable::read(&manifest.observation, ValueKind::Binary)?;
    let mut axes = obs_table.axes()?;
    let mut tables = Vec::new();
    for s in &manifest.systems {
        let t = LongTable::read(&s.path, ValueKind::Probability)?;
        axes = axes.union(&t.axes()?);
        tables.push(t);
    }
    let region = match &manifest.region_mask {
        Some(p) => Some(LongTable::read(p, ValueKind::Binary)?),
        None => None,
    };
    if let Some(r) = &region {
        let ra = r.axes()?;
        axes.y = axes
            .y
            .iter()
            .chain(&ra.y)
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        axes.x = axes
            .x
            .iter()
            .chain(&ra.x)
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
    }

    let obs_leads = obs_table.lead_days();
    if obs_leads.len() > 1 {
        return Err(Error::Format("observation file must not vary by lead day".into()));
    }
    let mut observation = obs_table.to_field(&field_name(&manifest.observation), ValueKind::Binary, &axes, None)?;
    observation.name = "observation".into();
    if let Some(r) = &region {
        let inside: BTreeSet<(i64, i64)> = r
            .rows
            .iter()
            .filter(|row| row.value == Some(1.0))
            .map(|row| (row.y, row.x))
            .collect();
        let [nt, ny, nx] = axes.shape();
        for ti in 0..nt {
            for yi in 0..ny {
                for xi in 0..nx {
                    if !inside.contains(&(axes.y[yi], axes.x[xi])) {
                        observation.set_missing((ti * ny + yi) * nx + xi);
                    }
                }
            }
        }
    }

    let mut systems = Vec::new();
    for (entry, table) in manifest.systems.iter().zip(&tables) {
        let mut by_lead = BTreeMap::new();
        for &d in &entry.lead_days {
            let mut f = table.to_field(&entry.name, ValueKind::Probability, &axes, Some(d))?;
            f.name = entry.name.clone();
            by_lead.insert(d, f);
        }
        systems.push(LoadedSystem {
            name: entry.name.clone(),
            by_lead,
        });
    }

    let lead_days: BTreeSet<u32> = manifest
        .systems
        .iter()
        .flat_map(|s| s.lead_days.iter().copied())
        .collect();
    let mut observation_by_lead = BTreeMap::new();
    match strictness {
        AlignStrictness::Joint => {
            let mut all = vec![observation.clone()];
            all.extend(systems.iter().flat_map(|s| s.by_lead.values().cloned()));
            let aligned = align_missing(&all)?;
            let mut it = aligned.into_iter();
            observation = it.next().expect("observation present");
            for s in &mut systems {
                for f in s.by_lead.values_mut() {
                    *f = it.next().expect("one aligned field per input");
                }
            }
            for d in lead_days {
                observation_by_lead.insert(d, observation.clone());
            }
        }
        AlignStrictness::PerLeadDay => {
            for d in lead_days {
                let mut group = vec![observation.clone()];
                let members: Vec<usize> = systems
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.by_lead.contains_key(&d))
                    .map(|(i, _)| i)
                    .collect();
                group.extend(members.iter().map(|&i| systems[i].by_lead[&d].clone()));
                let mut aligned = align_missing(&group)?.into_iter();
                observation_by_lead.insert(d, aligned.next().expect("observation present"));
                for &i in &members {
                    systems[i].by_lead.insert(d, aligned.next().expect("aligned member"));
                }
            }
        }
    }
    Ok(LoadedDataset {
        axes,
        observation,
        observation_by_lead,
        systems,
    })
}
