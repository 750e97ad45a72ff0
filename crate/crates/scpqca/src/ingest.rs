//! CSV in, CSV out.
//!
//! Each column is read one of three ways:
//!
//! * integers: the cell is the level, and the level count is `max + 1`
//!   (at least 2) unless a count is declared;
//! * labels: any non-integer column. Distinct labels are sorted and
//!   numbered, and the schema keeps the labels for display;
//! * cut points: `x` gets the number of cut points `<= x`, so a value on a
//!   boundary lands in the higher level.
//!
//! Case ids come from an `id` column, or from the first column when its
//! values are distinct and none is numeric. Otherwise rows are numbered
//! from 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use scpqca_core::{Case, CaseTable, Factor, FactorSchema, Level};
use serde::Serialize;

#[derive(Debug)]
pub struct IngestError {
    /// 1-based line in the file; the header is line 1.
    pub line: Option<usize>,
    pub column: Option<String>,
    pub message: String,
}

impl IngestError {
    fn new(message: impl Into<String>) -> Self {
        IngestError { line: None, column: None, message: message.into() }
    }

    fn at(line: usize, column: &str, message: impl Into<String>) -> Self {
        IngestError { line: Some(line), column: Some(column.to_string()), message: message.into() }
    }
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column `{c}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(c)) => write!(f, "column `{c}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for IngestError {}

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnCalibration {
    /// Integer levels or labels, detected from the cells.
    Passthrough,
    /// Integer levels with a declared count; larger values are errors.
    Levels(u32),
    /// Strictly increasing thresholds; `k` cut points give `k + 1` levels.
    Cutpoints(Vec<f64>),
}

impl ColumnCalibration {
    pub fn cutpoints(points: Vec<f64>) -> Result<Self, IngestError> {
        if points.is_empty() {
            return Err(IngestError::new("cut points: need at least one"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(IngestError::new("cut points must be finite"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(IngestError::new("cut points must be strictly increasing"));
        }
        Ok(ColumnCalibration::Cutpoints(points))
    }

    /// Level of raw value `x` under these cut points.
    pub fn level_of(points: &[f64], x: f64) -> Level {
        points.partition_point(|&p| p <= x) as Level
    }
}

/// Per-column calibration; unnamed columns pass through.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CalibrationSpec {
    pub columns: BTreeMap<String, ColumnCalibration>,
}

impl CalibrationSpec {
    pub fn get(&self, column: &str) -> &ColumnCalibration {
        self.columns.get(column).unwrap_or(&ColumnCalibration::Passthrough)
    }

    /// Parses `COLUMN=0.33,0.66`.
    pub fn add_cut(&mut self, arg: &str) -> Result<(), IngestError> {
        let (col, rest) = arg.split_once('=').ok_or_else(|| IngestError::new(format!("--cut `{arg}`: expected COLUMN=x1,x2,...")))?;
        let points = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| IngestError::new(format!("--cut `{arg}`: `{s}` is not a number"))))
            .collect::<Result<Vec<_>, _>>()?;
        let cal = ColumnCalibration::cutpoints(points).map_err(|e| IngestError::new(format!("--cut `{arg}`: {}", e.message)))?;
        self.columns.insert(col.trim().to_string(), cal);
        Ok(())
    }

    /// Parses `COLUMN=3`.
    pub fn add_levels(&mut self, arg: &str) -> Result<(), IngestError> {
        let parsed = arg.split_once('=').and_then(|(c, n)| Some((c.trim(), n.trim().parse::<u32>().ok()?))).filter(|&(_, n)| n >= 2);
        let (col, n) = parsed.ok_or_else(|| IngestError::new(format!("--declare-levels `{arg}`: expected COLUMN=N with N >= 2")))?;
        self.columns.insert(col.to_string(), ColumnCalibration::Levels(n));
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadOptions {
    /// Outcome column; the last column when `None`.
    pub outcome: Option<String>,
    pub calibration: CalibrationSpec,
    /// Forces the id column; by default see the module docs.
    pub id_column: Option<String>,
}

pub fn load_csv(path: &Path, options: &LoadOptions) -> Result<CaseTable, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::new(format!("{}: {e}", path.display())))?;
    read_csv(file, options)
}

fn is_integer(s: &str) -> bool {
    s.parse::<u32>().is_ok()
}

fn is_numeric(s: &str) -> bool {
    s.parse::<f64>().is_ok()
}

/// Maps one column's raw cells to levels.
fn calibrate(name: &str, cells: &[&str], cal: &ColumnCalibration) -> Result<(Factor, Vec<Level>), IngestError> {
    let line = |i: usize| i + 2;
    match cal {
        ColumnCalibration::Cutpoints(points) => {
            let levels = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let x: f64 = c.parse().map_err(|_| IngestError::at(line(i), name, format!("`{c}` is not numeric")))?;
                    if x.is_nan() {
                        return Err(IngestError::at(line(i), name, "NaN cannot be calibrated"));
                    }
                    Ok(ColumnCalibration::level_of(points, x))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((Factor::new(name, points.len() as u32 + 1), levels))
        }
        ColumnCalibration::Levels(n) => {
            let levels = cells
                .iter()
                .enumerate()
                .map(|(i, c)| match c.parse::<u32>() {
                    Ok(v) if v < *n => Ok(v),
                    Ok(v) => Err(IngestError::at(line(i), name, format!("level {v} outside the declared {n} levels"))),
                    Err(_) => Err(IngestError::at(line(i), name, format!("`{c}` is not an integer level"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((Factor::new(name, *n), levels))
        }
        ColumnCalibration::Passthrough => {
            if let Some(i) = cells.iter().position(|c| c.is_empty()) {
                return Err(IngestError::at(line(i), name, "empty cell"));
            }
            if cells.iter().all(|c| is_integer(c)) {
                let levels: Vec<Level> = cells.iter().map(|c| c.parse().unwrap()).collect();
                let count = levels.iter().max().map_or(2, |m| (m + 1).max(2));
                Ok((Factor::new(name, count), levels))
            } else {
                let mut labels: Vec<String> = cells.iter().map(|c| c.to_string()).collect::<BTreeSet<_>>().into_iter().collect();
                if labels.len() < 2 {
                    labels.push(format!("not {}", labels[0]));
                }
                let index: BTreeMap<&str, Level> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i as Level)).collect();
                let levels = cells.iter().map(|c| index[c]).collect();
                Ok((Factor::with_labels(name, labels), levels))
            }
        }
    }
}

pub fn read_csv<R: Read>(reader: R, options: &LoadOptions) -> Result<CaseTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers().map_err(|e| IngestError::new(format!("reading header: {e}")))?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(IngestError::new("missing header row"));
    }
    let mut seen = BTreeSet::new();
    for h in &headers {
        if h.is_empty() {
            return Err(IngestError::at(1, h, "empty column name"));
        }
        if !seen.insert(h.as_str()) {
            return Err(IngestError::at(1, h, "duplicate column name"));
        }
    }
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IngestError { line: Some(i + 2), column: None, message: e.to_string() })?;
        if rec.len() != headers.len() {
            return Err(IngestError { line: Some(i + 2), column: None, message: format!("{} fields, header has {}", rec.len(), headers.len()) });
        }
        rows.push(rec);
    }
    if rows.is_empty() {
        return Err(IngestError::new("no data rows"));
    }
    let column = |j: usize| -> Vec<&str> { rows.iter().map(|r| &r[j]).collect() };
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| IngestError::new(format!("no column named `{name}` (have: {})", headers.join(", "))))
    };

    let outcome_idx = match &options.outcome {
        Some(name) => find(name)?,
        None => headers.len() - 1,
    };
    let id_idx = match &options.id_column {
        Some(name) => Some(find(name)?),
        None => headers.iter().position(|h| h.eq_ignore_ascii_case("id")).or_else(|| {
            let first = column(0);
            let distinct = first.iter().collect::<BTreeSet<_>>().len() == first.len();
            let calibrated = options.calibration.columns.contains_key(&headers[0]);
            (outcome_idx != 0 && !calibrated && distinct && !first.iter().any(|c| is_numeric(c))).then_some(0)
        }),
    };
    if id_idx == Some(outcome_idx) {
        return Err(IngestError::at(1, &headers[outcome_idx], "the outcome column cannot also be the id column"));
    }
    for name in options.calibration.columns.keys() {
        find(name)?;
    }

    let ids: Vec<String> = match id_idx {
        Some(j) => {
            let ids: Vec<String> = column(j).into_iter().map(str::to_string).collect();
            let mut seen = BTreeMap::new();
            for (i, id) in ids.iter().enumerate() {
                if id.is_empty() {
                    return Err(IngestError::at(i + 2, &headers[j], "empty case id"));
                }
                if let Some(first) = seen.insert(id.as_str(), i + 2) {
                    return Err(IngestError::at(i + 2, &headers[j], format!("duplicate case id `{id}` (first on line {first})")));
                }
            }
            ids
        }
        None => (1..=rows.len()).map(|i| i.to_string()).collect(),
    };

    let mut factors = Vec::new();
    let mut columns = Vec::new();
    for (j, h) in headers.iter().enumerate() {
        if Some(j) == id_idx || j == outcome_idx {
            continue;
        }
        let (f, v) = calibrate(h, &column(j), options.calibration.get(h))?;
        factors.push(f);
        columns.push(v);
    }
    if factors.is_empty() {
        return Err(IngestError::new("no condition columns"));
    }
    let outcome_name = &headers[outcome_idx];
    let (outcome, outcomes) = calibrate(outcome_name, &column(outcome_idx), options.calibration.get(outcome_name))?;

    let schema = FactorSchema::new(factors, outcome).map_err(|e| IngestError::new(e.to_string()))?;
    let cases = (0..rows.len()).map(|i| Case::new(ids[i].clone(), columns.iter().map(|c| c[i]).collect(), outcomes[i])).collect();
    CaseTable::new(schema, cases).map_err(|e| IngestError::new(e.to_string()))
}

/// Writes `id`, the factors and the outcome, using labels where the schema
/// has them, so reading the output back gives the same levels.
pub fn write_csv<W: Write>(table: &CaseTable, writer: W) -> Result<(), IngestError> {
    let schema = table.schema();
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| IngestError::new(e.to_string());
    let mut header = vec!["id".to_string()];
    header.extend(schema.factors().iter().map(|f| f.name.clone()));
    header.push(schema.outcome().name.clone());
    w.write_record(&header).map_err(io)?;
    for c in table.cases() {
        let mut rec = vec![c.id.clone()];
        rec.extend(c.values.iter().zip(schema.factors()).map(|(&v, f)| f.label(v)));
        rec.push(schema.outcome().label(c.outcome));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| IngestError::new(e.to_string()))
}

#[derive(Serialize)]
struct ColumnMeta<'a> {
    name: &'a str,
    levels: u32,
    /// Label of each level, in level order.
    labels: Vec<String>,
}

#[derive(Serialize)]
struct SchemaMeta<'a> {
    factors: Vec<ColumnMeta<'a>>,
    outcome: ColumnMeta<'a>,
    cases: usize,
}

fn column_meta(f: &Factor) -> ColumnMeta<'_> {
    ColumnMeta { name: &f.name, levels: f.levels, labels: (0..f.levels).map(|l| f.label(l)).collect() }
}

/// The label/level mapping as JSON, for `--emit-schema`.
pub fn schema_json(table: &CaseTable) -> String {
    let schema = table.schema();
    let doc = SchemaMeta { factors: schema.factors().iter().map(column_meta).collect(), outcome: column_meta(schema.outcome()), cases: table.len() };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}
