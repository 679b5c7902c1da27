//! Series files and tabular output.
//!
//! Series are CSV with header `time,value`, or JSON lines
//! `{"time":..,"value":..}` when the file name ends in `.jsonl` or `.json`.
//! Every table can be written either as CSV or as JSON lines with the same
//! columns.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use lamperti_core::aam::LogLogPlot;
use lamperti_core::TimeSeries;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_nan() => String::new(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> String {
        let v = match self {
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
            Cell::Int(i) => serde_json::Value::from(*i),
            Cell::Float(x) => {
                serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into)
            }
            Cell::Bool(b) => serde_json::Value::from(*b),
            Cell::Empty => serde_json::Value::Null,
        };
        v.to_string()
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::to_csv))?;
                }
                w.flush()
            }
            Format::Json => {
                let mut out = out;
                for row in &self.rows {
                    let fields: Vec<String> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| format!("{}:{}", serde_json::Value::from(*c), v.to_json()))
                        .collect();
                    writeln!(out, "{{{}}}", fields.join(","))?;
                }
                out.flush()
            }
        }
    }

    pub fn write_file(&self, path: &Path, format: Format) -> Result<()> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        self.write(BufWriter::new(file), format)
            .map_err(|e| CliError::io(path, e))
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>, format: Format) -> Result<()> {
        match path {
            Some(p) => self.write_file(p, format),
            None => self
                .write(std::io::stdout().lock(), format)
                .map_err(|e| CliError::io("<stdout>", e)),
        }
    }
}

/// `dir/stem.ext` with the extension of `format`.
pub fn output_path(dir: &Path, stem: &str, format: Format) -> PathBuf {
    dir.join(format!("{stem}.{}", format.extension()))
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesRow {
    time: f64,
    value: f64,
}

pub fn series_table(series: &TimeSeries) -> Table {
    let mut t = Table::new(&["time", "value"]);
    for (&time, &value) in series.times().iter().zip(series.values()) {
        t.push(vec![time.into(), value.into()]);
    }
    t
}

pub fn loglog_table(plot: &LogLogPlot) -> Table {
    let mut t = Table::new(&["ln_tau", "ln_moment", "total_weight"]);
    for i in 0..plot.len() {
        t.push(vec![
            plot.ln_tau[i].into(),
            plot.ln_moment[i].into(),
            plot.total_weight[i].into(),
        ]);
    }
    t
}

fn is_json_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "json")
    )
}

/// Reads a series file; errors name the offending row (the header is row 1
/// for CSV).
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let parse = |row: u64, message: String| CliError::Parse {
        path: path.to_owned(),
        row,
        message,
    };
    let mut rows = Vec::new();
    if is_json_path(path) {
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| CliError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: SeriesRow =
                serde_json::from_str(&line).map_err(|e| parse(i as u64 + 1, e.to_string()))?;
            rows.push((i as u64 + 1, r));
        }
    } else {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(file);
        let headers = reader
            .headers()
            .map_err(|e| parse(1, e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "time" || &headers[1] != "value" {
            return Err(parse(
                1,
                format!(
                    "expected header `time,value`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        for (i, record) in reader.deserialize::<SeriesRow>().enumerate() {
            let row = i as u64 + 2;
            let r = record.map_err(|e| parse(row, csv_message(&e)))?;
            rows.push((row, r));
        }
    }
    let mut times = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (row, r) in rows {
        if !r.time.is_finite() || !r.value.is_finite() {
            return Err(parse(row, "non-finite number".into()));
        }
        if let Some(&last) = times.last() {
            if r.time <= last {
                return Err(parse(
                    row,
                    format!("time {} does not increase (previous {last})", r.time),
                ));
            }
        }
        times.push(r.time);
        values.push(r.value);
    }
    if times.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no observations",
            path.display()
        )));
    }
    Ok(TimeSeries::from_vecs(times, values)?)
}

fn csv_message(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(0) => format!("bad `time` field: {}", err.kind()),
            Some(1) => format!("bad `value` field: {}", err.kind()),
            _ => err.kind().to_string(),
        },
        csv::ErrorKind::UnequalLengths { len, .. } => format!("expected 2 fields, found {len}"),
        _ => e.to_string(),
    }
}
