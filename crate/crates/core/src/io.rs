//! CSV schemas for observations, belief kernels and exported curves.
//!
//! Numbers are written with 17 significant digits (`inf` for infinite
//! hidden times) so that a write/read cycle is bit-faithful.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::{BeliefKernel, KernelKind};
use crate::sample::Observation;

pub const OBSERVATION_HEADER: [&str; 7] = ["id", "w", "delta", "eta", "x_true", "y_true", "c_true"];
pub const KERNEL_HEADER: [&str; 4] = ["id", "kind", "p1", "p2"];
pub const CURVE_HEADER: [&str; 2] = ["t", "estimate"];

/// Observations together with their identifiers, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationTable {
    pub ids: Vec<String>,
    pub observations: Vec<Observation>,
}

impl ObservationTable {
    /// Numbers the observations `1..=n`.
    pub fn numbered(observations: Vec<Observation>) -> Self {
        let ids = (1..=observations.len()).map(|i| i.to_string()).collect();
        Self { ids, observations }
    }

    pub fn has_column(&self, f: impl Fn(&Observation) -> bool) -> bool {
        self.observations.iter().any(f)
    }
}

pub fn format_number(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn format_optional(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn cell_error(row: usize, column: &str, reason: impl std::fmt::Display) -> Error {
    Error::Validation(format!("row {row}, column {column}: {reason}"))
}

fn parse_number(raw: &str, row: usize, column: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| cell_error(row, column, format!("cannot parse {raw:?} as a number")))?;
    if v.is_nan() {
        return Err(cell_error(row, column, "NaN is not allowed"));
    }
    Ok(v)
}

fn parse_optional(raw: Option<&str>, row: usize, column: &str) -> Result<Option<f64>> {
    match raw.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => parse_number(s, row, column).map(Some),
    }
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord, required: &[&str]) -> Result<Self> {
        let index: HashMap<String, usize> =
            headers.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect();
        for col in required {
            if !index.contains_key(*col) {
                return Err(Error::Validation(format!("missing required column {col:?} in header")));
            }
        }
        Ok(Self { index })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, column: &str) -> Option<&'r str> {
        self.index.get(column).and_then(|&i| record.get(i))
    }

    fn required<'r>(&self, record: &'r csv::StringRecord, column: &str, row: usize) -> Result<&'r str> {
        match self.get(record, column).map(str::trim) {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(cell_error(row, column, "value is required")),
        }
    }
}

pub fn write_observations<W: Write>(out: W, table: &ObservationTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OBSERVATION_HEADER)?;
    for (id, o) in table.ids.iter().zip(&table.observations) {
        w.write_record([
            id.clone(),
            format_number(o.w),
            (o.delta as u8).to_string(),
            format_optional(o.eta),
            format_optional(o.x_true),
            format_optional(o.y_true),
            format_optional(o.c_true),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads and validates an observation CSV. Only `id`, `w` and `delta` are
/// required; the remaining columns may be absent or left empty.
pub fn read_observations<R: Read>(input: R) -> Result<ObservationTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let cols = Columns::new(reader.headers()?, &["id", "w", "delta"])?;
    let mut ids = Vec::new();
    let mut observations = Vec::new();
    let mut seen = HashMap::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        let id = cols.required(&record, "id", row)?.to_string();
        if let Some(prev) = seen.insert(id.clone(), row) {
            return Err(cell_error(row, "id", format!("duplicate id {id:?} (first seen in row {prev})")));
        }
        let w = parse_number(cols.required(&record, "w", row)?, row, "w")?;
        let delta = match cols.required(&record, "delta", row)? {
            "1" => true,
            "0" => false,
            other => return Err(cell_error(row, "delta", format!("expected 0 or 1, got {other:?}"))),
        };
        let o = Observation {
            w,
            delta,
            eta: parse_optional(cols.get(&record, "eta"), row, "eta")?,
            x_true: parse_optional(cols.get(&record, "x_true"), row, "x_true")?,
            y_true: parse_optional(cols.get(&record, "y_true"), row, "y_true")?,
            c_true: parse_optional(cols.get(&record, "c_true"), row, "c_true")?,
        };
        o.validate(row).map_err(|e| match e {
            Error::InvalidObservation { reason, .. } => Error::Validation(format!("row {row}: {reason}")),
            other => other,
        })?;
        ids.push(id);
        observations.push(o);
    }
    if observations.is_empty() {
        return Err(Error::Validation("observation file has no rows".into()));
    }
    Ok(ObservationTable { ids, observations })
}

/// Writes one row per kernel; open claims have none.
pub fn write_kernels<W: Write>(out: W, ids: &[String], beliefs: &[Option<BeliefKernel>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(KERNEL_HEADER)?;
    for (id, k) in ids.iter().zip(beliefs) {
        if let Some(k) = k {
            let (p1, p2) = k.params();
            w.write_record([id.as_str(), k.kind().as_str(), &format_number(p1), &format_optional(p2)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a kernel CSV and aligns it with `table`: the kernel for an
/// observation is supported on `[w, ∞)`.
pub fn read_kernels<R: Read>(input: R, table: &ObservationTable) -> Result<Vec<Option<BeliefKernel>>> {
    let position: HashMap<&str, usize> = table.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let cols = Columns::new(reader.headers()?, &KERNEL_HEADER[..3])?;
    let mut kernels: Vec<Option<BeliefKernel>> = vec![None; table.observations.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        let id = cols.required(&record, "id", row)?;
        let &i = position
            .get(id)
            .ok_or_else(|| cell_error(row, "id", format!("no observation with id {id:?}")))?;
        if kernels[i].is_some() {
            return Err(cell_error(row, "id", format!("second kernel for id {id:?}")));
        }
        let kind: KernelKind = cols
            .required(&record, "kind", row)?
            .parse()
            .map_err(|e: Error| cell_error(row, "kind", e))?;
        let p1 = parse_number(cols.required(&record, "p1", row)?, row, "p1")?;
        let p2 = parse_optional(cols.get(&record, "p2"), row, "p2")?;
        let o = &table.observations[i];
        if !o.delta {
            return Err(cell_error(row, "id", format!("observation {id:?} is open and cannot carry a kernel")));
        }
        kernels[i] = Some(BeliefKernel::from_params(kind, o.w, p1, p2).map_err(|e| Error::Validation(format!("row {row}: {e}")))?);
    }
    Ok(kernels)
}

pub fn write_curve<W: Write>(out: W, grid: &[f64], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for (t, v) in grid.iter().zip(values) {
        w.write_record([format_number(*t), format_number(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
