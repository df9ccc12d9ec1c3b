//! Matrix CSV files and their JSON metadata companions.
//!
//! The matrix file has `N` lines of `M` comma-separated decimals and no
//! header. Values are written with 17 significant digits.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dims, Observation, Support};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix_csv<W: Write>(y: &Observation, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let mut line = String::new();
    for i in 0..y.rows() {
        line.clear();
        for (j, v) in y.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(*v));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headerless numeric CSV and returns `(rows, cols, data)`.
pub fn read_matrix_csv<R: Read>(input: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::Parse(format!(
                    "row {rows} has {} fields, expected {c}",
                    record.len()
                )))
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {field:?} at ({rows}, {j})")))?;
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    Ok((rows, cols, data))
}

/// Key-value description of a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub dims: Dims,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Support>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Free-form provenance (resolved run configuration, tool version).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl MatrixMeta {
    /// Checks dims and support read from a file.
    pub fn validated(mut self) -> Result<Self> {
        self.dims = self.dims.validated()?;
        if let Some(s) = self.support.take() {
            self.support = Some(s.validated(&self.dims)?);
        }
        Ok(self)
    }
}

pub fn save_matrix(y: &Observation, meta: &MatrixMeta, matrix_path: &Path, meta_path: &Path) -> Result<()> {
    write_matrix_csv(y, File::create(matrix_path)?)?;
    let mut f = BufWriter::new(File::create(meta_path)?);
    serde_json::to_writer_pretty(&mut f, meta)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn load_meta(meta_path: &Path) -> Result<MatrixMeta> {
    let meta: MatrixMeta = serde_json::from_reader(BufReader::new(File::open(meta_path)?))?;
    meta.validated()
}

/// Loads a matrix and its metadata, checking that they agree.
pub fn load_matrix(matrix_path: &Path, meta_path: &Path) -> Result<(Observation, MatrixMeta)> {
    let meta = load_meta(meta_path)?;
    let (rows, cols, data) = read_matrix_csv(BufReader::new(File::open(matrix_path)?))?;
    if rows != meta.dims.rows() || cols != meta.dims.cols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix file is {rows}x{cols}, metadata says {}x{}",
            meta.dims.rows(),
            meta.dims.cols()
        )));
    }
    let y = Observation::new(meta.dims, data)?;
    Ok((y, meta))
}
