//! Dataset files: CSV and the `PASM` little-endian binary matrix format.
//!
//! CSV files have no header and one sample per row. Label files hold one
//! integer per line. Binary files are the ASCII magic `PASM`, then `u32` row
//! and column counts, then the values as little-endian `f64` in row-major
//! order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{PasError, Result};
use crate::matrix::FeatureMatrix;
use crate::model::SourceLabels;

pub const BINARY_MAGIC: &[u8; 4] = b"PASM";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFormat {
    Csv,
    Binary,
}

impl FeatureFormat {
    /// Binary when the bytes start with the `PASM` magic, CSV otherwise.
    pub fn sniff(bytes: &[u8]) -> Self {
        if bytes.starts_with(BINARY_MAGIC) {
            FeatureFormat::Binary
        } else {
            FeatureFormat::Csv
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: FeatureMatrix,
    pub labels: SourceLabels,
}

impl LabeledDataset {
    pub fn new(features: FeatureMatrix, labels: SourceLabels) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(PasError::dims(features.nrows(), labels.len()));
        }
        Ok(Self { features, labels })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledDataset {
    pub features: FeatureMatrix,
    /// Ground truth, for evaluation only.
    pub true_labels: Option<Vec<usize>>,
}

impl UnlabeledDataset {
    pub fn new(features: FeatureMatrix, true_labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(t) = &true_labels {
            if t.len() != features.nrows() {
                return Err(PasError::dims(features.nrows(), t.len()));
            }
        }
        Ok(Self {
            features,
            true_labels,
        })
    }
}

/// Sorted distinct raw label values; position is the contiguous class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    pub values: Vec<i64>,
}

impl LabelMapping {
    pub fn from_raw(raw: &[i64]) -> Self {
        let mut values = raw.to_vec();
        values.sort_unstable();
        values.dedup();
        Self { values }
    }

    pub fn index_of(&self, raw: i64) -> Option<usize> {
        self.values.binary_search(&raw).ok()
    }

    /// Maps raw labels to class indices; labels outside the mapping are a `Range` error.
    pub fn encode(&self, raw: &[i64]) -> Result<Vec<usize>> {
        raw.iter()
            .map(|&r| {
                self.index_of(r)
                    .ok_or_else(|| PasError::Range(format!("label {r} not present in the source")))
            })
            .collect()
    }

    pub fn decode(&self, index: usize) -> i64 {
        self.values[index]
    }
}

pub fn parse_csv_features(text: &str) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| PasError::Parse(e.to_string()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let width = *cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(PasError::Parse(format!(
                "row {} has {} fields, expected {width}",
                line + 1,
                record.len()
            )));
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| {
                PasError::Parse(format!(
                    "row {}: cannot parse {field:?} as a number",
                    line + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(PasError::NonFinite);
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| PasError::Parse("no rows".into()))?;
    FeatureMatrix::from_row_major(rows, cols, values)
}

pub fn parse_binary_features(bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < 12 || !bytes.starts_with(BINARY_MAGIC) {
        return Err(PasError::Parse("missing PASM header".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != n * d * 8 {
        return Err(PasError::Parse(format!(
            "expected {} payload bytes for {n}x{d}, found {}",
            n * d * 8,
            body.len()
        )));
    }
    if n == 0 || d == 0 {
        return Err(PasError::Parse("empty matrix".into()));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::from_row_major(n, d, values)
}

pub fn encode_binary(x: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * x.as_slice().len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(x.nrows() as u32).to_le_bytes());
    out.extend_from_slice(&(x.ncols() as u32).to_le_bytes());
    for v in x.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Shortest round-trip decimal text, one row per line.
pub fn encode_csv(x: &FeatureMatrix) -> String {
    let mut out = String::new();
    for row in x.rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn load_features(path: &Path, format: Option<FeatureFormat>) -> Result<FeatureMatrix> {
    let bytes = fs::read(path)?;
    match format.unwrap_or_else(|| FeatureFormat::sniff(&bytes)) {
        FeatureFormat::Binary => parse_binary_features(&bytes),
        FeatureFormat::Csv => {
            let text = String::from_utf8(bytes)
                .map_err(|_| PasError::Parse(format!("{} is not UTF-8 text", path.display())))?;
            parse_csv_features(&text)
        }
    }
}

pub fn save_features(path: &Path, x: &FeatureMatrix, format: FeatureFormat) -> Result<()> {
    let bytes = match format {
        FeatureFormat::Binary => encode_binary(x),
        FeatureFormat::Csv => encode_csv(x).into_bytes(),
    };
    fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}

/// Raw integer labels, one per nonblank line. Negative labels are rejected.
pub fn parse_raw_labels(text: &str) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            // Blank lines in the middle of the file would silently shift labels.
            if text.lines().skip(i + 1).any(|l| !l.trim().is_empty()) {
                return Err(PasError::Range(format!("missing label on line {}", i + 1)));
            }
            continue;
        }
        let v: i64 = field
            .parse()
            .map_err(|_| PasError::Parse(format!("line {}: bad label {field:?}", i + 1)))?;
        if v < 0 {
            return Err(PasError::Range(format!(
                "line {}: negative label {v}",
                i + 1
            )));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn load_raw_labels(path: &Path) -> Result<Vec<i64>> {
    parse_raw_labels(&fs::read_to_string(path)?)
}

pub fn encode_labels<T: std::fmt::Display>(labels: &[T]) -> String {
    labels.iter().map(|l| format!("{l}\n")).collect()
}

/// Features plus labels remapped to contiguous class indices.
pub fn load_labeled(features: &Path, labels: &Path) -> Result<(LabeledDataset, LabelMapping)> {
    let x = load_features(features, None)?;
    let raw = load_raw_labels(labels)?;
    if raw.len() != x.nrows() {
        return Err(PasError::Range(format!(
            "{} labels for {} feature rows",
            raw.len(),
            x.nrows()
        )));
    }
    let mapping = LabelMapping::from_raw(&raw);
    let encoded = mapping.encode(&raw)?;
    let labels = SourceLabels::new(encoded, mapping.values.len())?;
    Ok((LabeledDataset::new(x, labels)?, mapping))
}
