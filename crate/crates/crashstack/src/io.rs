//! Panel CSV and JSON model files.

use std::fs;
use std::path::Path;

use crashstack_core::dataset::{
    Covariate, DatasetError, RowIssue, SegmentPanel, SegmentRecord, ValidationMode,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing column {column:?} (mapped from {field})")]
    MissingColumn { path: String, field: &'static str, column: String },
    #[error("{path}: row {row}, column {column:?}: cannot parse {value:?} as {expected}")]
    BadCell {
        path: String,
        row: usize,
        column: String,
        value: String,
        expected: &'static str,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Dataset {
        path: String,
        #[source]
        source: DatasetError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv { path: path.display().to_string(), source }
}

/// Header names in the CSV for each panel field. Defaults to the field names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PanelSchema {
    pub segment_id: String,
    pub year: String,
    pub crashes: String,
    pub aadt_thousands: String,
    pub length_miles: String,
    pub drv_major_com: String,
    pub drv_minor_com: String,
    pub drv_major_ind: String,
    pub drv_minor_ind: String,
    pub offset_ft: String,
}

impl Default for PanelSchema {
    fn default() -> Self {
        PanelSchema {
            segment_id: "segment_id".into(),
            year: "year".into(),
            crashes: "crashes".into(),
            aadt_thousands: "aadt_thousands".into(),
            length_miles: "length_miles".into(),
            drv_major_com: "drv_major_com".into(),
            drv_minor_com: "drv_minor_com".into(),
            drv_major_ind: "drv_major_ind".into(),
            drv_minor_ind: "drv_minor_ind".into(),
            offset_ft: "offset_ft".into(),
        }
    }
}

impl PanelSchema {
    fn fields(&self) -> [(&'static str, &str); 10] {
        [
            ("segment_id", &self.segment_id),
            ("year", &self.year),
            ("crashes", &self.crashes),
            ("aadt_thousands", &self.aadt_thousands),
            ("length_miles", &self.length_miles),
            ("drv_major_com", &self.drv_major_com),
            ("drv_minor_com", &self.drv_minor_com),
            ("drv_major_ind", &self.drv_major_ind),
            ("drv_minor_ind", &self.drv_minor_ind),
            ("offset_ft", &self.offset_ft),
        ]
    }
}

/// Read a long-format panel (one row per segment-year). Rows are numbered
/// from 1 after the header in every diagnostic. In lenient mode rows that
/// break a panel invariant are dropped and returned; malformed cells are
/// always an error.
pub fn load_panel(
    path: &Path,
    schema: &PanelSchema,
    mode: ValidationMode,
) -> Result<(SegmentPanel, Vec<RowIssue>), IoError> {
    let shown = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let mut idx = [0usize; 10];
    for (k, (field, column)) in schema.fields().into_iter().enumerate() {
        idx[k] = headers.iter().position(|h| h == column).ok_or_else(|| IoError::MissingColumn {
            path: shown.clone(),
            field,
            column: column.to_string(),
        })?;
    }
    let names = schema.fields();
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_err(path))?;
        let line = i + 1;
        let cell = |k: usize| row.get(idx[k]).unwrap_or("");
        let bad = |k: usize, expected: &'static str| IoError::BadCell {
            path: shown.clone(),
            row: line,
            column: names[k].1.to_string(),
            value: cell(k).to_string(),
            expected,
        };
        let num = |k: usize| cell(k).parse::<f64>().map_err(|_| bad(k, "a number"));
        let segment_id = cell(0).to_string();
        if segment_id.is_empty() {
            return Err(bad(0, "a non-empty id"));
        }
        records.push(SegmentRecord {
            segment_id,
            year: cell(1).parse().map_err(|_| bad(1, "an integer year"))?,
            crashes: cell(2).parse().map_err(|_| bad(2, "a non-negative integer count"))?,
            aadt_thousands: num(3)?,
            length_miles: num(4)?,
            drv_major_com: num(5)?,
            drv_minor_com: num(6)?,
            drv_major_ind: num(7)?,
            drv_minor_ind: num(8)?,
            offset_ft: num(9)?,
        });
    }
    SegmentPanel::from_records(records, mode).map_err(|source| IoError::Dataset { path: shown, source })
}

/// Write a panel with the default schema. Floats use the shortest
/// representation that reads back to the same bits.
pub fn write_panel(path: &Path, panel: &SegmentPanel) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let schema = PanelSchema::default();
    w.write_record(schema.fields().iter().map(|(_, c)| *c)).map_err(csv_err(path))?;
    for r in panel.records() {
        let mut row = vec![r.segment_id.clone(), r.year.to_string(), r.crashes.to_string()];
        row.extend(Covariate::ALL.iter().map(|c| c.value(r).to_string()));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory serialization");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_text(path, &to_json(value))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(io_err(path))
}

/// Write rows of pre-formatted cells under `header`.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn create_dir(path: &Path) -> Result<(), IoError> {
    fs::create_dir_all(path).map_err(io_err(path))
}
