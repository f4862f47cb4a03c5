//! Segment panels, feature matrices and the year-wise split.
//!
//! A [`SegmentPanel`] is long format: one [`SegmentRecord`] per
//! segment-year. [`build_features`] turns it into three period matrices
//! (training, validation, testing) in which only the response and the AADT
//! column vary; every other covariate is the segment's fixed attribute.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;

/// Segments shorter than this many miles are rejected.
pub const MIN_SEGMENT_LENGTH_MILES: f64 = 0.1;

/// One segment-year observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment_id: String,
    pub year: i32,
    pub crashes: u32,
    pub aadt_thousands: f64,
    pub length_miles: f64,
    pub drv_major_com: f64,
    pub drv_minor_com: f64,
    pub drv_major_ind: f64,
    pub drv_minor_ind: f64,
    pub offset_ft: f64,
}

/// The covariates carried by a [`SegmentRecord`], in design-matrix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    AadtThousands,
    LengthMiles,
    DrvMajorCom,
    DrvMinorCom,
    DrvMajorInd,
    DrvMinorInd,
    OffsetFt,
}

impl Covariate {
    pub const ALL: [Covariate; 7] = [
        Covariate::AadtThousands,
        Covariate::LengthMiles,
        Covariate::DrvMajorCom,
        Covariate::DrvMinorCom,
        Covariate::DrvMajorInd,
        Covariate::DrvMinorInd,
        Covariate::OffsetFt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Covariate::AadtThousands => "aadt_thousands",
            Covariate::LengthMiles => "length_miles",
            Covariate::DrvMajorCom => "drv_major_com",
            Covariate::DrvMinorCom => "drv_minor_com",
            Covariate::DrvMajorInd => "drv_major_ind",
            Covariate::DrvMinorInd => "drv_minor_ind",
            Covariate::OffsetFt => "offset_ft",
        }
    }

    pub fn from_name(name: &str) -> Option<Covariate> {
        Covariate::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn value(self, r: &SegmentRecord) -> f64 {
        match self {
            Covariate::AadtThousands => r.aadt_thousands,
            Covariate::LengthMiles => r.length_miles,
            Covariate::DrvMajorCom => r.drv_major_com,
            Covariate::DrvMinorCom => r.drv_minor_com,
            Covariate::DrvMajorInd => r.drv_major_ind,
            Covariate::DrvMinorInd => r.drv_minor_ind,
            Covariate::OffsetFt => r.offset_ft,
        }
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What is wrong with one input row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RowProblem {
    ShortSegment { length_miles: f64 },
    NonPositiveAadt { aadt_thousands: f64 },
    NegativeCovariate { column: String, value: f64 },
    NonFinite { column: String },
    DuplicateKey,
}

/// A rejected row, numbered from 1 in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowIssue {
    pub row: usize,
    pub segment_id: String,
    pub year: i32,
    pub problem: RowProblem,
}

impl fmt::Display for RowIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {} ({}, {}): ", self.row, self.segment_id, self.year)?;
        match &self.problem {
            RowProblem::ShortSegment { length_miles } => write!(
                f,
                "length_miles {length_miles} is below the {MIN_SEGMENT_LENGTH_MILES}-mile minimum segment length"
            ),
            RowProblem::NonPositiveAadt { aadt_thousands } => {
                write!(f, "aadt_thousands {aadt_thousands} must be positive")
            }
            RowProblem::NegativeCovariate { column, value } => {
                write!(f, "{column} {value} must be non-negative")
            }
            RowProblem::NonFinite { column } => write!(f, "{column} is not finite"),
            RowProblem::DuplicateKey => f.write_str("duplicate (segment_id, year) key"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("{} invalid row(s): {}", .0.len(), first_issue(.0))]
    InvalidRows(Vec<RowIssue>),
    #[error("panel is empty")]
    EmptyPanel,
    #[error("year {0} is absent from the panel")]
    YearAbsent(i32),
    #[error("segment {segment} has no record for year {year}")]
    IncompleteSegment { segment: String, year: i32 },
    #[error("split year sets must be non-empty and pairwise disjoint")]
    InvalidSplit,
    #[error("cannot log-transform {column} = {value} for segment {segment}: value must be positive")]
    NonPositiveLog {
        column: String,
        segment: String,
        value: f64,
    },
    #[error("non-finite entry in column {0}")]
    NonFinite(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("column mismatch: expected {expected:?}, found {found:?}")]
    ColumnMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
}

fn first_issue(issues: &[RowIssue]) -> String {
    issues.first().map(|i| i.to_string()).unwrap_or_default()
}

/// Strict aborts on the first invalid row; lenient drops invalid rows and
/// reports them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMode {
    #[default]
    Strict,
    Lenient,
}

/// A validated long-format panel, sorted by `(segment_id, year)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPanel {
    records: Vec<SegmentRecord>,
}

impl SegmentPanel {
    /// Validate `records`. In strict mode any invalid row is an error; in
    /// lenient mode invalid rows are dropped and returned alongside the panel.
    pub fn from_records(
        records: Vec<SegmentRecord>,
        mode: ValidationMode,
    ) -> Result<(SegmentPanel, Vec<RowIssue>), DatasetError> {
        let mut issues = Vec::new();
        let mut seen = BTreeSet::new();
        let mut kept = Vec::with_capacity(records.len());
        for (i, r) in records.into_iter().enumerate() {
            let issue = |problem| RowIssue {
                row: i + 1,
                segment_id: r.segment_id.clone(),
                year: r.year,
                problem,
            };
            if let Some(problem) = record_problem(&r) {
                issues.push(issue(problem));
                continue;
            }
            if !seen.insert((r.segment_id.clone(), r.year)) {
                issues.push(issue(RowProblem::DuplicateKey));
                continue;
            }
            kept.push(r);
        }
        if !issues.is_empty() && mode == ValidationMode::Strict {
            return Err(DatasetError::InvalidRows(issues));
        }
        if kept.is_empty() {
            return Err(DatasetError::EmptyPanel);
        }
        kept.sort_by(|a, b| (&a.segment_id, a.year).cmp(&(&b.segment_id, b.year)));
        Ok((SegmentPanel { records: kept }, issues))
    }

    pub fn records(&self) -> &[SegmentRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn years(&self) -> Vec<i32> {
        let set: BTreeSet<i32> = self.records.iter().map(|r| r.year).collect();
        set.into_iter().collect()
    }

    pub fn segment_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for r in &self.records {
            if ids.last() != Some(&r.segment_id) {
                ids.push(r.segment_id.clone());
            }
        }
        ids
    }

    /// A copy of the panel with `f` applied to every record. The result is
    /// re-validated strictly.
    pub fn map_records<F>(&self, f: F) -> Result<SegmentPanel, DatasetError>
    where
        F: FnMut(&mut SegmentRecord),
    {
        let mut records = self.records.clone();
        records.iter_mut().for_each(f);
        SegmentPanel::from_records(records, ValidationMode::Strict).map(|(p, _)| p)
    }
}

fn record_problem(r: &SegmentRecord) -> Option<RowProblem> {
    for c in Covariate::ALL {
        if !c.value(r).is_finite() {
            return Some(RowProblem::NonFinite {
                column: c.name().to_string(),
            });
        }
    }
    if r.length_miles < MIN_SEGMENT_LENGTH_MILES {
        return Some(RowProblem::ShortSegment {
            length_miles: r.length_miles,
        });
    }
    if r.aadt_thousands <= 0.0 {
        return Some(RowProblem::NonPositiveAadt {
            aadt_thousands: r.aadt_thousands,
        });
    }
    for c in &Covariate::ALL[2..] {
        let v = c.value(r);
        if v < 0.0 {
            return Some(RowProblem::NegativeCovariate {
                column: c.name().to_string(),
                value: v,
            });
        }
    }
    None
}

/// Dense row-major design matrix with a response vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    column_names: Vec<String>,
    n_rows: usize,
    data: Vec<f64>,
    response: Vec<f64>,
    /// Columns stored as natural logs of the raw covariate.
    log_columns: Vec<String>,
    row_ids: Vec<String>,
}

impl FeatureMatrix {
    /// Build from row vectors. Every entry and response value must be finite.
    pub fn from_rows(
        column_names: Vec<String>,
        rows: &[Vec<f64>],
        response: Vec<f64>,
    ) -> Result<FeatureMatrix, DatasetError> {
        let p = column_names.len();
        let mut data = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(DatasetError::Shape(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        FeatureMatrix::from_flat(column_names, data, response)
    }

    /// Build from a row-major buffer of `response.len() × column_names.len()`.
    pub fn from_flat(
        column_names: Vec<String>,
        data: Vec<f64>,
        response: Vec<f64>,
    ) -> Result<FeatureMatrix, DatasetError> {
        let n = response.len();
        let p = column_names.len();
        if data.len() != n * p {
            return Err(DatasetError::Shape(format!(
                "{} entries for {n} rows × {p} columns",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::NonFinite(column_names[k % p].clone()));
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(DatasetError::NonFinite("response".to_string()));
        }
        let row_ids = (0..n).map(|i| format!("{i}")).collect();
        Ok(FeatureMatrix {
            column_names,
            n_rows: n,
            data,
            response,
            log_columns: Vec::new(),
            row_ids,
        })
    }

    pub fn with_log_columns(mut self, log_columns: Vec<String>) -> Self {
        self.log_columns = log_columns;
        self
    }

    pub fn with_row_ids(mut self, row_ids: Vec<String>) -> Result<Self, DatasetError> {
        if row_ids.len() != self.n_rows {
            return Err(DatasetError::Shape(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                self.n_rows
            )));
        }
        self.row_ids = row_ids;
        Ok(self)
    }

    /// Same covariates, different response.
    pub fn with_response(&self, response: Vec<f64>) -> Result<FeatureMatrix, DatasetError> {
        if response.len() != self.n_rows {
            return Err(DatasetError::Shape(format!(
                "response length {} differs from row count {}",
                response.len(),
                self.n_rows
            )));
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(DatasetError::NonFinite("response".to_string()));
        }
        let mut out = self.clone();
        out.response = response;
        Ok(out)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn log_columns(&self) -> &[String] {
        &self.log_columns
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.data[i * p..(i + 1) * p]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let p = self.n_cols();
        self.data[i * p + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Rows at `indices` (duplicates allowed), in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let p = self.n_cols();
        let mut data = Vec::with_capacity(indices.len() * p);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            column_names: self.column_names.clone(),
            n_rows: indices.len(),
            data,
            response: indices.iter().map(|&i| self.response[i]).collect(),
            log_columns: self.log_columns.clone(),
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }

    /// Error unless `expected` names exactly this matrix's columns, in order.
    pub fn check_columns(&self, expected: &[String]) -> Result<(), DatasetError> {
        if self.column_names.as_slice() == expected {
            Ok(())
        } else {
            Err(DatasetError::ColumnMismatch {
                expected: expected.to_vec(),
                found: self.column_names.clone(),
            })
        }
    }
}

/// How per-year crash counts in a multi-year period become one response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    MeanPerYear,
    Sum,
}

/// Year-wise split into training, validation and testing periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_years: Vec<i32>,
    pub validation_years: Vec<i32>,
    pub test_years: Vec<i32>,
    #[serde(default)]
    pub train_aggregation: Aggregation,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_years: alloc::vec![2013, 2014, 2015],
            validation_years: alloc::vec![2016],
            test_years: alloc::vec![2017],
            train_aggregation: Aggregation::MeanPerYear,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let sets = [&self.train_years, &self.validation_years, &self.test_years];
        if sets.iter().any(|s| s.is_empty()) {
            return Err(DatasetError::InvalidSplit);
        }
        let mut all = BTreeSet::new();
        for s in sets {
            let distinct: BTreeSet<i32> = s.iter().copied().collect();
            for y in distinct {
                if !all.insert(y) {
                    return Err(DatasetError::InvalidSplit);
                }
            }
        }
        Ok(())
    }
}

/// The three period matrices of a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMatrices {
    pub train: FeatureMatrix,
    pub validation: FeatureMatrix,
    pub test: FeatureMatrix,
}

/// Build training, validation and testing matrices.
///
/// Rows are segments in `segment_id` order. The response is the period's
/// crashes aggregated by `split.train_aggregation`; AADT is the mean AADT over
/// the period's years; every other covariate comes from the segment's first
/// training-year record and is therefore identical across the three matrices.
/// Columns listed in `log_cols` are stored as natural logs.
pub fn build_features(
    panel: &SegmentPanel,
    split: &SplitSpec,
    log_cols: &[Covariate],
) -> Result<SplitMatrices, DatasetError> {
    split.validate()?;
    let years = panel.years();
    for y in split
        .train_years
        .iter()
        .chain(&split.validation_years)
        .chain(&split.test_years)
    {
        if !years.contains(y) {
            return Err(DatasetError::YearAbsent(*y));
        }
    }
    let by_segment = group_by_segment(panel);
    let anchor_year = *split.train_years.iter().min().expect("validated non-empty");
    let period = |ys: &[i32]| {
        period_matrix(&by_segment, ys, anchor_year, split.train_aggregation, log_cols)
    };
    Ok(SplitMatrices {
        train: period(&split.train_years)?,
        validation: period(&split.validation_years)?,
        test: period(&split.test_years)?,
    })
}

/// A single-period matrix (e.g. for fitting on one year of data). Fixed
/// covariates come from the earliest year in `years`.
pub fn period_features(
    panel: &SegmentPanel,
    years: &[i32],
    aggregation: Aggregation,
    log_cols: &[Covariate],
) -> Result<FeatureMatrix, DatasetError> {
    let present = panel.years();
    let anchor = *years.iter().min().ok_or(DatasetError::InvalidSplit)?;
    for y in years {
        if !present.contains(y) {
            return Err(DatasetError::YearAbsent(*y));
        }
    }
    period_matrix(&group_by_segment(panel), years, anchor, aggregation, log_cols)
}

fn group_by_segment(panel: &SegmentPanel) -> BTreeMap<&str, BTreeMap<i32, &SegmentRecord>> {
    let mut by_segment: BTreeMap<&str, BTreeMap<i32, &SegmentRecord>> = BTreeMap::new();
    for r in panel.records() {
        by_segment
            .entry(r.segment_id.as_str())
            .or_default()
            .insert(r.year, r);
    }
    by_segment
}

fn period_matrix(
    by_segment: &BTreeMap<&str, BTreeMap<i32, &SegmentRecord>>,
    years: &[i32],
    anchor_year: i32,
    aggregation: Aggregation,
    log_cols: &[Covariate],
) -> Result<FeatureMatrix, DatasetError> {
    let names: Vec<String> = Covariate::ALL.iter().map(|c| c.name().to_string()).collect();
    let mut data = Vec::with_capacity(by_segment.len() * names.len());
    let mut response = Vec::with_capacity(by_segment.len());
    let mut ids = Vec::with_capacity(by_segment.len());
    for (segment, recs) in by_segment {
        let lookup = |year: i32| {
            recs.get(&year).copied().ok_or_else(|| DatasetError::IncompleteSegment {
                segment: segment.to_string(),
                year,
            })
        };
        let anchor = lookup(anchor_year)?;
        let period: Vec<&SegmentRecord> =
            years.iter().map(|&y| lookup(y)).collect::<Result<_, _>>()?;
        let crashes: Vec<f64> = period.iter().map(|r| f64::from(r.crashes)).collect();
        let aadt: Vec<f64> = period.iter().map(|r| r.aadt_thousands).collect();
        response.push(match aggregation {
            Aggregation::MeanPerYear => math::mean(&crashes),
            Aggregation::Sum => math::fsum(crashes.iter().copied()),
        });
        for c in Covariate::ALL {
            let raw = match c {
                Covariate::AadtThousands => math::mean(&aadt),
                _ => c.value(anchor),
            };
            let v = if log_cols.contains(&c) {
                if raw <= 0.0 {
                    return Err(DatasetError::NonPositiveLog {
                        column: c.name().to_string(),
                        segment: segment.to_string(),
                        value: raw,
                    });
                }
                math::ln(raw)
            } else {
                raw
            };
            data.push(v);
        }
        ids.push(segment.to_string());
    }
    let log_names = Covariate::ALL
        .iter()
        .filter(|c| log_cols.contains(c))
        .map(|c| c.name().to_string())
        .collect();
    FeatureMatrix::from_flat(names, data, response)?
        .with_log_columns(log_names)
        .with_row_ids(ids)
}

/// Descriptive statistics of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl ColumnSummary {
    pub fn of(name: &str, values: &[f64]) -> ColumnSummary {
        let (min, max) = math::min_max(values);
        ColumnSummary {
            name: name.to_string(),
            n: values.len(),
            mean: math::mean(values),
            sd: math::sample_sd(values),
            min,
            max,
        }
    }
}

/// Per-column summaries of a panel: crashes followed by every covariate.
pub fn describe(panel: &SegmentPanel) -> Vec<ColumnSummary> {
    let crashes: Vec<f64> = panel.records().iter().map(|r| f64::from(r.crashes)).collect();
    let mut out = alloc::vec![ColumnSummary::of("crashes", &crashes)];
    for c in Covariate::ALL {
        let v: Vec<f64> = panel.records().iter().map(|r| c.value(r)).collect();
        out.push(ColumnSummary::of(c.name(), &v));
    }
    out
}

/// Per-column summaries of a matrix: the response followed by each column.
pub fn describe_matrix(x: &FeatureMatrix) -> Vec<ColumnSummary> {
    let mut out = alloc::vec![ColumnSummary::of("response", x.response())];
    for (j, name) in x.column_names().iter().enumerate() {
        out.push(ColumnSummary::of(name, &x.column(j)));
    }
    out
}
