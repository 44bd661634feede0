//! Determinant panels: loading from raw tables, standardization, label
//! interpolation, train/holdout splits, correlation screening and projection.

mod dataset;
mod project;
mod screen;
mod split;
mod transform;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{TargetKind, YearMonth};

pub use dataset::{build_dataset, Dataset};
pub use project::{project_determinants, Overrides};
pub use screen::{pearson, screen_correlation, CorrelationEntry, CorrelationScreen, DEFAULT_SCREEN_THRESHOLD};
pub use split::{split, SplitPlan};
pub(crate) use transform::moments;
pub use transform::{interpolate_targets, standardize, standardize_with, MonthlyLabels, ANCHOR_MONTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeterminantKind {
    Numeric,
    Categorical,
}

/// How a determinant is carried forward past the last observed month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionRule {
    /// Copy an externally supplied forecast.
    OfficialSeries,
    /// Repeat the last observed value.
    HoldConstant,
    /// Extrapolate with the mean month-over-month growth factor.
    HistoricalGrowth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterminantSpec {
    pub id: String,
    pub kind: DeterminantKind,
    pub projection: ProjectionRule,
    #[serde(default)]
    pub unit: String,
    /// Category labels, categorical determinants only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl DeterminantSpec {
    pub fn numeric(id: &str, projection: ProjectionRule) -> Self {
        DeterminantSpec {
            id: id.into(),
            kind: DeterminantKind::Numeric,
            projection,
            unit: String::new(),
            categories: Vec::new(),
        }
    }

    pub fn categorical(id: &str, categories: &[&str]) -> Self {
        DeterminantSpec {
            id: id.into(),
            kind: DeterminantKind::Categorical,
            projection: ProjectionRule::HoldConstant,
            unit: String::new(),
            categories: categories.iter().map(|c| c.to_string()).collect(),
        }
    }
}

/// Ordered list of determinant definitions for one panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelSchema {
    pub determinants: Vec<DeterminantSpec>,
}

impl PanelSchema {
    pub fn new(determinants: Vec<DeterminantSpec>) -> Result<Self, IngestError> {
        let schema = PanelSchema { determinants };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let mut seen = BTreeSet::new();
        for d in &self.determinants {
            if d.id.is_empty() || d.id == "month" || TargetKind::from_code(&d.id).is_some() {
                return Err(IngestError::InvalidSchema(format!(
                    "reserved or empty determinant id {:?}",
                    d.id
                )));
            }
            if !seen.insert(d.id.as_str()) {
                return Err(IngestError::InvalidSchema(format!(
                    "duplicate determinant id {:?}",
                    d.id
                )));
            }
            match d.kind {
                DeterminantKind::Numeric if !d.categories.is_empty() => {
                    return Err(IngestError::InvalidSchema(format!(
                        "numeric determinant {:?} declares categories",
                        d.id
                    )));
                }
                DeterminantKind::Categorical => {
                    let distinct: BTreeSet<_> = d.categories.iter().collect();
                    if d.categories.is_empty() || distinct.len() != d.categories.len() {
                        return Err(IngestError::InvalidSchema(format!(
                            "categorical determinant {:?} needs a non-empty set of distinct categories",
                            d.id
                        )));
                    }
                }
                DeterminantKind::Numeric => {}
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&DeterminantSpec> {
        self.determinants.iter().find(|d| d.id == id)
    }
}

/// One encoded panel column. Numeric determinants map to one column; categorical
/// determinants map to one indicator column per category.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub id: String,
    pub source: String,
    pub category: Option<String>,
    pub values: Vec<f64>,
}

impl Column {
    pub fn is_indicator(&self) -> bool {
        self.category.is_some()
    }
}

/// Identifier of the indicator column for `category` of determinant `source`.
pub fn indicator_id(source: &str, category: &str) -> String {
    format!("{source}={category}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnualValue {
    pub year: i32,
    pub value: f64,
}

/// Divisor used for the standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdConvention {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub id: String,
    pub mean: f64,
    pub std: f64,
}

/// Per-column statistics captured when a panel is standardized; maps standardized
/// values back to raw units via `raw = mean + std * z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub convention: StdConvention,
    pub columns: Vec<ColumnStats>,
}

impl Standardization {
    pub fn get(&self, id: &str) -> Option<&ColumnStats> {
        self.columns.iter().find(|c| c.id == id)
    }
}

/// Monthly multivariate determinant series plus annual target labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantPanel {
    region: String,
    months: Vec<YearMonth>,
    columns: Vec<Column>,
    targets: BTreeMap<TargetKind, Vec<AnnualValue>>,
    standardization: Option<Standardization>,
}

impl DeterminantPanel {
    /// Builds a raw (unstandardized) panel, checking the structural invariants.
    pub fn new(
        region: impl Into<String>,
        months: Vec<YearMonth>,
        columns: Vec<Column>,
        targets: BTreeMap<TargetKind, Vec<AnnualValue>>,
    ) -> Result<Self, IngestError> {
        let panel = DeterminantPanel {
            region: region.into(),
            months,
            columns,
            targets,
            standardization: None,
        };
        panel.check()?;
        Ok(panel)
    }

    fn check(&self) -> Result<(), IngestError> {
        for w in self.months.windows(2) {
            if w[1] <= w[0] {
                return Err(IngestError::UnorderedMonths { month: w[1] });
            }
            if w[0].succ() != w[1] {
                return Err(IngestError::MonthGap {
                    row: None,
                    after: w[0],
                    missing: w[0].succ(),
                });
            }
        }
        let mut ids = BTreeSet::new();
        for c in &self.columns {
            if !ids.insert(c.id.as_str()) {
                return Err(IngestError::DuplicateColumn { column: c.id.clone() });
            }
            if c.values.len() != self.months.len() {
                return Err(IngestError::ColumnLength {
                    column: c.id.clone(),
                    len: c.values.len(),
                    months: self.months.len(),
                });
            }
        }
        for (target, values) in &self.targets {
            for v in values {
                let inside = self
                    .months
                    .binary_search(&YearMonth::new(v.year, ANCHOR_MONTH).expect("valid anchor"))
                    .is_ok();
                if !inside {
                    return Err(IngestError::TargetOutsideRange {
                        target: *target,
                        year: v.year,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn months(&self) -> &[YearMonth] {
        &self.months
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, id: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.id == id)
    }

    pub fn column_ids(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.id.clone()).collect()
    }

    pub fn targets(&self) -> &BTreeMap<TargetKind, Vec<AnnualValue>> {
        &self.targets
    }

    pub fn target(&self, kind: TargetKind) -> Option<&[AnnualValue]> {
        self.targets.get(&kind).map(|v| v.as_slice())
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// Column values in raw units, undoing any stored standardization.
    pub fn raw_values(&self, id: &str) -> Option<Vec<f64>> {
        let col = self.column(id)?;
        let stats = self.standardization.as_ref().and_then(|s| s.get(id));
        Some(match stats {
            Some(s) => col.values.iter().map(|z| s.mean + s.std * z).collect(),
            None => col.values.clone(),
        })
    }

    /// Copy of the panel restricted to columns derived from the given determinants.
    pub fn retain_determinants(&self, keep: &BTreeSet<String>) -> DeterminantPanel {
        let columns: Vec<Column> = self
            .columns
            .iter()
            .filter(|c| keep.contains(&c.source))
            .cloned()
            .collect();
        let standardization = self.standardization.as_ref().map(|s| Standardization {
            convention: s.convention,
            columns: s
                .columns
                .iter()
                .filter(|c| columns.iter().any(|col| col.id == c.id))
                .cloned()
                .collect(),
        });
        DeterminantPanel {
            region: self.region.clone(),
            months: self.months.clone(),
            columns,
            targets: self.targets.clone(),
            standardization,
        }
    }

    /// Standardizes raw numeric columns with externally captured statistics,
    /// as done for future projections and inference inputs.
    pub fn apply_standardization(&self, stats: &Standardization) -> Result<DeterminantPanel, IngestError> {
        if self.standardization.is_some() {
            return Err(IngestError::AlreadyStandardized);
        }
        let mut out = self.clone();
        for col in out.columns.iter_mut().filter(|c| !c.is_indicator()) {
            let s = stats
                .get(&col.id)
                .ok_or_else(|| IngestError::MissingStatistics { column: col.id.clone() })?;
            col.values.iter_mut().for_each(|v| *v = (*v - s.mean) / s.std);
        }
        out.standardization = Some(Standardization {
            convention: stats.convention,
            columns: out
                .columns
                .iter()
                .filter(|c| !c.is_indicator())
                .filter_map(|c| stats.get(&c.id).cloned())
                .collect(),
        });
        Ok(out)
    }

    pub(crate) fn with_parts(
        &self,
        months: Vec<YearMonth>,
        columns: Vec<Column>,
        targets: BTreeMap<TargetKind, Vec<AnnualValue>>,
        standardization: Option<Standardization>,
    ) -> DeterminantPanel {
        DeterminantPanel {
            region: self.region.clone(),
            months,
            columns,
            targets,
            standardization,
        }
    }
}

/// A delimited table after tokenization: a header and string cells, with the
/// 1-based source line of each row kept for diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<RawRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub line: usize,
    pub cells: Vec<String>,
}

impl RawTable {
    /// Builds a table with rows numbered from line 2 (line 1 is the header).
    pub fn from_cells<S: AsRef<str>>(header: &[S], rows: &[Vec<S>]) -> Self {
        RawTable {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, r)| RawRow {
                    line: i + 2,
                    cells: r.iter().map(|c| c.as_ref().to_string()).collect(),
                })
                .collect(),
        }
    }
}

/// Name of the month column in panel files.
pub const MONTH_COLUMN: &str = "month";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("table has no data rows")]
    EmptyTable,
    #[error("first header column must be {MONTH_COLUMN:?}, found {found:?}")]
    MissingMonthColumn { found: String },
    #[error("missing column {column:?}")]
    MissingColumn { column: String },
    #[error("column {column:?} is not a declared determinant or target")]
    UnknownColumn { column: String },
    #[error("duplicate column {column:?}")]
    DuplicateColumn { column: String },
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column:?}: cannot parse {value:?}")]
    UnparseableCell { line: usize, column: String, value: String },
    #[error("line {line}, column {column:?}: missing value")]
    MissingValue { line: usize, column: String },
    #[error("line {line}, column {column:?}: unknown category {value:?}")]
    UnknownCategory { line: usize, column: String, value: String },
    #[error("line {line}: duplicate month {month}")]
    DuplicateMonth { line: usize, month: YearMonth },
    #[error("month {month} is out of order")]
    UnorderedMonths { month: YearMonth },
    #[error("{}gap after {after}: month {missing} is missing", line_prefix(*.row))]
    MonthGap {
        row: Option<usize>,
        after: YearMonth,
        missing: YearMonth,
    },
    #[error("line {line}, column {column:?}: annual targets belong on the anchor month (12), found {month}")]
    TargetOffAnchor {
        line: usize,
        column: String,
        month: YearMonth,
    },
    #[error("column {column:?} has {len} values for {months} months")]
    ColumnLength { column: String, len: usize, months: usize },
    #[error("target {target} year {year} lies outside the panel months")]
    TargetOutsideRange { target: TargetKind, year: i32 },
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("zero-variance columns cannot be standardized: {}", .columns.join(", "))]
    ZeroVariance { columns: Vec<String> },
    #[error("panel is already standardized")]
    AlreadyStandardized,
    #[error("no standardization statistics for column {column:?}")]
    MissingStatistics { column: String },
    #[error("target {target}: need at least 2 annual values to interpolate, found {found}")]
    TooFewAnchors { target: TargetKind, found: usize },
    #[error("labels do not match the panel: {0}")]
    LabelMismatch(String),
    #[error("no rows have labels for every requested target")]
    NoLabeledRows,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("split leaves the {side} partition empty")]
    EmptyPartition { side: &'static str },
    #[error("horizon {horizon} is not after the last observed month {last}")]
    HorizonNotAfterData { horizon: YearMonth, last: YearMonth },
    #[error("determinant {determinant:?} uses official_series but no override was supplied")]
    MissingOverride { determinant: String },
    #[error("override for {determinant:?} has no value for {month}")]
    IncompleteOverride { determinant: String, month: YearMonth },
    #[error("override names {determinant:?}, which is not an official_series determinant of the schema")]
    UnexpectedOverride { determinant: String },
    #[error("historical growth undefined for {determinant:?}: series contains zero or changes sign")]
    GrowthUndefined { determinant: String },
    #[error("categorical determinant {determinant:?} only supports hold_constant projection")]
    UnsupportedProjection { determinant: String },
    #[error("panel column {column:?} has no schema entry")]
    SchemaMismatch { column: String },
}

fn line_prefix(row: Option<usize>) -> String {
    match row {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

/// Validates a raw table against the schema and builds a raw panel.
///
/// Categorical determinants are one-hot encoded into one indicator column per
/// declared category; numeric columns stay in raw units. Target columns
/// (`RNWXYEAR`, `RNCAP`) are optional and may only carry values on December rows.
pub fn assemble_panel(region: &str, table: &RawTable, schema: &PanelSchema) -> Result<DeterminantPanel, IngestError> {
    schema.validate()?;
    let first = table.header.first().map(|s| s.trim()).unwrap_or("");
    if first != MONTH_COLUMN {
        return Err(IngestError::MissingMonthColumn { found: first.into() });
    }

    enum Slot {
        Determinant(usize),
        Target(TargetKind),
    }
    let mut slots = Vec::with_capacity(table.header.len() - 1);
    let mut seen = BTreeSet::new();
    for name in &table.header[1..] {
        let name = name.trim();
        if !seen.insert(name) || name == MONTH_COLUMN {
            return Err(IngestError::DuplicateColumn { column: name.into() });
        }
        if let Some(t) = TargetKind::from_code(name) {
            slots.push(Slot::Target(t));
        } else if let Some(pos) = schema.determinants.iter().position(|d| d.id == name) {
            slots.push(Slot::Determinant(pos));
        } else {
            return Err(IngestError::UnknownColumn { column: name.into() });
        }
    }
    for d in &schema.determinants {
        if !seen.contains(d.id.as_str()) {
            return Err(IngestError::MissingColumn { column: d.id.clone() });
        }
    }
    if table.rows.is_empty() {
        return Err(IngestError::EmptyTable);
    }

    let n = table.rows.len();
    let mut months = Vec::with_capacity(n);
    let mut raw: Vec<Vec<f64>> = schema.determinants.iter().map(|_| Vec::with_capacity(n)).collect();
    let mut cats: Vec<Vec<usize>> = schema.determinants.iter().map(|_| Vec::new()).collect();
    let mut targets: BTreeMap<TargetKind, Vec<AnnualValue>> = BTreeMap::new();

    for row in &table.rows {
        let expected = table.header.len();
        if row.cells.len() != expected {
            return Err(IngestError::RaggedRow {
                line: row.line,
                expected,
                found: row.cells.len(),
            });
        }
        let month: YearMonth = row.cells[0].parse().map_err(|_| IngestError::UnparseableCell {
            line: row.line,
            column: MONTH_COLUMN.into(),
            value: row.cells[0].clone(),
        })?;
        if let Some(&prev) = months.last() {
            if month == prev {
                return Err(IngestError::DuplicateMonth { line: row.line, month });
            }
            if month < prev {
                return Err(IngestError::UnorderedMonths { month });
            }
            if prev.succ() != month {
                return Err(IngestError::MonthGap {
                    row: Some(row.line),
                    after: prev,
                    missing: prev.succ(),
                });
            }
        }
        months.push(month);

        for (slot, (name, cell)) in slots.iter().zip(table.header[1..].iter().zip(&row.cells[1..])) {
            let cell = cell.trim();
            let name = name.trim();
            match *slot {
                Slot::Determinant(pos) => {
                    let spec = &schema.determinants[pos];
                    if cell.is_empty() {
                        return Err(IngestError::MissingValue {
                            line: row.line,
                            column: name.into(),
                        });
                    }
                    match spec.kind {
                        DeterminantKind::Numeric => {
                            let v = parse_number(cell).ok_or_else(|| IngestError::UnparseableCell {
                                line: row.line,
                                column: name.into(),
                                value: cell.into(),
                            })?;
                            raw[pos].push(v);
                        }
                        DeterminantKind::Categorical => {
                            let idx = spec.categories.iter().position(|c| c == cell).ok_or_else(|| {
                                IngestError::UnknownCategory {
                                    line: row.line,
                                    column: name.into(),
                                    value: cell.into(),
                                }
                            })?;
                            cats[pos].push(idx);
                        }
                    }
                }
                Slot::Target(kind) => {
                    if cell.is_empty() {
                        continue;
                    }
                    let v = parse_number(cell).ok_or_else(|| IngestError::UnparseableCell {
                        line: row.line,
                        column: name.into(),
                        value: cell.into(),
                    })?;
                    if month.month() != ANCHOR_MONTH {
                        return Err(IngestError::TargetOffAnchor {
                            line: row.line,
                            column: name.into(),
                            month,
                        });
                    }
                    targets.entry(kind).or_default().push(AnnualValue {
                        year: month.year(),
                        value: v,
                    });
                }
            }
        }
    }
    for s in &slots {
        if let Slot::Target(t) = s {
            targets.entry(*t).or_default();
        }
    }

    let mut columns = Vec::new();
    for (pos, spec) in schema.determinants.iter().enumerate() {
        match spec.kind {
            DeterminantKind::Numeric => columns.push(Column {
                id: spec.id.clone(),
                source: spec.id.clone(),
                category: None,
                values: core::mem::take(&mut raw[pos]),
            }),
            DeterminantKind::Categorical => {
                for (ci, cat) in spec.categories.iter().enumerate() {
                    columns.push(Column {
                        id: indicator_id(&spec.id, cat),
                        source: spec.id.clone(),
                        category: Some(cat.clone()),
                        values: cats[pos].iter().map(|&k| if k == ci { 1.0 } else { 0.0 }).collect(),
                    });
                }
            }
        }
    }
    DeterminantPanel::new(region, months, columns, targets)
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}
