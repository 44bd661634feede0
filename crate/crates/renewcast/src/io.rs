//! Delimited and JSON file formats for panels, schemas, overrides and scorecards.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use renewcast_core::ingest::{
    assemble_panel, DeterminantPanel, Overrides, PanelSchema, RawRow, RawTable, MONTH_COLUMN,
};
use renewcast_core::scenario::AnnualSeries;
use renewcast_core::scoring::PolicyScorecard;
use renewcast_core::{TargetKind, YearMonth};
use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn origin(path: &Path) -> String {
    path.display().to_string()
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(origin, e))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&read_file(path)?, &origin(path))
}

/// Tokenizes a comma-separated table. Rows may be ragged here; the ingest rules
/// report that with the offending line.
pub fn read_table(reader: impl Read, origin: &str) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut table = RawTable::default();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::parse(origin, e))?;
        let cells: Vec<String> = record.iter().map(str::to_string).collect();
        if i == 0 {
            table.header = cells;
        } else {
            let line = record.position().map_or(i + 1, |p| p.line() as usize);
            table.rows.push(RawRow { line, cells });
        }
    }
    Ok(table)
}

pub fn parse_panel(text: &str, origin: &str, region: &str, schema: &PanelSchema) -> Result<DeterminantPanel> {
    let table = read_table(text.as_bytes(), origin)?;
    assemble_panel(region, &table, schema).map_err(|e| Error::ingest(origin, e))
}

/// Loads a panel; the region defaults to the file stem.
pub fn load_panel(path: &Path, schema: &PanelSchema, region: Option<&str>) -> Result<DeterminantPanel> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("region");
    parse_panel(&read_file(path)?, &origin(path), region.unwrap_or(stem), schema)
}

pub fn load_schema(path: &Path) -> Result<PanelSchema> {
    let schema: PanelSchema = load_json(path)?;
    schema.validate().map_err(|e| Error::ingest(origin(path), e))?;
    Ok(schema)
}

pub fn load_scorecard(path: &Path) -> Result<PolicyScorecard> {
    load_json(path)
}

/// Wide overrides table: a `month` column, then one column per official-series
/// determinant. Blank cells are left out.
pub fn parse_overrides(text: &str, origin: &str) -> Result<Overrides> {
    let table = read_table(text.as_bytes(), origin)?;
    if table.header.first().map(String::as_str) != Some(MONTH_COLUMN) {
        return Err(Error::parse(origin, format!("first column must be {MONTH_COLUMN:?}")));
    }
    let mut out: Overrides = BTreeMap::new();
    for id in &table.header[1..] {
        out.entry(id.clone()).or_default();
    }
    for row in &table.rows {
        if row.cells.len() != table.header.len() {
            return Err(Error::parse(
                origin,
                format!("line {}: expected {} cells", row.line, table.header.len()),
            ));
        }
        let month: YearMonth = row.cells[0]
            .parse()
            .map_err(|_| Error::parse(origin, format!("line {}: bad month {:?}", row.line, row.cells[0])))?;
        for (id, cell) in table.header[1..].iter().zip(&row.cells[1..]) {
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::parse(origin, format!("line {}, column {id:?}: bad number {cell:?}", row.line)))?;
            out.get_mut(id).expect("header ids inserted").insert(month, v);
        }
    }
    Ok(out)
}

pub fn load_overrides(path: &Path) -> Result<Overrides> {
    parse_overrides(&read_file(path)?, &origin(path))
}

/// Two-column `year,value` table.
pub fn parse_series(text: &str, origin: &str) -> Result<AnnualSeries> {
    let table = read_table(text.as_bytes(), origin)?;
    if table.header != ["year", "value"] {
        return Err(Error::parse(origin, "header must be year,value"));
    }
    let mut pairs = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let bad = || Error::parse(origin, format!("line {}: expected year,value", row.line));
        if row.cells.len() != 2 {
            return Err(bad());
        }
        let year: i32 = row.cells[0].parse().map_err(|_| bad())?;
        let value: f64 = row.cells[1].parse().map_err(|_| bad())?;
        pairs.push((year, value));
    }
    AnnualSeries::from_pairs(&pairs).map_err(|e| Error::parse(origin, e))
}

pub fn load_series(path: &Path) -> Result<AnnualSeries> {
    parse_series(&read_file(path)?, &origin(path))
}

pub fn write_series(series: &AnnualSeries, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::parse("series output", e);
    w.write_record(["year", "value"]).map_err(fail)?;
    for p in series.points() {
        w.write_record([p.year.to_string(), p.value.to_string()])
            .map_err(fail)?;
    }
    w.flush().map_err(|e| Error::parse("series output", e))
}

/// Writes a raw panel in the input file format, collapsing indicator columns back
/// to category labels. Targets are written on December rows.
pub fn write_panel(panel: &DeterminantPanel, schema: &PanelSchema, out: impl Write) -> Result<()> {
    let fail = |e: csv::Error| Error::parse("panel output", e);
    if panel.standardization().is_some() {
        return Err(Error::Document("only raw panels can be written".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let targets: Vec<TargetKind> = panel.targets().keys().copied().collect();
    let mut header = vec![MONTH_COLUMN.to_string()];
    header.extend(schema.determinants.iter().map(|d| d.id.clone()));
    header.extend(targets.iter().map(|t| t.code().to_string()));
    w.write_record(&header).map_err(fail)?;
    for (i, month) in panel.months().iter().enumerate() {
        let mut row = vec![month.to_string()];
        for d in &schema.determinants {
            let cols: Vec<_> = panel.columns().iter().filter(|c| c.source == d.id).collect();
            let cell = match cols.as_slice() {
                [] => return Err(Error::Document(format!("panel has no column for {:?}", d.id))),
                [c] if c.category.is_none() => c.values[i].to_string(),
                many => many
                    .iter()
                    .find(|c| c.values[i] == 1.0)
                    .and_then(|c| c.category.clone())
                    .ok_or_else(|| Error::Document(format!("{month}: no active category for {:?}", d.id)))?,
            };
            row.push(cell);
        }
        for t in &targets {
            let v = panel
                .target(*t)
                .and_then(|vals| vals.iter().find(|v| month.month() == 12 && v.year == month.year()));
            row.push(v.map(|v| v.value.to_string()).unwrap_or_default());
        }
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::parse("panel output", e))
}
