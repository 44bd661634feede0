//! Scenario documents: the JSON shape shared by CLI spec files and the HTTP API.
//!
//! A document names its baseline (an explicit annual series, or a model plus
//! future determinants), its intensity (explicit factors or two scorecards), the
//! totals used for share conversion and optional bound overrides and gap target.
//! Files may point at other files; [`materialize`] inlines those so the
//! evaluation itself never touches the filesystem.

use std::collections::BTreeMap;
use std::path::Path;

use renewcast_core::diffusion::{PolicyIntensity, ScenarioBounds};
use renewcast_core::ingest::{assemble_panel, AnnualValue, RawRow, RawTable, MONTH_COLUMN};
use renewcast_core::scenario::{
    analyze_gap, compose_scenarios, intensity_from_scorecards, run_baseline, AnnualSeries, ForecastModel,
    ScenarioReport, ScenarioSpec,
};
use renewcast_core::scoring::{builtin_scorecard, FactorKind, PolicyScorecard, Region};
use renewcast_core::{TargetKind, YearMonth};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::model_file::model_id;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub region: String,
    pub target: TargetKind,
    /// Defaults to the first year of the baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_start: Option<i32>,
    pub horizon: i32,
    pub baseline: BaselineSource,
    pub intensity: IntensitySource,
    pub totals: SeriesSource,
    #[serde(default, skip_serializing_if = "BoundsOverride::is_empty")]
    pub bounds: BoundsOverride,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_target: Option<f64>,
}

/// Either `series`, or `model` together with `determinants`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesSource>,
    /// Model id, or a path whose file stem is the id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub determinants: Option<DeterminantSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesSource {
    Inline(Vec<AnnualValue>),
    File(FileRef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRef {
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Label(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Number(v) => v.to_string(),
            Cell::Label(s) => s.clone(),
        }
    }
}

/// Future determinant values in raw units, one array per determinant starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineDeterminants {
    pub start: YearMonth,
    pub columns: BTreeMap<String, Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeterminantSource {
    Inline(InlineDeterminants),
    File(FileRef),
}

/// Either `explicit` factors or a pair of `scorecards`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensitySource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitIntensity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorecards: Option<ScorecardPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitIntensity {
    pub f_c: f64,
    pub f_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorecardPair {
    pub ceiling: CardSource,
    pub speed: CardSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CardSource {
    Builtin(BuiltinRef),
    File(FileRef),
    Inline(PolicyScorecard),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinRef {
    pub builtin: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_op: Option<f64>,
    /// Defaults to a third of the effective `p_op`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_op: Option<f64>,
}

impl BoundsOverride {
    pub fn is_empty(&self) -> bool {
        *self == BoundsOverride::default()
    }

    pub fn apply(&self, target: TargetKind) -> ScenarioBounds {
        let mut b = ScenarioBounds::for_target(target);
        if let Some(p_op) = self.p_op {
            b.p_op = p_op;
            b.p_base = p_op / 3.0;
        }
        b.c_base = self.c_base.unwrap_or(b.c_base);
        b.c_op = self.c_op.unwrap_or(b.c_op);
        b.p_base = self.p_base.unwrap_or(b.p_base);
        b
    }
}

/// What a scenario run returns on every surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub report: ScenarioReport,
}

impl ReportDocument {
    pub fn new(report: ScenarioReport) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            report,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Read-only model lookup by id.
pub trait ModelLookup {
    fn lookup(&self, id: &str) -> Option<&ForecastModel>;
}

impl ModelLookup for BTreeMap<String, ForecastModel> {
    fn lookup(&self, id: &str) -> Option<&ForecastModel> {
        self.get(id)
    }
}

pub fn parse_document(text: &str, origin: &str) -> Result<ScenarioDocument> {
    let doc: ScenarioDocument = io::parse_json(text, origin)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(
            origin,
            format!("unsupported schema_version {}", doc.schema_version),
        ));
    }
    Ok(doc)
}

pub fn load_document(path: &Path) -> Result<ScenarioDocument> {
    parse_document(&io::read_file(path)?, &io::origin(path))
}

/// Replaces every file reference with its contents, resolving paths against `base`.
/// The model reference is left alone.
pub fn materialize(doc: &ScenarioDocument, base: &Path) -> Result<ScenarioDocument> {
    let mut out = doc.clone();
    let series = |s: &mut SeriesSource| -> Result<()> {
        if let SeriesSource::File(f) = s {
            *s = SeriesSource::Inline(io::load_series(&base.join(&f.file))?.into());
        }
        Ok(())
    };
    series(&mut out.totals)?;
    if let Some(s) = out.baseline.series.as_mut() {
        series(s)?;
    }
    if let Some(pair) = out.intensity.scorecards.as_mut() {
        for card in [&mut pair.ceiling, &mut pair.speed] {
            if let CardSource::File(f) = card {
                *card = CardSource::Inline(io::load_scorecard(&base.join(&f.file))?);
            }
        }
    }
    if let Some(DeterminantSource::File(f)) = &out.baseline.determinants {
        let path = base.join(&f.file);
        let table = io::read_table(io::read_file(&path)?.as_bytes(), &io::origin(&path))?;
        out.baseline.determinants = Some(DeterminantSource::Inline(table_to_inline(&table, &io::origin(&path))?));
    }
    Ok(out)
}

fn table_to_inline(table: &RawTable, origin: &str) -> Result<InlineDeterminants> {
    if table.header.first().map(String::as_str) != Some(MONTH_COLUMN) {
        return Err(Error::parse(origin, format!("first column must be {MONTH_COLUMN:?}")));
    }
    let first = table.rows.first().ok_or_else(|| Error::parse(origin, "no data rows"))?;
    let start: YearMonth = first.cells[0]
        .parse()
        .map_err(|_| Error::parse(origin, format!("line {}: bad month {:?}", first.line, first.cells[0])))?;
    let mut columns: BTreeMap<String, Vec<Cell>> = BTreeMap::new();
    for (i, row) in table.rows.iter().enumerate() {
        let month: Option<YearMonth> = row.cells.first().and_then(|c| c.parse().ok());
        if month != Some(start.add_months(i as i64)) {
            return Err(Error::parse(
                origin,
                format!("line {}: months must be consecutive from {start}", row.line),
            ));
        }
        if row.cells.len() != table.header.len() {
            return Err(Error::parse(
                origin,
                format!("line {}: expected {} cells", row.line, table.header.len()),
            ));
        }
        for (name, cell) in table.header[1..].iter().zip(&row.cells[1..]) {
            let value = cell
                .parse::<f64>()
                .map(Cell::Number)
                .unwrap_or_else(|_| Cell::Label(cell.clone()));
            columns.entry(name.clone()).or_default().push(value);
        }
    }
    Ok(InlineDeterminants { start, columns })
}

fn inline_series(source: &SeriesSource, what: &str) -> Result<AnnualSeries> {
    match source {
        SeriesSource::Inline(points) => Ok(AnnualSeries::new(points.clone())?),
        SeriesSource::File(f) => Err(Error::Document(format!(
            "{what} refers to file {:?}; files can only be used from the command line",
            f.file
        ))),
    }
}

fn resolve_card(source: &CardSource, kind: FactorKind) -> Result<PolicyScorecard> {
    match source {
        CardSource::Builtin(b) => Ok(builtin_scorecard(b.builtin.parse::<Region>()?, kind)),
        CardSource::Inline(card) => Ok(card.clone()),
        CardSource::File(f) => Err(Error::Document(format!(
            "{kind} scorecard refers to file {:?}; files can only be used from the command line",
            f.file
        ))),
    }
}

pub fn resolve_intensity(source: &IntensitySource) -> Result<PolicyIntensity> {
    match (source.explicit, &source.scorecards) {
        (Some(e), None) => Ok(PolicyIntensity::new(e.f_c, e.f_p)?.with_source("explicit")),
        (None, Some(pair)) => Ok(intensity_from_scorecards(
            &resolve_card(&pair.ceiling, FactorKind::Ceiling)?,
            &resolve_card(&pair.speed, FactorKind::Speed)?,
        )?),
        _ => Err(Error::Document(
            "intensity needs exactly one of `explicit` or `scorecards`".into(),
        )),
    }
}

/// Panel of future determinants assembled with the model's schema.
fn future_panel(
    model: &ForecastModel,
    inline: &InlineDeterminants,
    region: &str,
) -> Result<renewcast_core::ingest::DeterminantPanel> {
    let lengths: Vec<usize> = inline.columns.values().map(Vec::len).collect();
    let n = *lengths
        .first()
        .ok_or_else(|| Error::Document("determinants has no columns".into()))?;
    if lengths.iter().any(|&l| l != n) {
        return Err(Error::Document("determinant columns differ in length".into()));
    }
    let mut header = vec![MONTH_COLUMN.to_string()];
    header.extend(inline.columns.keys().cloned());
    let rows = (0..n)
        .map(|i| {
            let mut cells = vec![inline.start.add_months(i as i64).to_string()];
            cells.extend(inline.columns.values().map(|c| c[i].render()));
            RawRow { line: i + 2, cells }
        })
        .collect();
    let table = RawTable { header, rows };
    assemble_panel(region, &table, &model.schema).map_err(|e| Error::ingest("baseline.determinants", e))
}

pub fn resolve_baseline(doc: &ScenarioDocument, models: &dyn ModelLookup) -> Result<AnnualSeries> {
    let b = &doc.baseline;
    match (&b.series, &b.model, &b.determinants) {
        (Some(series), None, None) => inline_series(series, "baseline.series"),
        (None, Some(reference), Some(dets)) => {
            let id = model_id(reference);
            let model = models.lookup(&id).ok_or(Error::UnknownModel(id))?;
            let inline = match dets {
                DeterminantSource::Inline(inline) => inline,
                DeterminantSource::File(f) => {
                    return Err(Error::Document(format!(
                        "baseline.determinants refers to file {:?}; files can only be used from the command line",
                        f.file
                    )))
                }
            };
            let panel = future_panel(model, inline, &doc.region)?;
            Ok(run_baseline(model, &panel, doc.target)?)
        }
        _ => Err(Error::Document(
            "baseline needs either `series`, or `model` together with `determinants`".into(),
        )),
    }
}

/// Turns a fully inline document into a scenario spec plus its baseline series.
pub fn resolve(doc: &ScenarioDocument, models: &dyn ModelLookup) -> Result<(ScenarioSpec, AnnualSeries)> {
    let baseline = resolve_baseline(doc, models)?;
    let policy_start = match doc.policy_start {
        Some(y) => y,
        None => baseline
            .points()
            .first()
            .map(|p| p.year)
            .ok_or_else(|| Error::Document("baseline is empty".into()))?,
    };
    let spec = ScenarioSpec {
        region: doc.region.clone(),
        target: doc.target,
        policy_start,
        horizon: doc.horizon,
        intensity: resolve_intensity(&doc.intensity)?,
        totals: inline_series(&doc.totals, "totals")?,
        bounds: doc.bounds.apply(doc.target),
    };
    Ok((spec, baseline))
}

/// Full evaluation. `gap_override` takes precedence over the document's target.
pub fn evaluate(doc: &ScenarioDocument, models: &dyn ModelLookup, gap_override: Option<f64>) -> Result<ReportDocument> {
    let (spec, baseline) = resolve(doc, models)?;
    let mut report = compose_scenarios(&spec, &baseline)?;
    if let Some(target) = gap_override.or(doc.gap_target) {
        report.gap = Some(analyze_gap(&report, target)?);
    }
    Ok(ReportDocument::new(report))
}
