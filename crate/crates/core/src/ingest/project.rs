use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Column, DeterminantKind, DeterminantPanel, IngestError, PanelSchema, ProjectionRule};
use crate::YearMonth;

/// Official future series keyed by determinant id, then month. Raw units.
pub type Overrides = BTreeMap<String, BTreeMap<YearMonth, f64>>;

/// Extends every panel column from the month after the last observation through
/// `horizon` (inclusive) according to the determinant's projection rule.
///
/// Rules act on raw values; if the panel is standardized the projected values are
/// standardized with the panel's stored statistics. The result has the same column
/// set as `panel` and no targets.
pub fn project_determinants(
    panel: &DeterminantPanel,
    schema: &PanelSchema,
    horizon: YearMonth,
    overrides: &Overrides,
) -> Result<DeterminantPanel, IngestError> {
    let last = *panel.months().last().ok_or(IngestError::EmptyTable)?;
    if horizon <= last {
        return Err(IngestError::HorizonNotAfterData { horizon, last });
    }
    for id in overrides.keys() {
        let official = schema
            .get(id)
            .is_some_and(|d| d.projection == ProjectionRule::OfficialSeries && d.kind == DeterminantKind::Numeric);
        if !official {
            return Err(IngestError::UnexpectedOverride {
                determinant: id.clone(),
            });
        }
    }
    let months: Vec<YearMonth> = last.succ().range_inclusive(horizon).collect();
    let steps = months.len();

    let mut columns = Vec::with_capacity(panel.columns().len());
    for col in panel.columns() {
        let spec = schema
            .get(&col.source)
            .ok_or_else(|| IngestError::SchemaMismatch { column: col.id.clone() })?;
        let values = if col.is_indicator() {
            if spec.projection != ProjectionRule::HoldConstant {
                return Err(IngestError::UnsupportedProjection {
                    determinant: spec.id.clone(),
                });
            }
            alloc::vec![*col.values.last().expect("non-empty"); steps]
        } else {
            let raw = panel.raw_values(&col.id).expect("column exists");
            let projected = match spec.projection {
                ProjectionRule::HoldConstant => alloc::vec![*raw.last().expect("non-empty"); steps],
                ProjectionRule::HistoricalGrowth => {
                    let rate = growth_factor(&raw).ok_or_else(|| IngestError::GrowthUndefined {
                        determinant: spec.id.clone(),
                    })?;
                    let base = *raw.last().expect("non-empty");
                    (1..=steps).map(|k| base * libm::pow(rate, k as f64)).collect()
                }
                ProjectionRule::OfficialSeries => {
                    let series = overrides.get(&spec.id).ok_or_else(|| IngestError::MissingOverride {
                        determinant: spec.id.clone(),
                    })?;
                    months
                        .iter()
                        .map(|m| {
                            series.get(m).copied().ok_or_else(|| IngestError::IncompleteOverride {
                                determinant: spec.id.clone(),
                                month: *m,
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?
                }
            };
            match panel.standardization().and_then(|s| s.get(&col.id)) {
                Some(s) => projected.iter().map(|v| (v - s.mean) / s.std).collect(),
                None => projected,
            }
        };
        columns.push(Column {
            id: col.id.clone(),
            source: col.source.clone(),
            category: col.category.clone(),
            values,
        });
    }
    Ok(panel.with_parts(months, columns, BTreeMap::new(), panel.standardization().cloned()))
}

/// Geometric mean of month-over-month ratios, `(last / first)^(1 / (n - 1))`.
/// Undefined for fewer than two points, zeros, or sign changes.
fn growth_factor(raw: &[f64]) -> Option<f64> {
    if raw.len() < 2 {
        return None;
    }
    let positive = raw[0] > 0.0;
    if raw.iter().any(|&v| v == 0.0 || (v > 0.0) != positive) {
        return None;
    }
    let first = raw[0];
    let last = raw[raw.len() - 1];
    Some(libm::pow(last / first, 1.0 / (raw.len() - 1) as f64))
}
