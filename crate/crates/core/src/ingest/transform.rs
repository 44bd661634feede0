use alloc::vec::Vec;

use libm::sqrt;

use super::{ColumnStats, DeterminantPanel, IngestError, Standardization, StdConvention};
use crate::{TargetKind, YearMonth};

/// Calendar month on which annual target values are anchored.
pub const ANCHOR_MONTH: u8 = 12;

/// Standardizes every numeric column with population statistics.
pub fn standardize(panel: &DeterminantPanel) -> Result<DeterminantPanel, IngestError> {
    standardize_with(panel, StdConvention::Population)
}

/// Transforms each numeric column to `(x - mean) / std`. One-hot indicator columns are
/// left untouched. If the panel was already standardized, the stored statistics are
/// composed so that [`DeterminantPanel::raw_values`] still recovers raw units.
pub fn standardize_with(panel: &DeterminantPanel, convention: StdConvention) -> Result<DeterminantPanel, IngestError> {
    let n = panel.len();
    if n < 2 {
        return Err(IngestError::TooFewRows { needed: 2, found: n });
    }
    let mut columns = panel.columns.clone();
    let mut stats = Vec::new();
    let mut degenerate = Vec::new();
    for col in columns.iter_mut().filter(|c| !c.is_indicator()) {
        let (mean, std) = moments(&col.values, convention);
        if !(std > 1e-12 * mean.abs().max(1.0)) {
            degenerate.push(col.id.clone());
            continue;
        }
        col.values.iter_mut().for_each(|v| *v = (*v - mean) / std);
        let prior = panel.standardization.as_ref().and_then(|s| s.get(&col.id));
        let (raw_mean, raw_std) = match prior {
            Some(p) => (p.mean + p.std * mean, p.std * std),
            None => (mean, std),
        };
        stats.push(ColumnStats {
            id: col.id.clone(),
            mean: raw_mean,
            std: raw_std,
        });
    }
    if !degenerate.is_empty() {
        return Err(IngestError::ZeroVariance { columns: degenerate });
    }
    Ok(panel.with_parts(
        panel.months.clone(),
        columns,
        panel.targets.clone(),
        Some(Standardization {
            convention,
            columns: stats,
        }),
    ))
}

pub(crate) fn moments(values: &[f64], convention: StdConvention) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = match convention {
        StdConvention::Population => n,
        StdConvention::Sample => n - 1.0,
    };
    (mean, sqrt(ss / denom))
}

/// Month-aligned label series for one target; `None` outside the anchor range.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyLabels {
    pub target: TargetKind,
    pub months: Vec<YearMonth>,
    pub values: Vec<Option<f64>>,
}

impl MonthlyLabels {
    pub fn defined(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v)))
    }
}

/// Piecewise-linear interpolation of annual targets onto the panel's months,
/// with each annual value anchored on December of its year.
pub fn interpolate_targets(panel: &DeterminantPanel, target: TargetKind) -> Result<MonthlyLabels, IngestError> {
    let annual = panel.target(target).unwrap_or(&[]);
    if annual.len() < 2 {
        return Err(IngestError::TooFewAnchors {
            target,
            found: annual.len(),
        });
    }
    let first = panel.months[0];
    let mut anchors: Vec<(i64, f64)> = annual
        .iter()
        .map(|a| {
            let m = YearMonth::new(a.year, ANCHOR_MONTH).expect("anchor month is valid");
            (first.months_until(m), a.value)
        })
        .collect();
    anchors.sort_by_key(|a| a.0);
    if anchors.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(IngestError::LabelMismatch(alloc::format!(
            "{target} has duplicate annual values"
        )));
    }
    let mut values = alloc::vec![None; panel.len()];
    for w in anchors.windows(2) {
        let (i0, v0) = w[0];
        let (i1, v1) = w[1];
        let span = (i1 - i0) as f64;
        for i in i0..=i1 {
            let frac = (i - i0) as f64 / span;
            values[i as usize] = Some(if i == i1 { v1 } else { v0 + (v1 - v0) * frac });
        }
    }
    Ok(MonthlyLabels {
        target,
        months: panel.months.clone(),
        values,
    })
}
