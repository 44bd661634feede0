use alloc::string::String;
use alloc::vec::Vec;

use super::{DeterminantPanel, IngestError, MonthlyLabels};
use crate::{Matrix, TargetKind, YearMonth};

/// Supervised rows: one input vector per month with its interpolated label(s).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub months: Vec<YearMonth>,
    pub feature_ids: Vec<String>,
    pub targets: Vec<TargetKind>,
    pub inputs: Matrix,
    pub labels: Matrix,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            months: rows.iter().map(|&i| self.months[i]).collect(),
            feature_ids: self.feature_ids.clone(),
            targets: self.targets.clone(),
            inputs: self.inputs.select_rows(rows),
            labels: self.labels.select_rows(rows),
        }
    }
}

/// Pairs every month that has a label for each of `labels` with the panel's
/// column values for that month.
pub fn build_dataset(panel: &DeterminantPanel, labels: &[&MonthlyLabels]) -> Result<Dataset, IngestError> {
    if labels.is_empty() {
        return Err(IngestError::LabelMismatch("no label series given".into()));
    }
    for l in labels {
        if l.months != panel.months() {
            return Err(IngestError::LabelMismatch(alloc::format!(
                "{} labels cover different months than the panel",
                l.target
            )));
        }
    }
    let rows: Vec<usize> = (0..panel.len())
        .filter(|&i| labels.iter().all(|l| l.values[i].is_some()))
        .collect();
    if rows.is_empty() {
        return Err(IngestError::NoLabeledRows);
    }
    let width = panel.columns().len();
    let mut inputs = Matrix::zeros(rows.len(), width);
    let mut out = Matrix::zeros(rows.len(), labels.len());
    for (r, &i) in rows.iter().enumerate() {
        for (c, col) in panel.columns().iter().enumerate() {
            inputs[(r, c)] = col.values[i];
        }
        for (k, l) in labels.iter().enumerate() {
            out[(r, k)] = l.values[i].expect("filtered");
        }
    }
    Ok(Dataset {
        months: rows.iter().map(|&i| panel.months()[i]).collect(),
        feature_ids: panel.column_ids(),
        targets: labels.iter().map(|l| l.target).collect(),
        inputs,
        labels: out,
    })
}
