use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use libm::sqrt;

use super::{DeterminantPanel, MonthlyLabels};

/// Absolute correlation below which a determinant is dropped by default.
pub const DEFAULT_SCREEN_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEntry {
    pub determinant: String,
    /// Pearson correlation of the determinant's most correlated column (largest
    /// magnitude), `None` when every column is constant on the labeled months.
    pub correlation: Option<f64>,
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationScreen {
    pub threshold: f64,
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationScreen {
    pub fn retained(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter(|e| e.retained)
            .map(|e| e.determinant.clone())
            .collect()
    }

    pub fn dropped(&self) -> Vec<&CorrelationEntry> {
        self.entries.iter().filter(|e| !e.retained).collect()
    }

    /// True when nothing survived the screen.
    pub fn is_empty_warning(&self) -> bool {
        self.entries.iter().all(|e| !e.retained)
    }
}

/// Pearson product-moment correlation; `None` if either side has zero variance
/// or the slices are shorter than 2.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Keeps determinants whose absolute correlation with the monthly labels is at
/// least `threshold`. Categorical determinants are judged by their most
/// correlated indicator column.
pub fn screen_correlation(panel: &DeterminantPanel, labels: &MonthlyLabels, threshold: f64) -> CorrelationScreen {
    let rows: Vec<(usize, f64)> = labels.defined().collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut entries: Vec<CorrelationEntry> = Vec::new();
    for col in panel.columns() {
        let x: Vec<f64> = rows.iter().map(|&(i, _)| col.values[i]).collect();
        let r = pearson(&x, &y);
        match entries.iter_mut().find(|e| e.determinant == col.source) {
            Some(e) => {
                e.correlation = match (e.correlation, r) {
                    (Some(a), Some(b)) => Some(if b.abs() > a.abs() { b } else { a }),
                    (a, b) => a.or(b),
                };
            }
            None => entries.push(CorrelationEntry {
                determinant: col.source.clone(),
                correlation: r,
                retained: false,
            }),
        }
    }
    for e in &mut entries {
        e.retained = e.correlation.is_some_and(|r| r.abs() >= threshold);
    }
    CorrelationScreen { threshold, entries }
}
