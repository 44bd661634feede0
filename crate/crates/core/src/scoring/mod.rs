//! Policy scorecards and the intensity factors derived from them.
//!
//! A scorecard holds a score in `[0, 100]` for each evaluation index of a weighted
//! matrix. The intensity factor is the weight-averaged score divided by 100 once.

mod builtin;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fingerprint::Fnv;

pub use builtin::{builtin_matrix, builtin_scorecard, published_factor, Region};

/// Scores allowed for five-level indices.
pub const FIVE_LEVEL_GRID: [f64; 5] = [0.0, 25.0, 50.0, 75.0, 100.0];

/// Tolerance on the sum of index weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// Saturation ceiling factor `f_c`.
    Ceiling,
    /// Diffusion speed factor `f_p`.
    Speed,
}

impl FactorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorKind::Ceiling => "ceiling",
            FactorKind::Speed => "speed",
        }
    }
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown factor kind {0:?}, expected ceiling or speed")]
pub struct UnknownFactorKind(pub String);

impl FromStr for FactorKind {
    type Err = UnknownFactorKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ceiling" | "f_c" | "fc" => Ok(FactorKind::Ceiling),
            "speed" | "f_p" | "fp" => Ok(FactorKind::Speed),
            _ => Err(UnknownFactorKind(s.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    /// Achievement scaled linearly onto `[0, 100]`.
    LinearScaled,
    /// Categorical level restricted to [`FIVE_LEVEL_GRID`].
    FiveLevel,
    /// External benchmark index already on `[0, 100]`.
    ContinuousIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationIndex {
    pub id: String,
    pub description: String,
    pub kind: IndexKind,
    pub weight: f64,
    /// Display grouping only; aggregation ignores it.
    #[serde(default)]
    pub group: String,
    #[serde(default)]
    pub rubric: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyScorecard {
    pub region: String,
    pub factor: FactorKind,
    pub indices: Vec<EvaluationIndex>,
    /// Index id to score on the 0-100 scale.
    pub entries: BTreeMap<String, f64>,
}

impl PolicyScorecard {
    pub fn weight_sum(&self) -> f64 {
        self.indices.iter().map(|i| i.weight).sum()
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new().str(&self.region).str(self.factor.as_str());
        for idx in &self.indices {
            h = h.str(&idx.id).f64(idx.weight).u64(idx.kind as u64);
        }
        for (k, v) in &self.entries {
            h = h.str(k).f64(*v);
        }
        h.finish()
    }

    /// Sum of the weights of indices that share a group label, in first-seen order.
    pub fn group_weights(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for idx in &self.indices {
            match out.iter_mut().find(|(g, _)| *g == idx.group) {
                Some((_, w)) => *w += idx.weight,
                None => out.push((idx.group.clone(), idx.weight)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    WeightSum {
        sum: f64,
    },
    WeightOutOfRange {
        index: String,
        weight: f64,
    },
    DuplicateIndex {
        index: String,
    },
    MissingEntry {
        index: String,
    },
    UnknownEntry {
        index: String,
    },
    OutOfRange {
        index: String,
        score: f64,
    },
    OffGrid {
        index: String,
        score: f64,
        allowed: Vec<f64>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WeightSum { sum } => write!(f, "index weights sum to {sum}, expected 1"),
            Violation::WeightOutOfRange { index, weight } => {
                write!(f, "index {index:?}: weight {weight} outside (0, 1]")
            }
            Violation::DuplicateIndex { index } => write!(f, "index {index:?} is defined more than once"),
            Violation::MissingEntry { index } => write!(f, "index {index:?} has no score"),
            Violation::UnknownEntry { index } => write!(f, "score given for unknown index {index:?}"),
            Violation::OutOfRange { index, score } => {
                write!(f, "index {index:?}: score {score} outside [0, 100]")
            }
            Violation::OffGrid { index, score, .. } => write!(
                f,
                "index {index:?}: five-level score {score} not in {{0, 25, 50, 75, 100}}"
            ),
        }
    }
}

/// Lists every violated scorecard invariant; empty iff the card is valid.
pub fn validate_scorecard(card: &PolicyScorecard) -> Vec<Violation> {
    let mut out = Vec::new();
    let sum = card.weight_sum();
    if !((sum - 1.0).abs() <= WEIGHT_SUM_TOLERANCE) {
        out.push(Violation::WeightSum { sum });
    }
    let mut seen = BTreeSet::new();
    for idx in &card.indices {
        if !seen.insert(idx.id.as_str()) {
            out.push(Violation::DuplicateIndex { index: idx.id.clone() });
        }
        if !(idx.weight > 0.0 && idx.weight <= 1.0) {
            out.push(Violation::WeightOutOfRange {
                index: idx.id.clone(),
                weight: idx.weight,
            });
        }
        let Some(&score) = card.entries.get(&idx.id) else {
            out.push(Violation::MissingEntry { index: idx.id.clone() });
            continue;
        };
        if !(0.0..=100.0).contains(&score) {
            out.push(Violation::OutOfRange {
                index: idx.id.clone(),
                score,
            });
        } else if idx.kind == IndexKind::FiveLevel && !FIVE_LEVEL_GRID.contains(&score) {
            out.push(Violation::OffGrid {
                index: idx.id.clone(),
                score,
                allowed: FIVE_LEVEL_GRID.to_vec(),
            });
        }
    }
    for id in card.entries.keys() {
        if !seen.contains(id.as_str()) {
            out.push(Violation::UnknownEntry { index: id.clone() });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityFactor {
    pub value: f64,
    pub factor: FactorKind,
    /// Fingerprint of the scorecard the value was computed from.
    pub provenance: u64,
}

impl IntensityFactor {
    /// Three-decimal rendering used in reports.
    pub fn display(&self) -> String {
        alloc::format!("{:.3}", self.value)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("invalid scorecard: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown region {0:?}")]
    UnknownRegion(String),
}

fn join(v: &[Violation]) -> String {
    let parts: Vec<String> = v.iter().map(|x| alloc::format!("{x}")).collect();
    parts.join("; ")
}

/// Weighted average of the scorecard entries, `sum(w_n * S_n) / 100`.
pub fn compute_factor(card: &PolicyScorecard) -> Result<IntensityFactor, ScoringError> {
    let violations = validate_scorecard(card);
    if !violations.is_empty() {
        return Err(ScoringError::Invalid(violations));
    }
    let weighted: f64 = card.indices.iter().map(|i| i.weight * card.entries[&i.id]).sum();
    Ok(IntensityFactor {
        value: weighted / 100.0,
        factor: card.factor,
        provenance: card.fingerprint(),
    })
}
