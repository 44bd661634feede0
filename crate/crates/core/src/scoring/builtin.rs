//! Built-in evaluation matrices and the case-study scorecards for three regions.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EvaluationIndex, FactorKind, IndexKind, PolicyScorecard, ScoringError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Singapore,
    London,
    California,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Singapore, Region::London, Region::California];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Singapore => "singapore",
            Region::London => "london",
            Region::California => "california",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Singapore => "Singapore",
            Region::London => "London",
            Region::California => "California",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Region {
    type Err = ScoringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Region::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ScoringError::UnknownRegion(s.into()))
    }
}

struct Row {
    id: &'static str,
    description: &'static str,
    kind: IndexKind,
    weight: f64,
    group: &'static str,
    rubric: &'static str,
    /// Singapore, London, California.
    scores: [f64; 3],
}

const CEILING_A: &str = "A. Long-term ambition for renewable energy development";
const CEILING_B: &str = "B. Electricity market structure and regulation";
const SPEED_A: &str = "A. Mid-term ambition for renewable energy development";
const SPEED_B: &str = "B. Adoption of renewable energy policy";
const SPEED_C: &str = "C. Electricity market structure and climate change performance";

const CEILING_ROWS: [Row; 4] = [
    Row {
        id: "long_term_mixture_ambition",
        description: "Long-term (2050) energy mixture transition ambition",
        kind: IndexKind::FiveLevel,
        weight: 0.30,
        group: CEILING_A,
        rubric: "100 binding, ambitious and concrete strategy; 75 binding and ambitious, not concrete; \
                 50 strategy without concreteness or ambition; 25 only a 2030 plan; 0 none",
        scores: [25.0, 100.0, 100.0],
    },
    Row {
        id: "long_term_re_target",
        description: "Long-term (2050) renewable generation target",
        kind: IndexKind::LinearScaled,
        weight: 0.30,
        group: CEILING_A,
        rubric: "linear: 100 = 100% renewables by 2050; 0 = at most 1% or no target",
        scores: [43.0, 50.0, 100.0],
    },
    Row {
        id: "grid_connection_permission",
        description: "Grid-connection permission",
        kind: IndexKind::FiveLevel,
        weight: 0.20,
        group: CEILING_B,
        rubric: "100 permitted; 50 partially permitted; 0 not permitted",
        scores: [100.0, 100.0, 100.0],
    },
    Row {
        id: "demand_side_management",
        description: "Demand-side management",
        kind: IndexKind::FiveLevel,
        weight: 0.20,
        group: CEILING_B,
        rubric: "100 market design and regulatory management; 50 one of the two; 0 neither \
                 (market design: time-of-use tariffs or smart meter billing; regulatory: energy as a service)",
        scores: [50.0, 100.0, 100.0],
    },
];

const SPEED_ROWS: [Row; 9] = [
    Row {
        id: "mid_term_re_target",
        description: "Mid-term (2030) renewable generation target",
        kind: IndexKind::LinearScaled,
        weight: 0.10,
        group: SPEED_A,
        rubric: "linear: 100 = 100% renewables by 2030; 0 = at most 1% or no target",
        scores: [8.0, 30.0, 50.0],
    },
    Row {
        id: "dirty_energy_elimination",
        description: "Dirty energy elimination",
        kind: IndexKind::FiveLevel,
        weight: 0.10,
        group: SPEED_A,
        rubric: "100 fixed fossil phase-out strategy; 50 under discussion; 0 none",
        scores: [100.0, 100.0, 100.0],
    },
    Row {
        id: "obligations_certificates",
        description: "Obligations and certificates policy (direct)",
        kind: IndexKind::FiveLevel,
        weight: 0.18,
        group: SPEED_B,
        rubric: "100 adopted, relaxing regulation; 75 adopted; 50 preliminary, relaxing; 25 preliminary; 0 none",
        scores: [0.0, 75.0, 100.0],
    },
    Row {
        id: "feed_in_tariff",
        description: "Feed-in tariff policy (direct)",
        kind: IndexKind::FiveLevel,
        weight: 0.18,
        group: SPEED_B,
        rubric: "100 adopted, no tariff cuts foreseen; 75 adopted, cuts foreseen; 50 initial, no cuts; \
                 25 initial, cuts; 0 none",
        scores: [50.0, 75.0, 75.0],
    },
    Row {
        id: "financial_incentives",
        description: "Financial incentives policy (direct)",
        kind: IndexKind::FiveLevel,
        weight: 0.14,
        group: SPEED_B,
        rubric: "100 adopted, no subsidy cuts foreseen; 75 adopted, cuts foreseen; 50 initial, no cuts; \
                 25 initial, cuts; 0 none",
        scores: [50.0, 75.0, 75.0],
    },
    Row {
        id: "integrating_policy",
        description: "Integrating policy",
        kind: IndexKind::FiveLevel,
        weight: 0.05,
        group: SPEED_B,
        rubric: "100 mature; 50 preliminary; 0 none",
        scores: [50.0, 100.0, 100.0],
    },
    Row {
        id: "enabling_policy",
        description: "Enabling policy",
        kind: IndexKind::FiveLevel,
        weight: 0.05,
        group: SPEED_B,
        rubric: "100 mature; 50 preliminary; 0 none",
        scores: [100.0, 100.0, 100.0],
    },
    Row {
        id: "smart_grid_index",
        description: "Smart Grid Index",
        kind: IndexKind::ContinuousIndex,
        weight: 0.10,
        group: SPEED_C,
        rubric: "0-100 from the 2019 smart grid benchmarking",
        scores: [66.0, 89.0, 93.0],
    },
    Row {
        id: "climate_change_performance",
        description: "Climate change performance",
        kind: IndexKind::ContinuousIndex,
        weight: 0.10,
        group: SPEED_C,
        rubric: "0-100 from the 2020 climate change performance index (Singapore uses China's level)",
        scores: [48.16, 69.80, 18.60],
    },
];

fn rows(kind: FactorKind) -> &'static [Row] {
    match kind {
        FactorKind::Ceiling => &CEILING_ROWS,
        FactorKind::Speed => &SPEED_ROWS,
    }
}

/// The built-in evaluation matrix: four ceiling indices or nine speed indices.
pub fn builtin_matrix(kind: FactorKind) -> Vec<EvaluationIndex> {
    rows(kind)
        .iter()
        .map(|r| EvaluationIndex {
            id: r.id.into(),
            description: r.description.into(),
            kind: r.kind,
            weight: r.weight,
            group: r.group.into(),
            rubric: r.rubric.split_whitespace().collect::<Vec<_>>().join(" "),
        })
        .collect()
}

pub fn builtin_scorecard(region: Region, kind: FactorKind) -> PolicyScorecard {
    let column = match region {
        Region::Singapore => 0,
        Region::London => 1,
        Region::California => 2,
    };
    let entries: BTreeMap<String, f64> = rows(kind)
        .iter()
        .map(|r| (r.id.to_string(), r.scores[column]))
        .collect();
    PolicyScorecard {
        region: region.name().into(),
        factor: kind,
        indices: builtin_matrix(kind),
        entries,
    }
}

/// Factor values as originally published for the built-in scorecards. These are
/// reference constants, not computed. Singapore's published speed factor (0.527)
/// does not equal the weighted sum of its own entries (0.457).
pub fn published_factor(region: Region, kind: FactorKind) -> f64 {
    match (region, kind) {
        (Region::Singapore, FactorKind::Ceiling) => 0.504,
        (Region::London, FactorKind::Ceiling) => 0.850,
        (Region::California, FactorKind::Ceiling) => 1.0,
        (Region::Singapore, FactorKind::Speed) => 0.527,
        (Region::London, FactorKind::Speed) => 0.764,
        (Region::California, FactorKind::Speed) => 0.782,
    }
}
