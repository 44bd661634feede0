//! End-to-end scenario composition: the ANN baseline supplies the anchor share at
//! policy start, and three co-anchored logistic curves (baseline, policy, optimal)
//! extend it to the horizon. Gap analysis inverts the policy curve for a target.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ann::AnnError;
use crate::diffusion::{
    apply_intensity, calibrate, intensity_for_ceiling, intensity_for_speed, invert_for_speed, s_curve, trajectory,
    DiffusionError, DiffusionParams, Envelope, PolicyIntensity, RequiredFactor, ScenarioBounds,
};
use crate::ingest::{AnnualValue, IngestError};
use crate::scoring::{compute_factor, FactorKind, PolicyScorecard, ScoringError};
use crate::TargetKind;

mod model;

pub use model::{aggregate_annual, fit_forecast, run_baseline, FitOutcome, FitPlan, ForecastModel, TrainSettings};

/// Headroom over the target share when the ceiling itself must rise.
pub const CEILING_HEADROOM: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Ann(#[from] AnnError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("no targets requested")]
    NoTargets,
    #[error("a target is requested twice")]
    DuplicateTarget,
    #[error("correlation screen at threshold {threshold} retained no determinant")]
    NothingRetained { threshold: f64 },
    #[error("column {column:?} is scaled differently from the model's training data")]
    ScalingMismatch { column: String },
    #[error("model does not predict {target}")]
    TargetNotModelled { target: TargetKind },
    #[error("no complete year to aggregate for {target}: {detail}")]
    NoCompleteYear { target: TargetKind, detail: String },
    #[error("annual series: {0}")]
    InvalidSeries(String),
    #[error("{series} series has no value for {year}")]
    MissingYear { series: &'static str, year: i32 },
    #[error("horizon {horizon} must be after policy start {policy_start}")]
    HorizonNotAfterStart { policy_start: i32, horizon: i32 },
    #[error("bounds are for {bounds} but the scenario targets {target}")]
    BoundsTargetMismatch { bounds: TargetKind, target: TargetKind },
    #[error("{card} scorecard computes a {found} factor")]
    WrongFactorKind { card: &'static str, found: FactorKind },
    #[error("total at {year} must be positive, got {value}")]
    NonPositiveTotal { year: i32, value: f64 },
    #[error(
        "baseline share {share:.4} at policy start is not below the baseline ceiling {c_base}; \
         raise c_base (and c_op) or check the totals"
    )]
    InfeasibleAnchor { share: f64, c_base: f64 },
    #[error("baseline value at policy start must be positive, got {0}")]
    NonPositiveAnchor(f64),
    #[error("gap target must be positive, got {0}")]
    NonPositiveTarget(f64),
    #[error("target share {share:.4} cannot be hosted by any ceiling up to 1")]
    TargetExceedsTotal { share: f64 },
}

/// Values keyed by strictly increasing calendar year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AnnualValue>", into = "Vec<AnnualValue>")]
pub struct AnnualSeries {
    points: Vec<AnnualValue>,
}

impl AnnualSeries {
    pub fn new(points: Vec<AnnualValue>) -> Result<Self, ScenarioError> {
        for w in points.windows(2) {
            if w[1].year <= w[0].year {
                return Err(ScenarioError::InvalidSeries(format!(
                    "year {} follows {}",
                    w[1].year, w[0].year
                )));
            }
        }
        if let Some(p) = points.iter().find(|p| !p.value.is_finite()) {
            return Err(ScenarioError::InvalidSeries(format!("non-finite value at {}", p.year)));
        }
        Ok(AnnualSeries { points })
    }

    pub fn from_pairs(pairs: &[(i32, f64)]) -> Result<Self, ScenarioError> {
        Self::new(pairs.iter().map(|&(year, value)| AnnualValue { year, value }).collect())
    }

    pub fn points(&self) -> &[AnnualValue] {
        &self.points
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        self.points
            .binary_search_by_key(&year, |p| p.year)
            .ok()
            .map(|i| self.points[i].value)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TryFrom<Vec<AnnualValue>> for AnnualSeries {
    type Error = ScenarioError;

    fn try_from(points: Vec<AnnualValue>) -> Result<Self, Self::Error> {
        AnnualSeries::new(points)
    }
}

impl From<AnnualSeries> for Vec<AnnualValue> {
    fn from(series: AnnualSeries) -> Self {
        series.points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub region: String,
    pub target: TargetKind,
    /// Year at which the policy takes effect (curve time 0).
    pub policy_start: i32,
    pub horizon: i32,
    pub intensity: PolicyIntensity,
    /// Total consumption (production target) or total capacity (capacity target).
    pub totals: AnnualSeries,
    pub bounds: ScenarioBounds,
}

/// Intensity factors from a ceiling card and a speed card.
pub fn intensity_from_scorecards(
    ceiling: &PolicyScorecard,
    speed: &PolicyScorecard,
) -> Result<PolicyIntensity, ScenarioError> {
    let f_c = compute_factor(ceiling)?;
    let f_p = compute_factor(speed)?;
    if f_c.factor != FactorKind::Ceiling {
        return Err(ScenarioError::WrongFactorKind {
            card: "ceiling",
            found: f_c.factor,
        });
    }
    if f_p.factor != FactorKind::Speed {
        return Err(ScenarioError::WrongFactorKind {
            card: "speed",
            found: f_p.factor,
        });
    }
    let source = format!(
        "scorecards ceiling:{:016x} speed:{:016x}",
        f_c.provenance, f_p.provenance
    );
    Ok(PolicyIntensity::new(f_c.value, f_p.value)?.with_source(source))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Baseline,
    Policy,
    Optimal,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [ScenarioKind::Baseline, ScenarioKind::Policy, ScenarioKind::Optimal];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Baseline => "baseline",
            ScenarioKind::Policy => "policy",
            ScenarioKind::Optimal => "optimal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioCurve {
    pub params: DiffusionParams,
    pub shares: Vec<f64>,
    /// Absolute units: share times the year's total.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetGap {
    pub target_value: f64,
    /// Policy scenario value at the horizon.
    pub predicted_value: f64,
    /// `target_value - predicted_value`.
    pub shortfall: f64,
    pub target_share: f64,
    /// Ceiling the speed inversion ran against.
    pub ceiling: f64,
    pub required_p: f64,
    pub required_f_p: RequiredFactor,
    /// Present when the policy ceiling cannot host the target.
    pub required_f_c: Option<RequiredFactor>,
}

impl TargetGap {
    pub fn reachable(&self) -> bool {
        self.required_f_p.in_envelope() && self.required_f_c.is_none_or(|f| f.in_envelope())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioReport {
    pub region: String,
    pub target: TargetKind,
    pub policy_start: i32,
    pub horizon: i32,
    pub bounds: ScenarioBounds,
    pub intensity: PolicyIntensity,
    /// ANN baseline share at policy start, shared by all three curves.
    pub anchor_share: f64,
    pub years: Vec<i32>,
    pub totals: Vec<f64>,
    /// ANN baseline forecast on the grid where available.
    pub ann: Vec<Option<f64>>,
    pub baseline: ScenarioCurve,
    pub policy: ScenarioCurve,
    pub optimal: ScenarioCurve,
    pub gap: Option<TargetGap>,
}

impl ScenarioReport {
    pub fn curve(&self, kind: ScenarioKind) -> &ScenarioCurve {
        match kind {
            ScenarioKind::Baseline => &self.baseline,
            ScenarioKind::Policy => &self.policy,
            ScenarioKind::Optimal => &self.optimal,
        }
    }

    /// Shares on a finer grid, e.g. `1.0 / 12.0` for monthly points. The first
    /// point is the anchor share, as in the annual grid.
    pub fn dense_shares(&self, kind: ScenarioKind, step: f64) -> Result<Vec<(f64, f64)>, ScenarioError> {
        let span = f64::from(self.horizon - self.policy_start);
        Ok(trajectory(&self.curve(kind).params, 0.0, span, step)?
            .into_iter()
            .map(|(t, r)| {
                let r = if t == 0.0 { self.anchor_share } else { r };
                (f64::from(self.policy_start) + t, r)
            })
            .collect())
    }

    fn horizon_total(&self) -> f64 {
        *self.totals.last().expect("grid is non-empty")
    }
}

fn validate_spec(spec: &ScenarioSpec) -> Result<(), ScenarioError> {
    if spec.horizon <= spec.policy_start {
        return Err(ScenarioError::HorizonNotAfterStart {
            policy_start: spec.policy_start,
            horizon: spec.horizon,
        });
    }
    if spec.bounds.target != spec.target {
        return Err(ScenarioError::BoundsTargetMismatch {
            bounds: spec.bounds.target,
            target: spec.target,
        });
    }
    spec.bounds.validate()?;
    spec.intensity.validate()?;
    Ok(())
}

/// Builds the three scenario curves on the annual grid `policy_start..=horizon`.
pub fn compose_scenarios(spec: &ScenarioSpec, baseline: &AnnualSeries) -> Result<ScenarioReport, ScenarioError> {
    validate_spec(spec)?;
    let years: Vec<i32> = (spec.policy_start..=spec.horizon).collect();
    let totals: Vec<f64> = years
        .iter()
        .map(|&year| {
            let value = spec
                .totals
                .get(year)
                .ok_or(ScenarioError::MissingYear { series: "totals", year })?;
            if value > 0.0 {
                Ok(value)
            } else {
                Err(ScenarioError::NonPositiveTotal { year, value })
            }
        })
        .collect::<Result<_, _>>()?;

    let start_value = baseline.get(spec.policy_start).ok_or(ScenarioError::MissingYear {
        series: "baseline",
        year: spec.policy_start,
    })?;
    if !(start_value > 0.0) {
        return Err(ScenarioError::NonPositiveAnchor(start_value));
    }
    let anchor_share = start_value / totals[0];
    if anchor_share >= spec.bounds.c_base {
        return Err(ScenarioError::InfeasibleAnchor {
            share: anchor_share,
            c_base: spec.bounds.c_base,
        });
    }

    let curve = |(c, p): (f64, f64)| -> Result<ScenarioCurve, ScenarioError> {
        let params = calibrate(c, p, 0.0, anchor_share)?;
        // The first grid point is the anchor itself; pin it so that rounding in
        // the calibration cannot reorder the curves there.
        let shares: Vec<f64> = years
            .iter()
            .map(|&y| match y - spec.policy_start {
                0 => anchor_share,
                t => s_curve(&params, f64::from(t)),
            })
            .collect();
        let values = shares.iter().zip(&totals).map(|(s, k)| s * k).collect();
        Ok(ScenarioCurve { params, shares, values })
    };

    Ok(ScenarioReport {
        region: spec.region.clone(),
        target: spec.target,
        policy_start: spec.policy_start,
        horizon: spec.horizon,
        bounds: spec.bounds,
        intensity: spec.intensity.clone(),
        anchor_share,
        ann: years.iter().map(|&y| baseline.get(y)).collect(),
        baseline: curve(spec.bounds.baseline())?,
        policy: curve(apply_intensity(&spec.bounds, &spec.intensity))?,
        optimal: curve(spec.bounds.optimal())?,
        years,
        totals,
        gap: None,
    })
}

/// What it takes for the policy curve to reach `target_value` at the horizon.
///
/// The speed is inverted against the policy ceiling. If the target share is at or
/// above that ceiling, the ceiling is raised to `CEILING_HEADROOM` times the
/// target share, the matching `f_c` is reported, and the speed is inverted against
/// the raised ceiling. A raised ceiling beyond the optimal one marks the speed as
/// unreachable too. Nothing is clamped.
pub fn analyze_gap(report: &ScenarioReport, target_value: f64) -> Result<TargetGap, ScenarioError> {
    if !(target_value > 0.0 && target_value.is_finite()) {
        return Err(ScenarioError::NonPositiveTarget(target_value));
    }
    let predicted_value = *report.policy.values.last().expect("grid is non-empty");
    let target_share = target_value / report.horizon_total();
    let span = f64::from(report.horizon - report.policy_start);

    let mut ceiling = report.policy.params.c;
    let mut required_f_c = None;
    if target_share >= ceiling {
        ceiling = CEILING_HEADROOM * target_share;
        if ceiling > 1.0 {
            return Err(ScenarioError::TargetExceedsTotal { share: target_share });
        }
        required_f_c = Some(intensity_for_ceiling(&report.bounds, ceiling)?);
    }

    // A target at or under the anchor share is met with any speed.
    let required_p = if target_share <= report.anchor_share {
        0.0
    } else {
        invert_for_speed(ceiling, (0.0, report.anchor_share), (span, target_share))?
    };
    let mut required_f_p = intensity_for_speed(&report.bounds, required_p)?;
    if required_f_c.is_some_and(|f: RequiredFactor| f.envelope == Envelope::AboveOptimal) {
        required_f_p.envelope = Envelope::Unreachable;
    }

    Ok(TargetGap {
        target_value,
        predicted_value,
        shortfall: target_value - predicted_value,
        target_share,
        ceiling,
        required_p,
        required_f_p,
        required_f_c,
    })
}

/// The intensity a gap analysis asks for, when it lies in [0, 1].
pub fn required_intensity(report: &ScenarioReport, gap: &TargetGap) -> Option<PolicyIntensity> {
    if !gap.reachable() {
        return None;
    }
    let f_c = gap.required_f_c.map_or(report.intensity.f_c, |f| f.value);
    PolicyIntensity::new(f_c, gap.required_f_p.value).ok()
}

#[cfg(test)]
mod tests;
