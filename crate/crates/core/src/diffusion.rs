//! Logistic diffusion curves, intensity interpolation and the inverse solves behind
//! gap analysis. Shares are fractions of the regional total and time is in years.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use libm::{exp, log};
use serde::{Deserialize, Serialize};

use crate::TargetKind;

pub const DEFAULT_C_BASE: f64 = 0.15;
pub const DEFAULT_C_OP: f64 = 0.80;
pub const P_OP_PRODUCTION: f64 = 0.162;
pub const P_OP_CAPACITY: f64 = 0.120;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffusionError {
    #[error("invalid scenario bounds: {0}")]
    InvalidBounds(&'static str),
    #[error("invalid diffusion parameters: {0}")]
    InvalidParams(&'static str),
    #[error("intensity factor {name} = {value} is outside [0, 1]")]
    IntensityOutOfRange { name: &'static str, value: f64 },
    #[error("anchor share {share} is not below the ceiling {ceiling}")]
    InfeasibleAnchor { share: f64, ceiling: f64 },
    #[error("anchor share must be positive, got {0}")]
    NonPositiveAnchor(f64),
    #[error("target share {share} is not below the ceiling {ceiling}; the ceiling has to rise")]
    InfeasibleTarget { share: f64, ceiling: f64 },
    #[error("target share {target} is below the anchor share {anchor}")]
    TargetBelowAnchor { anchor: f64, target: f64 },
    #[error("target time {target} must come after anchor time {anchor}")]
    TargetNotAfterAnchor { anchor: f64, target: f64 },
    #[error("speed range is empty (p_op equals p_base)")]
    DegenerateSpeedRange,
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
}

/// Baseline and optimal (c, p) corners for one target variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBounds {
    pub target: TargetKind,
    pub c_base: f64,
    pub c_op: f64,
    pub p_base: f64,
    pub p_op: f64,
}

impl ScenarioBounds {
    /// Default corners: c_base 0.15, c_op 0.80, p_op per target, p_base = p_op / 3.
    pub fn for_target(target: TargetKind) -> Self {
        let p_op = match target {
            TargetKind::Production => P_OP_PRODUCTION,
            TargetKind::Capacity => P_OP_CAPACITY,
        };
        ScenarioBounds {
            target,
            c_base: DEFAULT_C_BASE,
            c_op: DEFAULT_C_OP,
            p_base: p_op / 3.0,
            p_op,
        }
    }

    pub fn validate(&self) -> Result<(), DiffusionError> {
        let all_finite = [self.c_base, self.c_op, self.p_base, self.p_op]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(DiffusionError::InvalidBounds("values must be finite"));
        }
        if !(0.0 < self.c_base && self.c_base < self.c_op && self.c_op <= 1.0) {
            return Err(DiffusionError::InvalidBounds("need 0 < c_base < c_op <= 1"));
        }
        if !(0.0 < self.p_base && self.p_base < self.p_op) {
            return Err(DiffusionError::InvalidBounds("need 0 < p_base < p_op"));
        }
        Ok(())
    }

    pub fn baseline(&self) -> (f64, f64) {
        (self.c_base, self.p_base)
    }

    pub fn optimal(&self) -> (f64, f64) {
        (self.c_op, self.p_op)
    }
}

/// One logistic curve `R(t) = c / (1 + exp(-p (t - t0)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionParams {
    pub c: f64,
    pub p: f64,
    pub t0: f64,
}

impl DiffusionParams {
    pub fn new(c: f64, p: f64, t0: f64) -> Result<Self, DiffusionError> {
        let params = DiffusionParams { c, p, t0 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), DiffusionError> {
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(DiffusionError::InvalidParams("ceiling must be in (0, 1]"));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(DiffusionError::InvalidParams("speed must be positive"));
        }
        if !self.t0.is_finite() {
            return Err(DiffusionError::InvalidParams("t0 must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyIntensity {
    pub f_c: f64,
    pub f_p: f64,
    /// Free-form note on where the factors came from (scorecard fingerprint, "explicit", ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl PolicyIntensity {
    pub fn new(f_c: f64, f_p: f64) -> Result<Self, DiffusionError> {
        let intensity = PolicyIntensity { f_c, f_p, source: None };
        intensity.validate()?;
        Ok(intensity)
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn validate(&self) -> Result<(), DiffusionError> {
        for (name, value) in [("f_c", self.f_c), ("f_p", self.f_p)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(DiffusionError::IntensityOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

pub fn s_curve(params: &DiffusionParams, t: f64) -> f64 {
    params.c / (1.0 + exp(-params.p * (t - params.t0)))
}

/// Interpolates ceiling and speed between the baseline and optimal corners.
pub fn apply_intensity(bounds: &ScenarioBounds, intensity: &PolicyIntensity) -> (f64, f64) {
    let c = bounds.c_base + (bounds.c_op - bounds.c_base) * intensity.f_c;
    let p = bounds.p_base + (bounds.p_op - bounds.p_base) * intensity.f_p;
    // Pin the corners so that (0,0) and (1,1) reproduce them bit for bit.
    let c = if intensity.f_c == 1.0 { bounds.c_op } else { c };
    let p = if intensity.f_p == 1.0 { bounds.p_op } else { p };
    (c, p)
}

/// Chooses `t0` so that the curve passes through `(t_a, share)`.
pub fn calibrate(c: f64, p: f64, t_a: f64, share: f64) -> Result<DiffusionParams, DiffusionError> {
    DiffusionParams::new(c, p, 0.0)?;
    if !(share > 0.0) {
        return Err(DiffusionError::NonPositiveAnchor(share));
    }
    if share >= c {
        return Err(DiffusionError::InfeasibleAnchor { share, ceiling: c });
    }
    Ok(DiffusionParams {
        c,
        p,
        t0: t_a + log(c / share - 1.0) / p,
    })
}

/// Evaluates the curve on `start, start + step, ...` up to and including `end`.
pub fn trajectory(
    params: &DiffusionParams,
    start: f64,
    end: f64,
    step: f64,
) -> Result<Vec<(f64, f64)>, DiffusionError> {
    Ok(grid(start, end, step)?
        .into_iter()
        .map(|t| (t, s_curve(params, t)))
        .collect())
}

/// Inclusive time grid. Points are `start + k * step`; a final point within a
/// millionth of a step of `end` is snapped onto it.
pub fn grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>, DiffusionError> {
    if !(start.is_finite() && end.is_finite()) {
        return Err(DiffusionError::InvalidGrid("bounds must be finite"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(DiffusionError::InvalidGrid("step must be positive"));
    }
    if start > end {
        return Err(DiffusionError::InvalidGrid("start must not exceed end"));
    }
    let n = libm::floor((end - start) / step + 1e-6) as usize;
    let mut out: Vec<f64> = (0..=n).map(|k| start + k as f64 * step).collect();
    if let Some(last) = out.last_mut() {
        if libm::fabs(*last - end) <= 1e-6 * step {
            *last = end;
        }
    }
    Ok(out)
}

/// Speed that carries a curve with ceiling `c` from the anchor to the target point.
/// Returns 0 when the target share equals the anchor share.
pub fn invert_for_speed(c: f64, anchor: (f64, f64), target: (f64, f64)) -> Result<f64, DiffusionError> {
    let (t_a, r_a) = anchor;
    let (t_t, r_t) = target;
    if !(c > 0.0 && c <= 1.0) {
        return Err(DiffusionError::InvalidParams("ceiling must be in (0, 1]"));
    }
    if !(r_a > 0.0) {
        return Err(DiffusionError::NonPositiveAnchor(r_a));
    }
    if r_a >= c {
        return Err(DiffusionError::InfeasibleAnchor { share: r_a, ceiling: c });
    }
    if r_t >= c {
        return Err(DiffusionError::InfeasibleTarget { share: r_t, ceiling: c });
    }
    if !(t_t > t_a) {
        return Err(DiffusionError::TargetNotAfterAnchor {
            anchor: t_a,
            target: t_t,
        });
    }
    if r_t < r_a {
        return Err(DiffusionError::TargetBelowAnchor {
            anchor: r_a,
            target: r_t,
        });
    }
    if r_t == r_a {
        return Ok(0.0);
    }
    Ok((log(c / r_a - 1.0) - log(c / r_t - 1.0)) / (t_t - t_a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    Within,
    /// More than optimal-strength policy would be needed.
    AboveOptimal,
    /// The target is met with less than baseline effort.
    BelowBaseline,
    /// The target needs a ceiling above the optimal one, so no speed suffices.
    Unreachable,
}

/// An inverse intensity result, never clamped to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequiredFactor {
    pub value: f64,
    pub envelope: Envelope,
}

impl RequiredFactor {
    pub fn classify(value: f64) -> Self {
        let envelope = if value > 1.0 {
            Envelope::AboveOptimal
        } else if value < 0.0 {
            Envelope::BelowBaseline
        } else {
            Envelope::Within
        };
        RequiredFactor { value, envelope }
    }

    pub fn in_envelope(&self) -> bool {
        self.envelope == Envelope::Within
    }
}

impl fmt::Display for RequiredFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.envelope {
            Envelope::Within => write!(f, "{:.4}", self.value),
            Envelope::AboveOptimal => write!(f, "{:.4} (above optimal)", self.value),
            Envelope::BelowBaseline => write!(f, "{:.4} (below baseline)", self.value),
            Envelope::Unreachable => write!(f, "{:.4} (unreachable: ceiling above optimal)", self.value),
        }
    }
}

pub fn intensity_for_speed(bounds: &ScenarioBounds, p: f64) -> Result<RequiredFactor, DiffusionError> {
    let span = bounds.p_op - bounds.p_base;
    if span == 0.0 {
        return Err(DiffusionError::DegenerateSpeedRange);
    }
    Ok(RequiredFactor::classify((p - bounds.p_base) / span))
}

pub fn intensity_for_ceiling(bounds: &ScenarioBounds, c: f64) -> Result<RequiredFactor, DiffusionError> {
    let span = bounds.c_op - bounds.c_base;
    if span == 0.0 {
        return Err(DiffusionError::InvalidBounds("ceiling range is empty"));
    }
    Ok(RequiredFactor::classify((c - bounds.c_base) / span))
}
