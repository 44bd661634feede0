//! Forecasting and policy-evaluation engine for regional renewable-energy transitions.
//!
//! The crate is `no_std` (it needs `alloc` only) and holds every numerical piece of
//! the pipeline:
//!
//! - [`ingest`]: determinant panels, standardization, label interpolation, splits,
//!   correlation screening and forward projection of determinants.
//! - [`ann`]: a small feed-forward regressor trained with a smooth-L1 loss and RMSprop.
//! - [`scoring`]: weighted policy scorecards producing ceiling and speed intensity factors.
//! - [`diffusion`]: logistic diffusion curves, intensity interpolation and inverse solves.
//! - [`scenario`]: baseline/policy/optimal scenario composition and gap analysis.
//!
//! File formats, persistence, the CLI and the HTTP service live in the `renewcast` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod ann;
pub mod diffusion;
pub mod ingest;
pub mod matrix;
pub mod scenario;
pub mod scoring;
pub mod time;

mod fingerprint;

pub use matrix::Matrix;
pub use time::YearMonth;

/// The two forecast targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum TargetKind {
    /// Annual electricity production from renewable sources (GWh).
    #[serde(rename = "RNWXYEAR")]
    Production,
    /// Installed renewable generation capacity (MWp).
    #[serde(rename = "RNCAP")]
    Capacity,
}

impl TargetKind {
    pub const ALL: [TargetKind; 2] = [TargetKind::Production, TargetKind::Capacity];

    /// Column code used in panel files.
    pub fn code(self) -> &'static str {
        match self {
            TargetKind::Production => "RNWXYEAR",
            TargetKind::Capacity => "RNCAP",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "RNWXYEAR" => Some(TargetKind::Production),
            "RNCAP" => Some(TargetKind::Capacity),
            _ => None,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            TargetKind::Production => "GWh",
            TargetKind::Capacity => "MWp",
        }
    }
}

impl core::fmt::Display for TargetKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.code())
    }
}
