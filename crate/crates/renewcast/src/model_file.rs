//! Versioned JSON container for trained forecast models.

use std::path::Path;

use renewcast_core::scenario::ForecastModel;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::{read_file, write_file};

pub const MODEL_FORMAT: &str = "renewcast-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("{origin}: not a model file ({detail})")]
    Corrupt { origin: String, detail: String },
    #[error("{origin}: format {found:?} is not {MODEL_FORMAT:?}")]
    WrongFormat { origin: String, found: String },
    #[error("{origin}: model file version {found} is not supported (expected {MODEL_VERSION})")]
    UnsupportedVersion { origin: String, found: u32 },
}

#[derive(Serialize)]
struct Envelope<'a> {
    format: &'static str,
    version: u32,
    model: &'a ForecastModel,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Body {
    #[allow(dead_code)]
    format: String,
    #[allow(dead_code)]
    version: u32,
    model: ForecastModel,
}

pub fn model_to_json(model: &ForecastModel) -> String {
    let env = Envelope {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        model,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str, origin: &str) -> Result<ForecastModel, ModelFileError> {
    let corrupt = |e: serde_json::Error| ModelFileError::Corrupt {
        origin: origin.into(),
        detail: e.to_string(),
    };
    let header: Header = serde_json::from_str(text).map_err(corrupt)?;
    if header.format != MODEL_FORMAT {
        return Err(ModelFileError::WrongFormat {
            origin: origin.into(),
            found: header.format,
        });
    }
    if header.version != MODEL_VERSION {
        return Err(ModelFileError::UnsupportedVersion {
            origin: origin.into(),
            found: header.version,
        });
    }
    let body: Body = serde_json::from_str(text).map_err(corrupt)?;
    Ok(body.model)
}

pub fn save_model(model: &ForecastModel, path: &Path) -> Result<()> {
    write_file(path, &model_to_json(model))
}

pub fn load_model(path: &Path) -> Result<ForecastModel> {
    let text = read_file(path)?;
    Ok(model_from_json(&text, &path.display().to_string())?)
}

/// Catalog id of a model reference: the file stem, so `models/sg.json` and `sg`
/// name the same model.
pub fn model_id(reference: &str) -> String {
    Path::new(reference)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(reference)
        .to_string()
}
