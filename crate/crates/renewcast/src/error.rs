use std::path::{Path, PathBuf};

use renewcast_core::ann::AnnError;
use renewcast_core::diffusion::DiffusionError;
use renewcast_core::ingest::IngestError;
use renewcast_core::scenario::ScenarioError;
use renewcast_core::scoring::ScoringError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed file or request body (syntax or shape).
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{origin}: {source}")]
    Ingest { origin: String, source: IngestError },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Ann(#[from] AnnError),
    #[error(transparent)]
    Model(#[from] crate::model_file::ModelFileError),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    /// Structurally valid document with contradictory or missing parts.
    #[error("{0}")]
    Document(String),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(origin: impl std::fmt::Display, message: impl std::fmt::Display) -> Self {
        Error::Parse {
            origin: origin.to_string(),
            message: message.to_string(),
        }
    }

    pub(crate) fn ingest(origin: impl std::fmt::Display, source: IngestError) -> Self {
        Error::Ingest {
            origin: origin.to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
