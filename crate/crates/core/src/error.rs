use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input; `site` names the file/line or JSON path of the first failure.
    #[error("parse error at {site}: {message}")]
    Parse { site: String, message: String },

    #[error("invalid template: {0}")]
    Template(String),

    #[error("relation mismatch: template is for `{template}` but query asks for `{query}`")]
    RelationMismatch { template: String, query: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("id collision: {}", .0.join(", "))]
    IdCollision(Vec<String>),

    #[error("predictions reference unknown instance ids: {}", .0.join(", "))]
    UnknownPredictionIds(Vec<String>),

    #[error("duplicate predictions for instance ids: {}", .0.join(", "))]
    DuplicatePredictions(Vec<String>),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(site: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Parse { site: site.into(), message: message.to_string() }
    }
}
