//! Versioned JSON checkpoints for trained models.
//!
//! Weights are f64 and JSON numbers round-trip f64 exactly (shortest-repr
//! printing, exact parsing), so save followed by load reproduces the model
//! bit for bit. The envelope carries a format version and a kind tag so a
//! T-GCN checkpoint cannot be loaded where a baseline checkpoint is expected.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
    #[error("{path}: format version {found}, expected {expected}")]
    VersionMismatch {
        path: String,
        found: u32,
        expected: u32,
    },
    #[error("{path}: checkpoint kind `{found}`, expected `{expected}`")]
    KindMismatch {
        path: String,
        found: String,
        expected: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    format_version: u32,
    kind: String,
    payload: T,
}

pub fn save_json<T: Serialize>(
    kind: &str,
    payload: &T,
    path: &Path,
) -> Result<(), CheckpointError> {
    let envelope = Envelope {
        format_version: FORMAT_VERSION,
        kind: kind.to_string(),
        payload,
    };
    let json = serde_json::to_string_pretty(&envelope).map_err(|e| CheckpointError::Malformed {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(path, json).map_err(|e| CheckpointError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_json<T: DeserializeOwned>(kind: &str, path: &Path) -> Result<T, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|e| CheckpointError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let envelope: Envelope<T> =
        serde_json::from_str(&text).map_err(|e| CheckpointError::Malformed {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    if envelope.format_version != FORMAT_VERSION {
        return Err(CheckpointError::VersionMismatch {
            path: path.display().to_string(),
            found: envelope.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if envelope.kind != kind {
        return Err(CheckpointError::KindMismatch {
            path: path.display().to_string(),
            found: envelope.kind,
            expected: kind.to_string(),
        });
    }
    Ok(envelope.payload)
}
