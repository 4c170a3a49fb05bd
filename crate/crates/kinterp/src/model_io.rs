//! Versioned model persistence.
//!
//! Models are stored as JSON together with the normalization transform used
//! at fit time, so predictions can be mapped back to the original value
//! scale. serde_json prints floats in shortest round-trip form, so the dump
//! is exact.

use crate::dataset::NormalizationTransform;
use crate::error::{Error, Result};
use crate::interp::FittedModel;
use crate::rbf::RbfModel;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum SavedModelKind {
    Kinetic(FittedModel),
    Rbf(RbfModel),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SavedModel {
    pub schema_version: u32,
    pub transform: NormalizationTransform,
    /// Typical spacing of the training data, when a search computed it.
    pub d_typ: Option<f64>,
    /// The (θ, validation error) trace of the search that picked θ.
    pub theta_trace: Option<Vec<(f64, f64)>>,
    #[serde(flatten)]
    pub kind: SavedModelKind,
}

impl SavedModel {
    pub fn dim(&self) -> usize {
        match &self.kind {
            SavedModelKind::Kinetic(m) => m.dim(),
            SavedModelKind::Rbf(m) => m.dim(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let model: SavedModel = serde_json::from_str(&text)?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaVersion(model.schema_version));
        }
        Ok(model)
    }
}
