//! JSON model files.
//!
//! Layout: `{version, task, params, n_features, beta: {spec, values}, base_score,
//! trees, checksum}` where `values` is β in row-major order, `trees` is
//! `rounds × q` node arrays, and `checksum` is the SHA-256 of the same
//! document serialized without the checksum field.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BoostParams, Ensemble};
use crate::beta::{BetaMatrix, BetaSpec};
use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::tree::Tree;

pub const MODEL_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BetaRecord {
    spec: BetaSpec,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    version: u64,
    task: Task,
    params: BoostParams,
    n_features: usize,
    beta: BetaRecord,
    base_score: f64,
    trees: Vec<Vec<Tree>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    checksum: Option<String>,
}

fn digest(record: &ModelRecord) -> Result<String> {
    let body = serde_json::to_string(record).map_err(|e| Error::Schema(e.to_string()))?;
    let hash = Sha256::digest(body.as_bytes());
    Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
}

impl Ensemble {
    pub fn to_json(&self) -> Result<String> {
        let mut record = ModelRecord {
            version: MODEL_VERSION,
            task: self.task(),
            params: self.params,
            n_features: self.n_features,
            beta: BetaRecord {
                spec: *self.beta.spec(),
                values: self.beta.values().iter().copied().collect(),
            },
            base_score: self.base_score,
            trees: self.trees.clone(),
            checksum: None,
        };
        record.checksum = Some(digest(&record)?);
        serde_json::to_string(&record).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("invalid JSON: {e}")))?;
        let version = value
            .get("version")
            .ok_or_else(|| Error::Schema("missing version field".into()))?;
        match version.as_u64() {
            Some(MODEL_VERSION) => {}
            Some(found) => {
                return Err(Error::Version {
                    found,
                    expected: MODEL_VERSION,
                })
            }
            None => return Err(Error::Schema(format!("version {version} is not an integer"))),
        }
        let mut record: ModelRecord =
            serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
        let stored = record
            .checksum
            .take()
            .ok_or_else(|| Error::Schema("missing checksum".into()))?;
        if digest(&record)? != stored {
            return Err(Error::Checksum);
        }
        if record.task != record.params.loss.task() {
            return Err(Error::Schema(format!(
                "task {} does not match loss {}",
                record.task, record.params.loss
            )));
        }
        let spec = record.beta.spec;
        let values = Array2::from_shape_vec((spec.q, spec.d), record.beta.values)
            .map_err(|_| Error::Schema(format!("beta values do not fill {} x {}", spec.q, spec.d)))?;
        let beta = BetaMatrix::from_parts(spec, values)?;
        Ensemble::from_parts(
            record.trees,
            beta,
            record.base_score,
            record.params,
            record.n_features,
        )
    }
}

pub fn save_model(model: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_json()?).map_err(|e| Error::io(path, e))
}

/// Reads a model file; nothing is returned unless the whole file validates.
pub fn load_model(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ensemble::from_json(&text)
}
