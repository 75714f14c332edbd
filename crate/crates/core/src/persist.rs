//! Versioned JSON container for a trained model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cnn::NetworkParams;
use crate::config::parse_config;
use crate::error::{Error, Result};
use crate::evaluation::TrainedModel;
use crate::gbdt::BoostedEnsemble;

pub const MODEL_FORMAT: &str = "hcnlda-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Bundle {
    format: String,
    version: u32,
    /// Resolved configuration in `key = value` form.
    config: String,
    cnn: NetworkParams,
    gbdt: BoostedEnsemble,
}

pub fn model_to_json(model: &TrainedModel) -> Result<String> {
    let bundle = Bundle {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        config: model.config.to_config_string(),
        cnn: model.cnn.clone(),
        gbdt: model.gbdt.clone(),
    };
    serde_json::to_string_pretty(&bundle).map_err(|e| Error::Model(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<TrainedModel> {
    let bundle: Bundle = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
    if bundle.format != MODEL_FORMAT {
        return Err(Error::Model(format!("unexpected format '{}'", bundle.format)));
    }
    if bundle.version != MODEL_VERSION {
        return Err(Error::Model(format!(
            "version {} not supported (expected {MODEL_VERSION})",
            bundle.version
        )));
    }
    bundle.cnn.validate()?;
    if bundle.gbdt.n_features != bundle.cnn.spec.hidden_units {
        return Err(Error::Model(format!(
            "ensemble expects {} features, network yields {}",
            bundle.gbdt.n_features, bundle.cnn.spec.hidden_units
        )));
    }
    Ok(TrainedModel {
        config: parse_config(&bundle.config)?,
        cnn: bundle.cnn,
        gbdt: bundle.gbdt,
    })
}

pub fn save_model(path: impl AsRef<Path>, model: &TrainedModel) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    model_from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
