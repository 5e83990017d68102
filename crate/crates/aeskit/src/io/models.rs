use std::path::Path;

use aeskit_core::gbdt::{self, Forest};
use aeskit_core::mlp::{MlpManifest, MlpModel};
use aeskit_core::prediction::Prediction;
use aeskit_core::FeatureMatrix;

use super::{read_bytes, read_json, write_bytes, write_json};
use crate::error::{CliError, CliResult, Context};

pub const FOREST_FILE: &str = "forest.json";
pub const MLP_FILE: &str = "mlp.json";

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Gbdt(Forest),
    Mlp(MlpModel),
}

impl TrainedModel {
    pub fn feature_names(&self) -> &[String] {
        match self {
            TrainedModel::Gbdt(f) => &f.feature_names,
            TrainedModel::Mlp(m) => &m.feature_names,
        }
    }

    pub fn predict(&self, features: &FeatureMatrix) -> CliResult<Prediction> {
        match self {
            TrainedModel::Gbdt(f) => gbdt::predict(f, features).context("gbdt predict"),
            TrainedModel::Mlp(m) => m.predict(features).context("mlp predict"),
        }
    }
}

/// GBDT: `<dir>/forest.json`. MLP: `<dir>/mlp.json` plus one f32 blob per tensor.
pub fn save_model(dir: &Path, model: &TrainedModel) -> CliResult<()> {
    match model {
        TrainedModel::Gbdt(f) => write_json(&dir.join(FOREST_FILE), f),
        TrainedModel::Mlp(m) => {
            let (manifest, blobs) = m.to_artifact("mlp");
            for (name, bytes) in blobs {
                write_bytes(&dir.join(name), &bytes)?;
            }
            write_json(&dir.join(MLP_FILE), &manifest)
        }
    }
}

pub fn load_model(dir: &Path) -> CliResult<TrainedModel> {
    let forest = dir.join(FOREST_FILE);
    let mlp = dir.join(MLP_FILE);
    if forest.is_file() {
        Ok(TrainedModel::Gbdt(read_json(&forest)?))
    } else if mlp.is_file() {
        let manifest: MlpManifest = read_json(&mlp)?;
        let mut io_error = None;
        let model = MlpModel::from_artifact(manifest, |name| {
            read_bytes(&dir.join(name)).map_err(|e| {
                let msg = e.to_string();
                io_error = Some(e);
                aeskit_core::Error::invalid(msg)
            })
        });
        if let Some(e) = io_error {
            return Err(e);
        }
        Ok(TrainedModel::Mlp(model.context(mlp.display().to_string())?))
    } else {
        Err(CliError::format(dir, format!("no {FOREST_FILE} or {MLP_FILE} in model directory")))
    }
}
