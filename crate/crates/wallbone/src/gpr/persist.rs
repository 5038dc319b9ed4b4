//! Model persistence as a versioned, human-readable TOML document.
//!
//! The document stores everything needed to reproduce predictions exactly:
//! feature names and order, standardizer statistics, the output transform,
//! the optimized kernel, and the raw training data. Loading re-applies the
//! stored pipeline to the stored raw data through the same code path used at
//! fit time, so a round trip reproduces predictions bit for bit (floats are
//! written in shortest round-trip form).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numerics::Matrix;
use crate::transforms::{BoxCoxTransform, Standardizer};

use super::{GprError, GprModel, KernelParams};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    schema_version: u32,
    output: String,
    feature_names: Vec<String>,
    standardizer: StandardizerDoc,
    target: TargetDoc,
    kernel: KernelDoc,
    training: TrainingDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct StandardizerDoc {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TargetDoc {
    lambda: f64,
    shift: f64,
    center: f64,
    scale: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct KernelDoc {
    signal_variance: f64,
    lengthscales: Vec<f64>,
    noise_variance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainingDoc {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl GprModel {
    pub fn to_document(&self) -> String {
        let doc = ModelDoc {
            schema_version: MODEL_SCHEMA_VERSION,
            output: self.output_name().to_string(),
            feature_names: self.feature_names().to_vec(),
            standardizer: StandardizerDoc {
                mean: self.standardizer().mean().to_vec(),
                scale: self.standardizer().scale().to_vec(),
            },
            target: TargetDoc {
                lambda: self.transform().lambda,
                shift: self.transform().shift,
                center: self.target_center(),
                scale: self.target_scale(),
            },
            kernel: KernelDoc {
                signal_variance: self.params().signal_variance,
                lengthscales: self.params().lengthscales.clone(),
                noise_variance: self.params().noise_variance,
            },
            training: TrainingDoc {
                inputs: (0..self.raw_inputs().rows())
                    .map(|i| self.raw_inputs().row(i).to_vec())
                    .collect(),
                targets: self.raw_targets().to_vec(),
            },
        };
        toml::to_string(&doc).expect("model document serializes")
    }

    pub fn from_document(text: &str) -> Result<GprModel, GprError> {
        let doc: ModelDoc = toml::from_str(text).map_err(|e| GprError::Parse(e.to_string()))?;
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(GprError::SchemaVersion {
                found: doc.schema_version,
                supported: MODEL_SCHEMA_VERSION,
            });
        }
        if doc.training.inputs.is_empty() {
            return Err(GprError::Parse("model document has no training rows".into()));
        }
        let standardizer = Standardizer::from_stats(doc.standardizer.mean, doc.standardizer.scale)?;
        let raw_inputs = Matrix::from_rows(&doc.training.inputs);
        let params = KernelParams {
            signal_variance: doc.kernel.signal_variance,
            lengthscales: doc.kernel.lengthscales,
            noise_variance: doc.kernel.noise_variance,
        };
        GprModel::assemble(
            doc.output,
            doc.feature_names,
            standardizer,
            BoxCoxTransform { lambda: doc.target.lambda, shift: doc.target.shift },
            doc.target.center,
            doc.target.scale,
            params,
            raw_inputs,
            doc.training.targets,
        )
    }

    pub fn save(&self, path: &Path) -> Result<(), GprError> {
        std::fs::write(path, self.to_document())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<GprModel, GprError> {
        let text = std::fs::read_to_string(path)?;
        GprModel::from_document(&text)
    }
}
