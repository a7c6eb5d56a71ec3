use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::forest::{train_forest_with, ForestModel, ForestParams};
use super::metrics::ConfusionMatrix;
use super::svm::{train_svm_with, SvmModel, SvmParams};
use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::parallel::{try_map_indexed, Jobs};

const MODEL_FORMAT: &str = "rydberg-id-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    Rfc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Svm, ModelKind::Rfc];
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(ModelKind::Svm),
            "rfc" | "forest" => Ok(ModelKind::Rfc),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Svm => "svm",
            ModelKind::Rfc => "rfc",
        })
    }
}

/// Hyperparameters for both model families.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelParams {
    pub svm: SvmParams,
    pub forest: ForestParams,
}

impl ModelParams {
    /// Both model seeds set to `seed`.
    pub fn seeded(seed: u64) -> Self {
        let mut p = ModelParams::default();
        p.svm.seed = seed;
        p.forest.seed = seed;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Svm(SvmModel),
    Rfc(ForestModel),
}

pub fn fit_model(kind: ModelKind, train: &Dataset, params: &ModelParams, jobs: Jobs) -> Result<Model> {
    Ok(match kind {
        ModelKind::Svm => Model::Svm(train_svm_with(train, &params.svm, jobs)?),
        ModelKind::Rfc => Model::Rfc(train_forest_with(train, &params.forest, jobs)?),
    })
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Svm(_) => ModelKind::Svm,
            Model::Rfc(_) => ModelKind::Rfc,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Svm(m) => m.n_features(),
            Model::Rfc(m) => m.n_features,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Svm(m) => m.n_classes(),
            Model::Rfc(m) => m.n_classes,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        match self {
            Model::Svm(m) => m.predict(x),
            Model::Rfc(m) => m.predict(x),
        }
    }

    /// Class probabilities; only forests provide them.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::Svm(_) => Err(Error::Model("the SVM does not produce probabilities".into())),
            Model::Rfc(m) => m.predict_proba(x),
        }
    }

    pub fn predict_all(&self, ds: &Dataset, jobs: Jobs) -> Result<Vec<usize>> {
        try_map_indexed(jobs, ds.len(), |i| self.predict(&ds.samples[i].features))
    }

    pub fn check(&self) -> Result<()> {
        match self {
            Model::Svm(m) => m.check(),
            Model::Rfc(m) => m.check(),
        }
    }
}

/// Confusion matrix of `model` on `test`.
pub fn evaluate(model: &Model, test: &Dataset, jobs: Jobs) -> Result<ConfusionMatrix> {
    if test.is_empty() {
        return Err(Error::Dataset("cannot evaluate on an empty test set".into()));
    }
    if model.n_classes() != test.class_count() {
        return Err(Error::DimensionMismatch {
            expected: model.n_classes(),
            found: test.class_count(),
        }
        .context("class count"));
    }
    let predicted = model.predict_all(test, jobs)?;
    ConfusionMatrix::from_predictions(test.class_count(), &test.labels(), &predicted)
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    class_names: Vec<String>,
    model: Model,
}

pub fn save_model(model: &Model, class_names: &[String], path: &Path) -> Result<()> {
    let doc = ModelDocument {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        class_names: class_names.to_vec(),
        model: model.clone(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &doc)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Reads a model document and returns the model with its class names.
pub fn load_model(path: &Path) -> Result<(Model, Vec<String>)> {
    let doc: ModelDocument = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
        return Err(Error::Model(format!(
            "{}: unsupported model document {} v{}",
            path.display(),
            doc.format,
            doc.version
        )));
    }
    doc.model.check()?;
    if doc.class_names.len() != doc.model.n_classes() {
        return Err(Error::Model("class table does not match the model".into()));
    }
    Ok((doc.model, doc.class_names))
}
