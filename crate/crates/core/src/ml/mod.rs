//! Classifiers and evaluation: one-vs-all linear SVM, random forest of CART
//! trees, confusion matrices, Agresti–Coull intervals and learning curves.

mod cv;
mod forest;
mod metrics;
mod model;
mod svm;
pub mod tree;

pub use cv::{cross_validate, default_sizes, learning_curve, LearningCurve, LearningPoint};
pub use forest::{train_forest, train_forest_with, ForestModel, ForestParams};
pub use metrics::{agresti_coull, ConfidenceInterval, ConfusionMatrix};
pub use model::{evaluate, fit_model, load_model, save_model, Model, ModelKind, ModelParams};
pub use svm::{train_svm, train_svm_with, SvmModel, SvmParams};
pub use tree::{CartTree, MaxFeatures, Node, TreeParams};

use crate::datagen::Dataset;
use crate::error::{Error, Result};

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn check_training_set(train: &Dataset) -> Result<()> {
    train.validate()?;
    let present = train.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::Model(format!(
            "training needs samples from at least two classes, found {present}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::argmax;

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[1.0, 1.0]), 0);
        assert_eq!(argmax(&[0.0, -1.0, 3.0]), 2);
    }
}
