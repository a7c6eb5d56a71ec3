use serde::{Deserialize, Serialize};

use super::model::{fit_model, ModelKind, ModelParams};
use crate::datagen::{stratified_folds, stratified_subsample, Dataset};
use crate::error::{Error, Result};
use crate::parallel::Jobs;

/// Mean and population standard deviation of fold accuracies at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningPoint {
    /// Total sample count N this point stands for.
    pub size: usize,
    /// Training samples actually cross-validated, round(train_fraction · N).
    pub used: usize,
    pub mean: f64,
    pub std: f64,
    pub folds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub model: ModelKind,
    pub k: usize,
    pub train_fraction: f64,
    pub points: Vec<LearningPoint>,
}

/// Stratified k-fold accuracies of `kind` on `data`.
pub fn cross_validate(
    data: &Dataset,
    kind: ModelKind,
    params: &ModelParams,
    k: usize,
    seed: u64,
    jobs: Jobs,
) -> Result<Vec<f64>> {
    let labels = data.labels();
    let fold_of = stratified_folds(&labels, k, seed)?;
    (0..k)
        .map(|f| {
            let (held, kept): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| fold_of[i] == f);
            let model = fit_model(kind, &data.subset(&kept), params, jobs)?;
            let correct = held
                .iter()
                .map(|&i| {
                    model
                        .predict(&data.samples[i].features)
                        .map(|p| (p == labels[i]) as usize)
                })
                .sum::<Result<usize>>()?;
            Ok(correct as f64 / held.len() as f64)
        })
        .collect()
}

/// `points` evenly spaced totals up to `classes · per_class`.
pub fn default_sizes(classes: usize, per_class: usize, points: usize) -> Vec<usize> {
    let total = classes * per_class;
    (1..=points).map(|i| i * total / points).collect()
}

/// For every total N, cross-validates on a stratified subsample of
/// round(train_fraction · N) training samples.
#[allow(clippy::too_many_arguments)]
pub fn learning_curve(
    train: &Dataset,
    kind: ModelKind,
    params: &ModelParams,
    k: usize,
    sizes: &[usize],
    train_fraction: f64,
    seed: u64,
    jobs: Jobs,
) -> Result<LearningCurve> {
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let used = (size as f64 * train_fraction).round() as usize;
        if used < k.max(train.class_count()) {
            return Err(Error::InvalidParameter(format!(
                "learning-curve size {size} leaves {used} samples, too few for {k} folds over {} classes",
                train.class_count()
            )));
        }
        let sub = stratified_subsample(train, used, seed ^ size as u64)?;
        let folds = cross_validate(&sub, kind, params, k, seed, jobs)
            .map_err(|e| e.context(format!("learning curve at N = {size}")))?;
        let mean = folds.iter().sum::<f64>() / folds.len() as f64;
        let std = (folds.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / folds.len() as f64).sqrt();
        points.push(LearningPoint {
            size,
            used,
            mean,
            std,
            folds,
        });
    }
    Ok(LearningCurve {
        model: kind,
        k,
        train_fraction,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::ProbabilitySample;

    #[test]
    fn duplicated_samples_are_recovered() {
        let samples = vec![
            ProbabilitySample {
                label: 0,
                features: vec![0.1, 0.9],
            },
            ProbabilitySample {
                label: 0,
                features: vec![0.1, 0.9],
            },
            ProbabilitySample {
                label: 1,
                features: vec![0.8, 0.3],
            },
            ProbabilitySample {
                label: 1,
                features: vec![0.8, 0.3],
            },
        ];
        let ds = Dataset::new(samples, vec!["a".into(), "b".into()], 2).unwrap();
        let scores = cross_validate(&ds, ModelKind::Rfc, &ModelParams::default(), 2, 0, Jobs::Auto).unwrap();
        assert_eq!(scores, [1.0, 1.0]);
    }

    #[test]
    fn sizes_and_errors() {
        assert_eq!(default_sizes(6, 300, 10)[9], 1800);
        assert_eq!(default_sizes(2, 300, 10)[0], 60);
        let samples = (0..40)
            .map(|i| ProbabilitySample {
                label: i % 2,
                features: vec![(i % 2) as f64 + 0.001 * i as f64],
            })
            .collect();
        let ds = Dataset::new(samples, vec!["a".into(), "b".into()], 1).unwrap();
        let curve = learning_curve(
            &ds,
            ModelKind::Svm,
            &ModelParams::default(),
            5,
            &[20, 50],
            0.8,
            1,
            Jobs::Auto,
        )
        .unwrap();
        assert_eq!(curve.points.iter().map(|p| p.used).collect::<Vec<_>>(), [16, 40]);
        assert!(curve.points.iter().all(|p| p.mean == 1.0 && p.std == 0.0));
        assert!(learning_curve(
            &ds,
            ModelKind::Svm,
            &ModelParams::default(),
            10,
            &[5],
            0.8,
            1,
            Jobs::Auto
        )
        .is_err());
    }
}
