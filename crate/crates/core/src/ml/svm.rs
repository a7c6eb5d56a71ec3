//! One-vs-all linear SVM trained by plain SGD on the hinge loss.
//!
//! The step size follows the "optimal" schedule η_t = 1/(α(t0 + t − 1)) with
//! t0 = 1/(η0 α) and η0 = α^(−1/4), and L2 shrinkage is applied before each
//! gradient step.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{argmax, check_training_set};
use crate::datagen::{Dataset, FeatureScaler};
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Jobs};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// L2 regularization strength.
    pub alpha: f64,
    pub max_epochs: usize,
    /// Stop once the epoch loss has failed to improve by `tol · n` for
    /// `patience` consecutive epochs.
    pub tol: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            alpha: 1e-4,
            max_epochs: 1000,
            tol: 1e-3,
            patience: 5,
            seed: 0,
        }
    }
}

impl SvmParams {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Model(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Model("max_epochs and patience must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub scaler: FeatureScaler,
    /// One weight vector per class, in scaled feature space.
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    /// Epochs run by each binary problem.
    pub epochs: Vec<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Binary hinge-loss SGD on labels ±1. Returns (weights, intercept, epochs).
fn fit_binary(x: &[Vec<f64>], y: &[f64], params: &SvmParams, stream: u64) -> (Vec<f64>, f64, usize) {
    let n = x.len();
    let alpha = params.alpha;
    let eta0 = (1.0 / alpha.sqrt()).sqrt();
    let t0 = 1.0 / (eta0 * alpha);
    let mut w = vec![0.0; x[0].len()];
    let mut b = 0.0;
    let mut t = 1.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seed::rng(params.seed, &[stream]);
    let mut best_loss = f64::INFINITY;
    let mut stale = 0;
    let mut epochs = 0;
    for _ in 0..params.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for &i in &order {
            let eta = 1.0 / (alpha * (t0 + t - 1.0));
            let p = dot(&w, &x[i]) + b;
            let z = p * y[i];
            loss += (1.0 - z).max(0.0);
            let update = if z <= 1.0 { eta * y[i] } else { 0.0 };
            let shrink = (1.0 - eta * alpha).max(0.0);
            w.iter_mut().for_each(|wj| *wj *= shrink);
            if update != 0.0 {
                for (wj, xj) in w.iter_mut().zip(&x[i]) {
                    *wj += update * xj;
                }
                b += update;
            }
            t += 1.0;
        }
        if loss > best_loss - params.tol * n as f64 {
            stale += 1;
        } else {
            stale = 0;
        }
        best_loss = best_loss.min(loss);
        if stale >= params.patience {
            break;
        }
    }
    (w, b, epochs)
}

pub fn train_svm(train: &Dataset, params: &SvmParams) -> Result<SvmModel> {
    train_svm_with(train, params, Jobs::Auto)
}

/// Fits the scaler on `train`, then one binary problem per class.
pub fn train_svm_with(train: &Dataset, params: &SvmParams, jobs: Jobs) -> Result<SvmModel> {
    check_training_set(train)?;
    params.validate()?;
    let scaler = FeatureScaler::fit(train)?;
    let x = train
        .samples
        .iter()
        .map(|s| scaler.transform(&s.features))
        .collect::<Result<Vec<_>>>()?;
    let classes = train.class_count();
    let fits = map_indexed(jobs, classes, |c| {
        let y: Vec<f64> = train
            .samples
            .iter()
            .map(|s| if s.label == c { 1.0 } else { -1.0 })
            .collect();
        fit_binary(&x, &y, params, c as u64)
    });
    let mut model = SvmModel {
        params: *params,
        scaler,
        weights: Vec::with_capacity(classes),
        intercepts: Vec::with_capacity(classes),
        epochs: Vec::with_capacity(classes),
    };
    for (w, b, e) in fits {
        model.weights.push(w);
        model.intercepts.push(b);
        model.epochs.push(e);
    }
    Ok(model)
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.scaler.feature_count()
    }

    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    /// Class scores w_c·x̂ + b_c on the scaled input.
    pub fn decision_function(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.scaler.transform(x)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| dot(w, &z) + b)
            .collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.decision_function(x)?))
    }

    pub(crate) fn check(&self) -> Result<()> {
        let p = self.n_features();
        if self.weights.is_empty()
            || self.intercepts.len() != self.weights.len()
            || self.weights.iter().any(|w| w.len() != p)
            || self.scaler.std.len() != p
        {
            return Err(Error::Model("inconsistent SVM weight shapes".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::ProbabilitySample;

    fn dataset(points: &[([f64; 2], usize)], classes: usize) -> Dataset {
        let samples = points
            .iter()
            .map(|(x, y)| ProbabilitySample {
                label: *y,
                features: x.to_vec(),
            })
            .collect();
        Dataset::new(samples, (0..classes).map(|c| c.to_string()).collect(), 2).unwrap()
    }

    #[test]
    fn schedule_constants() {
        let alpha: f64 = 1e-4;
        let eta0 = (1.0 / alpha.sqrt()).sqrt();
        assert!((eta0 - 10.0).abs() < 1e-12);
        assert!((1.0 / (eta0 * alpha) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn separable_toy_has_no_training_errors() {
        let mut pts = Vec::new();
        for i in 0..20 {
            let s = i as f64 / 20.0;
            pts.push(([s, 2.0 + s], 0));
            pts.push(([s + 1.0, s - 1.0], 1));
        }
        let ds = dataset(&pts, 2);
        let model = train_svm(&ds, &SvmParams::default()).unwrap();
        for (x, y) in &pts {
            assert_eq!(model.predict(x).unwrap(), *y);
        }
        assert!(model.epochs.iter().all(|&e| e < 1000));
    }

    #[test]
    fn duplicated_points_are_recalled() {
        let pts = [
            ([0.0, 0.0], 0),
            ([0.0, 0.0], 0),
            ([1.0, 0.0], 1),
            ([1.0, 0.0], 1),
            ([0.0, 1.0], 2),
            ([0.0, 1.0], 2),
        ];
        let model = train_svm(&dataset(&pts, 3), &SvmParams::default()).unwrap();
        for (x, y) in &pts {
            assert_eq!(model.predict(x).unwrap(), *y);
        }
    }

    #[test]
    fn bias_only_model_and_shift_invariance() {
        let mut model = SvmModel {
            params: SvmParams::default(),
            scaler: FeatureScaler {
                mean: vec![0.0; 2],
                std: vec![1.0; 2],
            },
            weights: vec![vec![0.0; 2]; 3],
            intercepts: vec![0.0, 0.1, 0.5],
            epochs: vec![0; 3],
        };
        assert_eq!(model.predict(&[3.0, -7.0]).unwrap(), 2);
        model.intercepts.iter_mut().for_each(|b| *b += 42.0);
        assert_eq!(model.predict(&[3.0, -7.0]).unwrap(), 2);
        model.intercepts = vec![0.2, 0.2, 0.1];
        assert_eq!(model.predict(&[0.0, 0.0]).unwrap(), 0);
        assert!(model.predict(&[0.0]).is_err());
    }

    #[test]
    fn deterministic() {
        let pts: Vec<_> = (0..30)
            .map(|i| ([i as f64 % 7.0, (i * 3) as f64 % 5.0], i % 3))
            .collect();
        let ds = dataset(&pts, 3);
        let p = SvmParams {
            seed: 5,
            ..SvmParams::default()
        };
        assert_eq!(
            train_svm_with(&ds, &p, Jobs::Sequential).unwrap(),
            train_svm_with(&ds, &p, Jobs::Fixed(3)).unwrap()
        );
    }
}
