use serde::{Deserialize, Serialize};

use super::generate::Dataset;
use crate::error::{Error, Result};

const DEGENERATE_STD: f64 = 1e-12;

/// Per-feature standardization learned from training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(train: &Dataset) -> Result<Self> {
        Self::fit_rows(train.samples.iter().map(|s| s.features.as_slice()))
    }

    pub fn fit_rows<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        let first = rows
            .first()
            .ok_or_else(|| Error::Dataset("cannot fit a scaler on an empty dataset".into()))?;
        let p = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        for r in &rows {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: r.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(*r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; p];
        for r in &rows {
            for ((v, x), m) in var.iter_mut().zip(*r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Ok(FeatureScaler { mean, std })
    }

    pub fn feature_count(&self) -> usize {
        self.mean.len()
    }

    /// Centers every feature and divides by its std unless the std is below
    /// 1e-12.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| if *s < DEGENERATE_STD { x - m } else { (x - m) / s })
            .collect())
    }

    pub fn transform_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        let mut out = ds.clone();
        for s in &mut out.samples {
            s.features = self.transform(&s.features)?;
        }
        Ok(out)
    }
}
