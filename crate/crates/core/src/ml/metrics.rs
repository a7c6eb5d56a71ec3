use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with rows indexed by true class and columns by predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_predictions(classes: usize, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                found: predicted.len(),
            });
        }
        let mut m = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= classes || p >= classes {
                return Err(Error::Model(format!("class {} out of range for {classes}", t.max(p))));
            }
            m.counts[t][p] += 1;
        }
        Ok(m)
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Trace over total; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.trace() as f64 / total as f64
        }
    }

    /// Per-class recall (diagonal over row sum).
    pub fn recalls(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let n: u64 = r.iter().sum();
                if n == 0 {
                    0.0
                } else {
                    r[i] as f64 / n as f64
                }
            })
            .collect()
    }

    /// Largest off-diagonal entry as (true, predicted, count).
    pub fn largest_confusion(&self) -> Option<(usize, usize, u64)> {
        let mut best: Option<(usize, usize, u64)> = None;
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j && v > 0 && best.is_none_or(|b| v > b.2) {
                    best = Some((i, j, v));
                }
            }
        }
        best
    }

    /// CSV with a header row of class names and one row per true class.
    pub fn to_csv(&self, class_names: &[String]) -> String {
        let mut out = String::from("true\\predicted");
        for name in class_names {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        for (name, row) in class_names.iter().zip(&self.counts) {
            out.push_str(name);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Binomial proportion interval around the shrunk estimate p̃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub z: f64,
}

/// Agresti–Coull interval for `successes` out of `n` trials.
pub fn agresti_coull(successes: u64, n: u64, z: f64) -> Result<ConfidenceInterval> {
    if n == 0 {
        return Err(Error::InvalidParameter("confidence interval needs n > 0".into()));
    }
    if successes > n {
        return Err(Error::InvalidParameter(format!(
            "{successes} successes exceed {n} trials"
        )));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(format!("z must be positive, got {z}")));
    }
    let z2 = z * z;
    let n_tilde = n as f64 + z2;
    let p = (successes as f64 + z2 / 2.0) / n_tilde;
    let half = z * (p * (1.0 - p) / n_tilde).sqrt();
    Ok(ConfidenceInterval {
        estimate: p,
        lower: (p - half).clamp(0.0, 1.0),
        upper: (p + half).clamp(0.0, 1.0),
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let ci = agresti_coull(95, 100, 1.96).unwrap();
        assert!((ci.estimate - 0.93336).abs() < 1e-5);
        assert!((ci.lower - 0.8854).abs() < 5e-5);
        assert!((ci.upper - 0.9813).abs() < 5e-5);
    }

    #[test]
    fn extremes_and_errors() {
        for n in [1, 10, 360, 10_000] {
            let top = agresti_coull(n, n, 1.96).unwrap();
            assert!(top.estimate < 1.0 && top.upper <= 1.0);
            let bottom = agresti_coull(0, n, 1.96).unwrap();
            assert!(bottom.estimate > 0.0 && bottom.lower >= 0.0);
        }
        assert!(agresti_coull(1, 0, 1.96).is_err());
        assert!(agresti_coull(5, 4, 1.96).is_err());
    }

    #[test]
    fn confusion_identities() {
        let truth = [0, 0, 1, 1, 2, 2];
        let pred = [0, 1, 1, 1, 2, 0];
        let m = ConfusionMatrix::from_predictions(3, &truth, &pred).unwrap();
        assert_eq!(m.row_sums(), [2, 2, 2]);
        assert_eq!(m.trace(), 4);
        assert_eq!(m.accuracy(), 4.0 / 6.0);
        assert_eq!(m.largest_confusion(), Some((0, 1, 1)));
        let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        assert_eq!(m.to_csv(&names).lines().nth(1), Some("a,1,1,0"));

        let perfect = ConfusionMatrix::from_predictions(3, &[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(perfect.accuracy(), 1.0);
        let constant = ConfusionMatrix::from_predictions(3, &truth, &[1; 6]).unwrap();
        assert!(constant.counts.iter().all(|r| r[0] == 0 && r[2] == 0));
        assert!(ConfusionMatrix::from_predictions(2, &[0, 3], &[0, 0]).is_err());
    }
}
