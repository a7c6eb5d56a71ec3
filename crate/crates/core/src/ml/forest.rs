use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{CartTree, MaxFeatures, Table, TreeParams};
use super::{argmax, check_training_set};
use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Jobs};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    /// Resample the training set with replacement for every tree.
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            max_depth: None,
            seed: 0,
        }
    }
}

/// Soft-voting ensemble of CART trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub trees: Vec<CartTree>,
    /// Seed of each tree, derived from the model seed and the tree index.
    pub tree_seeds: Vec<u64>,
    pub n_features: usize,
    pub n_classes: usize,
}

pub fn train_forest(train: &Dataset, params: &ForestParams) -> Result<ForestModel> {
    train_forest_with(train, params, Jobs::Auto)
}

pub fn train_forest_with(train: &Dataset, params: &ForestParams, jobs: Jobs) -> Result<ForestModel> {
    check_training_set(train)?;
    if params.n_trees == 0 {
        return Err(Error::Model("a forest needs at least one tree".into()));
    }
    let rows: Vec<Vec<f64>> = train.samples.iter().map(|s| s.features.clone()).collect();
    let labels = train.labels();
    let table = Table::new(&rows, &labels, train.class_count())?;
    let tree_params = TreeParams {
        max_features: params.max_features,
        max_depth: params.max_depth,
        ..TreeParams::default()
    };
    let n = rows.len();
    let tree_seeds: Vec<u64> = (0..params.n_trees)
        .map(|t| seed::derive(params.seed, &[t as u64]))
        .collect();
    let trees = map_indexed(jobs, params.n_trees, |t| {
        let mut rng = seed::rng(tree_seeds[t], &[]);
        let weights = if params.bootstrap {
            let mut w = vec![0.0; n];
            for _ in 0..n {
                w[rng.random_range(0..n)] += 1.0;
            }
            w
        } else {
            vec![1.0; n]
        };
        CartTree::grow(&table, &weights, &tree_params, &mut rng)
    });
    Ok(ForestModel {
        params: *params,
        trees,
        tree_seeds,
        n_features: table.n_features,
        n_classes: table.n_classes,
    })
}

impl ForestModel {
    /// Mean of the per-tree leaf distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.predict_proba(x)?) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(acc)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(x)?))
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::Model("forest has no trees".into()));
        }
        for t in &self.trees {
            if t.n_features != self.n_features || t.n_classes != self.n_classes {
                return Err(Error::Model("tree shape disagrees with the forest".into()));
            }
            t.check()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::ProbabilitySample;
    use crate::ml::tree::Node;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(seed: u64, n: usize, p: usize, c: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|i| ProbabilitySample {
                label: i % c,
                features: (0..p).map(|_| rng.random::<f64>()).collect(),
            })
            .collect();
        Dataset::new(samples, (0..c).map(|i| i.to_string()).collect(), p).unwrap()
    }

    #[test]
    fn single_tree_forest_equals_cart() {
        for seed in 0..5 {
            let ds = random_dataset(seed, 40, 4, 3);
            let params = ForestParams {
                n_trees: 1,
                max_features: MaxFeatures::All,
                bootstrap: false,
                seed,
                ..ForestParams::default()
            };
            let forest = train_forest(&ds, &params).unwrap();
            let rows: Vec<Vec<f64>> = ds.samples.iter().map(|s| s.features.clone()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let tree = CartTree::fit(&rows, &ds.labels(), 3, &TreeParams::default(), &mut rng).unwrap();
            let probe = random_dataset(seed + 100, 200, 4, 3);
            for s in probe.samples.iter().chain(&ds.samples) {
                assert_eq!(forest.predict(&s.features).unwrap(), tree.predict(&s.features).unwrap());
            }
        }
    }

    #[test]
    fn soft_vote_tie_goes_to_lowest_id() {
        let leaf = |p: Vec<f64>| CartTree {
            nodes: vec![Node::Leaf { proba: p }],
            n_features: 1,
            n_classes: 2,
        };
        let forest = ForestModel {
            params: ForestParams::default(),
            trees: vec![leaf(vec![1.0, 0.0]), leaf(vec![0.0, 1.0])],
            tree_seeds: vec![0, 1],
            n_features: 1,
            n_classes: 2,
        };
        assert_eq!(forest.predict_proba(&[0.3]).unwrap(), [0.5, 0.5]);
        assert_eq!(forest.predict(&[0.3]).unwrap(), 0);
    }

    #[test]
    fn deterministic_for_any_job_count() {
        let ds = random_dataset(3, 60, 5, 3);
        let params = ForestParams {
            n_trees: 12,
            seed: 4,
            ..ForestParams::default()
        };
        let a = train_forest_with(&ds, &params, Jobs::Sequential).unwrap();
        let b = train_forest_with(&ds, &params, Jobs::Fixed(4)).unwrap();
        assert_eq!(a, b);
        for s in &ds.samples {
            let p = a.predict_proba(&s.features).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_single_class() {
        let ds = random_dataset(1, 10, 2, 1);
        assert!(train_forest(&ds, &ForestParams::default()).is_err());
    }
}
