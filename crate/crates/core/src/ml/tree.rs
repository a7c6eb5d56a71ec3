//! CART classification trees grown on weighted rows with Gini impurity.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};

const TIE: f64 = 1e-12;

/// How many features are examined at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxFeatures {
    All,
    /// ⌈√p⌉.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> usize {
        match self {
            MaxFeatures::All => p,
            MaxFeatures::Sqrt => ((p as f64).sqrt().ceil() as usize).clamp(1, p.max(1)),
            MaxFeatures::Count(n) => n.clamp(1, p.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_features: MaxFeatures,
    /// Nodes with fewer rows become leaves.
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_features: MaxFeatures::All,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        proba: Vec<f64>,
    },
}

/// A fitted tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub n_classes: usize,
}

/// A candidate split and its weighted Gini impurity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub impurity: f64,
}

/// Rows reaching a node, its depth, and the parent slot (index, is left) to patch.
type Pending = (Vec<usize>, usize, Option<(usize, bool)>);

/// Row-major training data shared by all trees of a forest.
pub(crate) struct Table<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [usize],
    pub n_classes: usize,
    pub n_features: usize,
}

impl<'a> Table<'a> {
    pub fn new(rows: &'a [Vec<f64>], labels: &'a [usize], n_classes: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Model("cannot fit a tree on zero rows".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        let n_features = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != n_features) {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                found: r.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Model(format!("label {l} out of range for {n_classes} classes")));
        }
        Ok(Table {
            rows,
            labels,
            n_classes,
            n_features,
        })
    }
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

/// Best threshold on one feature. Returns `None` when the feature is constant
/// on `rows`. `order` is scratch space.
fn best_threshold(
    table: &Table,
    weights: &[f64],
    rows: &[usize],
    feature: usize,
    order: &mut Vec<(f64, usize)>,
) -> Option<Split> {
    order.clear();
    order.extend(rows.iter().map(|&i| (table.rows[i][feature], i)));
    order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if order[0].0 == order[order.len() - 1].0 {
        return None;
    }
    let c = table.n_classes;
    let mut right = vec![0.0; c];
    let mut total = 0.0;
    for &(_, i) in order.iter() {
        right[table.labels[i]] += weights[i];
        total += weights[i];
    }
    let mut left = vec![0.0; c];
    let mut w_left = 0.0;
    let mut best: Option<Split> = None;
    for k in 0..order.len() - 1 {
        let (v, i) = order[k];
        let w = weights[i];
        left[table.labels[i]] += w;
        right[table.labels[i]] -= w;
        w_left += w;
        let next = order[k + 1].0;
        if next == v {
            continue;
        }
        let w_right = total - w_left;
        let impurity = (w_left * gini(&left, w_left) + w_right * gini(&right, w_right)) / total;
        if best.is_none_or(|b| impurity < b.impurity - TIE) {
            let mut threshold = v + (next - v) / 2.0;
            if threshold >= next {
                threshold = v;
            }
            best = Some(Split {
                feature,
                threshold,
                impurity,
            });
        }
    }
    best
}

fn better(candidate: &Split, incumbent: &Option<Split>) -> bool {
    match incumbent {
        None => true,
        Some(b) => {
            candidate.impurity < b.impurity - TIE
                || ((candidate.impurity - b.impurity).abs() <= TIE && candidate.feature < b.feature)
        }
    }
}

/// Minimum weighted-Gini split over `features`, ties broken by lowest
/// feature index and then lowest threshold.
pub fn best_split(rows: &[Vec<f64>], labels: &[usize], n_classes: usize, features: &[usize]) -> Result<Option<Split>> {
    let table = Table::new(rows, labels, n_classes)?;
    let weights = vec![1.0; rows.len()];
    let all: Vec<usize> = (0..rows.len()).collect();
    let mut order = Vec::new();
    let mut best = None;
    for &f in features {
        if let Some(s) = best_threshold(&table, &weights, &all, f, &mut order) {
            if better(&s, &best) {
                best = Some(s);
            }
        }
    }
    Ok(best)
}

impl CartTree {
    /// Fits on unit-weight rows with all features unless `params` says
    /// otherwise.
    pub fn fit<R: Rng>(
        rows: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        params: &TreeParams,
        rng: &mut R,
    ) -> Result<Self> {
        let table = Table::new(rows, labels, n_classes)?;
        let weights = vec![1.0; rows.len()];
        Ok(Self::grow(&table, &weights, params, rng))
    }

    /// Grows a tree on the rows with positive weight.
    pub(crate) fn grow<R: Rng>(table: &Table, weights: &[f64], params: &TreeParams, rng: &mut R) -> Self {
        let p = table.n_features;
        let c = table.n_classes;
        let max_features = params.max_features.resolve(p);
        let min_split = params.min_samples_split.max(2);
        let mut nodes: Vec<Node> = Vec::new();
        let mut order = Vec::new();
        let mut feature_pool: Vec<usize> = (0..p).collect();

        let root: Vec<usize> = (0..table.rows.len()).filter(|&i| weights[i] > 0.0).collect();
        let mut stack: Vec<Pending> = vec![(root, 0, None)];
        while let Some((rows, depth, parent)) = stack.pop() {
            let id = nodes.len();
            if let Some((pid, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut nodes[pid] {
                    if is_left {
                        *left = id;
                    } else {
                        *right = id;
                    }
                }
            }
            let mut counts = vec![0.0; c];
            for &i in &rows {
                counts[table.labels[i]] += weights[i];
            }
            let pure = counts.iter().filter(|&&x| x > 0.0).count() <= 1;
            let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
            let split = if pure || depth_capped || rows.len() < min_split {
                None
            } else {
                // Visit features in random order, skipping constant ones
                // without counting them, until enough have been examined.
                feature_pool.shuffle(rng);
                let mut best = None;
                let mut examined = 0;
                for &f in &feature_pool {
                    if examined == max_features {
                        break;
                    }
                    if let Some(s) = best_threshold(table, weights, &rows, f, &mut order) {
                        examined += 1;
                        if better(&s, &best) {
                            best = Some(s);
                        }
                    }
                }
                best
            };
            match split {
                None => {
                    let total: f64 = counts.iter().sum();
                    nodes.push(Node::Leaf {
                        proba: counts.iter().map(|x| x / total).collect(),
                    });
                }
                Some(s) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        rows.iter().partition(|&&i| table.rows[i][s.feature] <= s.threshold);
                    nodes.push(Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: usize::MAX,
                        right: usize::MAX,
                    });
                    stack.push((r, depth + 1, Some((id, false))));
                    stack.push((l, depth + 1, Some((id, true))));
                }
            }
        }
        CartTree {
            nodes,
            n_features: p,
            n_classes: c,
        }
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut n = 0;
        loop {
            match &self.nodes[n] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => n = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { .. } => return n,
            }
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<&[f64]> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { proba } => Ok(proba),
            Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(self.predict_proba(x)?))
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], n: usize) -> usize {
            match &nodes[n] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub(crate) fn check(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Split {
                    feature, left, right, ..
                } => {
                    if *feature >= self.n_features || *left >= self.nodes.len() || *right >= self.nodes.len() {
                        return Err(Error::Model(format!("node {i} has out-of-range references")));
                    }
                }
                Node::Leaf { proba } => {
                    if proba.len() != self.n_classes {
                        return Err(Error::Model(format!("leaf {i} has {} probabilities", proba.len())));
                    }
                }
            }
        }
        Ok(())
    }
}
