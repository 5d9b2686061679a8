//! Random forest of binary decision trees over context feature vectors.
//!
//! Trees are grown on bootstrap samples with a random feature subset at every
//! node and Gini impurity as the split criterion. Each tree casts one vote;
//! the predicted probability is the fraction of positive votes.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features tried per node; `None` means `round(sqrt(d))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub bootstrap_fraction: f64,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            max_features: None,
            min_samples_split: 2,
            bootstrap_fraction: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { positive: bool },
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    /// Tree rooted at `nodes[0]`. Children must point forward.
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("empty decision tree".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let TreeNode::Split { left, right, .. } = *n {
                if left <= i || right <= i || left >= nodes.len() || right >= nodes.len() {
                    return Err(Error::InvalidInput(format!("node {i} has invalid children")));
                }
            }
        }
        Ok(DecisionTree { nodes })
    }

    pub fn stump(feature: usize, threshold: f64, left_positive: bool, right_positive: bool) -> Self {
        DecisionTree {
            nodes: vec![
                TreeNode::Split { feature, threshold, left: 1, right: 2 },
                TreeNode::Leaf { positive: left_positive },
                TreeNode::Leaf { positive: right_positive },
            ],
        }
    }

    pub fn vote(&self, x: &[f64]) -> bool {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { positive } => return positive,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if x.get(feature).copied().unwrap_or(0.0) <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextClassifier {
    dim: usize,
    trees: Vec<DecisionTree>,
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [bool],
    cfg: &'a ForestConfig,
    max_features: usize,
    dim: usize,
}

impl Builder<'_> {
    fn leaf(&self, idx: &[usize]) -> TreeNode {
        let pos = idx.iter().filter(|&&i| self.ys[i]).count();
        TreeNode::Leaf { positive: 2 * pos > idx.len() }
    }

    /// Best split on `feature` as `(weighted impurity, threshold)`.
    fn best_split_on(&self, idx: &[usize], feature: usize) -> Option<(f64, f64)> {
        let mut vals: Vec<(f64, bool)> = idx.iter().map(|&i| (self.xs[i][feature], self.ys[i])).collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = vals.len();
        let total_pos = vals.iter().filter(|v| v.1).count();
        let mut left_pos = 0;
        let mut best: Option<(f64, f64)> = None;
        for k in 1..n {
            if vals[k - 1].1 {
                left_pos += 1;
            }
            if vals[k - 1].0.total_cmp(&vals[k].0) == Ordering::Equal {
                continue;
            }
            let impurity = (k as f64 * gini(left_pos, k) + (n - k) as f64 * gini(total_pos - left_pos, n - k)) / n as f64;
            if best.is_none_or(|(b, _)| impurity < b) {
                best = Some((impurity, 0.5 * (vals[k - 1].0 + vals[k].0)));
            }
        }
        best
    }

    fn grow(&self, rng: &mut ChaCha8Rng, idx: Vec<usize>) -> DecisionTree {
        let mut nodes = vec![TreeNode::Leaf { positive: false }];
        let mut stack = vec![(0usize, idx, 0usize)];
        while let Some((slot, idx, depth)) = stack.pop() {
            let pos = idx.iter().filter(|&&i| self.ys[i]).count();
            if depth >= self.cfg.max_depth || idx.len() < self.cfg.min_samples_split || pos == 0 || pos == idx.len() {
                nodes[slot] = self.leaf(&idx);
                continue;
            }
            let mut features: Vec<usize> = (0..self.dim).collect();
            features.shuffle(rng);
            let mut best: Option<(f64, usize, f64)> = None;
            for (tried, &f) in features.iter().enumerate() {
                // Keep looking past the subset only while no split exists.
                if tried >= self.max_features && best.is_some() {
                    break;
                }
                if let Some((imp, thr)) = self.best_split_on(&idx, f) {
                    if best.is_none_or(|(b, _, _)| imp < b) {
                        best = Some((imp, f, thr));
                    }
                }
            }
            let Some((_, feature, threshold)) = best else {
                nodes[slot] = self.leaf(&idx);
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.xs[i][feature] <= threshold);
            let left = nodes.len();
            nodes.push(TreeNode::Leaf { positive: false });
            let right = nodes.len();
            nodes.push(TreeNode::Leaf { positive: false });
            nodes[slot] = TreeNode::Split { feature, threshold, left, right };
            stack.push((right, r, depth + 1));
            stack.push((left, l, depth + 1));
        }
        DecisionTree { nodes }
    }
}

fn cmp_sample(a: &(Vec<f64>, bool), b: &(Vec<f64>, bool)) -> Ordering {
    a.1.cmp(&b.1).then_with(|| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

impl ContextClassifier {
    pub fn from_trees(dim: usize, trees: Vec<DecisionTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidInput("classifier needs at least one tree".into()));
        }
        Ok(ContextClassifier { dim, trees })
    }

    /// Fit a forest. Samples are put in a canonical order before the seeded
    /// bootstrap, so the model does not depend on input order.
    pub fn train(features: &[Vec<f64>], labels: &[bool], cfg: &ForestConfig) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::InvalidInput(format!("{} feature rows but {} labels", features.len(), labels.len())));
        }
        let pos = labels.iter().filter(|&&l| l).count();
        if pos == 0 || pos == labels.len() {
            return Err(Error::InvalidInput("training set needs both positive and negative labels".into()));
        }
        if cfg.n_trees == 0 {
            return Err(Error::Config("n_trees must be positive".into()));
        }
        if cfg.bootstrap_fraction.is_nan() || cfg.bootstrap_fraction <= 0.0 {
            return Err(Error::Config("bootstrap_fraction must be positive".into()));
        }
        let dim = features[0].len();
        if dim == 0 || features.iter().any(|f| f.len() != dim) {
            return Err(Error::InvalidInput("feature rows must share one nonzero length".into()));
        }

        let mut samples: Vec<(Vec<f64>, bool)> = features.iter().cloned().zip(labels.iter().copied()).collect();
        samples.sort_by(cmp_sample);
        let (xs, ys): (Vec<Vec<f64>>, Vec<bool>) = samples.into_iter().unzip();

        let max_features = cfg
            .max_features
            .unwrap_or_else(|| (dim as f64).sqrt().round() as usize)
            .clamp(1, dim);
        let builder = Builder {
            xs: &xs,
            ys: &ys,
            cfg,
            max_features,
            dim,
        };
        let n = xs.len();
        let draws = ((n as f64 * cfg.bootstrap_fraction).round() as usize).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let trees = (0..cfg.n_trees)
            .map(|_| {
                let idx: Vec<usize> = (0..draws).map(|_| rng.gen_range(0..n)).collect();
                builder.grow(&mut rng, idx)
            })
            .collect();
        Ok(ContextClassifier { dim, trees })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn positive_votes(&self, x: &[f64]) -> usize {
        self.trees.iter().filter(|t| t.vote(x)).count()
    }

    /// Fraction of trees voting positive.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.positive_votes(x) as f64 / self.trees.len() as f64
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.predict_proba(x) >= 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Ten points per class on either side of the line x + y = 1.
    pub(crate) fn separable() -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut xs = vec![];
        let mut ys = vec![];
        for i in 0..10 {
            let t = i as f64 / 10.0;
            xs.push(vec![0.1 + 0.3 * t, 0.4 - 0.3 * t]);
            ys.push(false);
            xs.push(vec![0.7 + 0.2 * t, 0.9 - 0.25 * t]);
            ys.push(true);
        }
        (xs, ys)
    }

    #[test]
    fn separable_fixture_fits_perfectly() {
        let (xs, ys) = separable();
        let clf = ContextClassifier::train(&xs, &ys, &ForestConfig::default()).unwrap();
        let correct = xs.iter().zip(&ys).filter(|(x, y)| clf.predict(x) == **y).count();
        assert_eq!(correct, 20);
    }

    #[test]
    fn single_class_rejected() {
        let xs = vec![vec![0.0, 1.0]; 4];
        assert!(ContextClassifier::train(&xs, &[true; 4], &ForestConfig::default()).is_err());
        assert!(ContextClassifier::train(&xs, &[false; 4], &ForestConfig::default()).is_err());
    }

    #[test]
    fn seeded_training_is_deterministic() {
        let (xs, ys) = separable();
        let cfg = ForestConfig { n_trees: 25, seed: 7, ..Default::default() };
        let a = ContextClassifier::train(&xs, &ys, &cfg).unwrap();
        let b = ContextClassifier::train(&xs, &ys, &cfg).unwrap();
        assert_eq!(a, b);
        for k in 0..50 {
            let probe = [k as f64 / 50.0, 1.0 - k as f64 / 70.0];
            assert_eq!(a.predict_proba(&probe), b.predict_proba(&probe));
        }
    }

    #[test]
    fn depth_is_capped() {
        // Noisy labels force deep trees.
        let xs: Vec<Vec<f64>> = (0..200).map(|i| vec![(i as f64 * 0.618).fract(), (i as f64 * 0.414).fract()]).collect();
        let ys: Vec<bool> = (0..200).map(|i| (i * 7919) % 3 == 0).collect();
        let cfg = ForestConfig { n_trees: 5, max_depth: 3, ..Default::default() };
        let clf = ContextClassifier::train(&xs, &ys, &cfg).unwrap();
        assert!(clf.trees().iter().all(|t| t.depth() <= 3));
    }

    #[test]
    fn hand_built_votes() {
        let trees = vec![
            DecisionTree::stump(0, 0.5, false, true),
            DecisionTree::stump(1, 0.5, false, true),
            DecisionTree::stump(0, 0.2, false, true),
        ];
        let clf = ContextClassifier::from_trees(2, trees).unwrap();
        assert_eq!(clf.predict_proba(&[0.0, 0.0]), 0.0);
        assert_eq!(clf.predict_proba(&[0.3, 0.0]), 1.0 / 3.0);
        assert_eq!(clf.predict_proba(&[0.6, 0.0]), 2.0 / 3.0);
        assert_eq!(clf.predict_proba(&[0.6, 0.9]), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn probability_is_a_vote_fraction(seed in any::<u64>(), probe in proptest::collection::vec(-1.0f64..2.0, 2)) {
            let (xs, ys) = separable();
            let cfg = ForestConfig { n_trees: 13, seed, ..Default::default() };
            let clf = ContextClassifier::train(&xs, &ys, &cfg).unwrap();
            let p = clf.predict_proba(&probe);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert_eq!(p, clf.positive_votes(&probe) as f64 / 13.0);
        }

        #[test]
        fn order_of_training_rows_is_irrelevant(seed in any::<u64>(), rot in 0usize..20) {
            let (mut xs, mut ys) = separable();
            let cfg = ForestConfig { n_trees: 9, seed, ..Default::default() };
            let a = ContextClassifier::train(&xs, &ys, &cfg).unwrap();
            xs.rotate_left(rot);
            ys.rotate_left(rot);
            xs.reverse();
            ys.reverse();
            let b = ContextClassifier::train(&xs, &ys, &cfg).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
