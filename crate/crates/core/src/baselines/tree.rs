//! CART decision trees with Gini impurity.

use rand::seq::index;
use rand::Rng;

use super::{BaselineError, FeatureMatrix};

/// A split must lower weighted Gini by more than this, and a candidate must
/// beat the incumbent by more than this to replace it.
pub const IMPURITY_TOL: f64 = 1e-12;

/// `1 − Σ pᵢ²`.
pub fn gini(counts: &[usize]) -> Result<f64, BaselineError> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(BaselineError::EmptyNode);
    }
    Ok(gini_unchecked(counts, n))
}

fn gini_unchecked(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn weighted_gini(left: &[usize], right: &[usize]) -> f64 {
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let n = (nl + nr) as f64;
    (nl as f64 * gini_unchecked(left, nl) + nr as f64 * gini_unchecked(right, nr)) / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    /// Samples with value `<= threshold` go left.
    pub threshold: f64,
    /// Weighted child Gini.
    pub impurity: f64,
}

pub fn class_counts(y: &[usize], samples: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &s in samples {
        counts[y[s]] += 1;
    }
    counts
}

/// Best midpoint split over `features` (ascending) for the multiset
/// `samples`, or `None` when no split lowers the node's Gini.
pub fn best_split(x: &FeatureMatrix, y: &[usize], n_classes: usize, samples: &[usize], features: &[usize]) -> Option<Split> {
    if samples.is_empty() || features.is_empty() {
        return None;
    }
    let total = class_counts(y, samples, n_classes);
    let parent = gini_unchecked(&total, samples.len());
    if parent <= IMPURITY_TOL {
        return None;
    }
    // Nonzero entries per candidate feature, gathered in one pass over rows.
    let mut nonzero: Vec<Vec<(f64, usize)>> = vec![Vec::new(); features.len()];
    for &s in samples {
        let row = &x.rows[s];
        for (&c, &v) in row.idx.iter().zip(&row.val) {
            if v != 0.0 {
                if let Ok(k) = features.binary_search(&c) {
                    nonzero[k].push((v, y[s]));
                }
            }
        }
    }
    let mut best: Option<Split> = None;
    for (k, &feature) in features.iter().enumerate() {
        let entries = &mut nonzero[k];
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut zero_counts = total.clone();
        for &(_, c) in entries.iter() {
            zero_counts[c] -= 1;
        }
        let groups = value_groups(entries, zero_counts, n_classes);
        let mut left = vec![0; n_classes];
        let mut right = total.clone();
        for w in groups.windows(2) {
            let (v, counts) = (&w[0].0, &w[0].1);
            for c in 0..n_classes {
                left[c] += counts[c];
                right[c] -= counts[c];
            }
            let next = w[1].0;
            let mut threshold = (v + next) / 2.0;
            if threshold >= next {
                threshold = *v;
            }
            let impurity = weighted_gini(&left, &right);
            if impurity < parent - IMPURITY_TOL && best.is_none_or(|b| impurity < b.impurity - IMPURITY_TOL) {
                best = Some(Split { feature, threshold, impurity });
            }
        }
    }
    best
}

/// Distinct values in ascending order with per-class counts; zeros form one
/// group placed by value.
fn value_groups(sorted_nonzero: &[(f64, usize)], zero_counts: Vec<usize>, n_classes: usize) -> Vec<(f64, Vec<usize>)> {
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    let has_zero = zero_counts.iter().any(|&c| c > 0);
    let mut zero = has_zero.then_some(zero_counts);
    for &(v, c) in sorted_nonzero {
        if v > 0.0 {
            if let Some(z) = zero.take() {
                groups.push((0.0, z));
            }
        }
        match groups.last_mut() {
            Some((last, counts)) if *last == v => counts[c] += 1,
            _ => {
                let mut counts = vec![0; n_classes];
                counts[c] += 1;
                groups.push((v, counts));
            }
        }
    }
    if let Some(z) = zero {
        groups.push((0.0, z));
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { counts: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    pub min_samples_split: usize,
    /// Candidate features drawn per node.
    pub max_features: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub n_classes: usize,
    /// `nodes[0]` is the root.
    pub nodes: Vec<Node>,
}

fn argmax_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

impl DecisionTree {
    /// Grows a tree on the multiset `samples`, drawing candidate features
    /// from `rng` node by node in depth-first, left-first order.
    pub fn fit<R: Rng>(
        x: &FeatureMatrix,
        y: &[usize],
        n_classes: usize,
        samples: Vec<usize>,
        cfg: &TreeConfig,
        rng: &mut R,
    ) -> Result<Self, BaselineError> {
        if samples.is_empty() {
            return Err(BaselineError::EmptyData);
        }
        let n_features = x.n_features;
        let k = cfg.max_features.clamp(1, n_features.max(1));
        let mut nodes = vec![Node::Leaf { counts: Vec::new() }];
        let mut stack = vec![(0usize, samples)];
        while let Some((id, samples)) = stack.pop() {
            let counts = class_counts(y, &samples, n_classes);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let split = if samples.len() < cfg.min_samples_split || pure || n_features == 0 {
                None
            } else {
                let mut features = index::sample(rng, n_features, k).into_vec();
                features.sort_unstable();
                best_split(x, y, n_classes, &samples, &features)
            };
            let Some(split) = split else {
                nodes[id] = Node::Leaf { counts };
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) =
                samples.iter().partition(|&&s| x.rows[s].get(split.feature) <= split.threshold);
            debug_assert!(!left.is_empty() && !right.is_empty());
            let (l, r) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf { counts: Vec::new() });
            nodes.push(Node::Leaf { counts: Vec::new() });
            nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: r };
            stack.push((r, right));
            stack.push((l, left));
        }
        Ok(DecisionTree { n_classes, nodes })
    }

    pub fn leaf_counts(&self, row: &super::SparseRow) -> &[usize] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right } => {
                    id = if row.get(*feature) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Majority class of the reached leaf; ties go to the lower class.
    pub fn predict(&self, row: &super::SparseRow) -> usize {
        argmax_count(self.leaf_counts(row))
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

pub(crate) fn vote(votes: &[usize]) -> usize {
    argmax_count(votes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[4, 0]).unwrap(), 0.0);
        assert_eq!(gini(&[2, 2]).unwrap(), 0.5);
        assert!((gini(&[3, 1]).unwrap() - 0.375).abs() < 1e-15);
        assert!(gini(&[0, 0]).is_err());
    }

    #[test]
    fn split_examples() {
        let x = dense(&[&[1.0], &[2.0], &[10.0], &[11.0]]);
        let s = best_split(&x, &[0, 0, 1, 1], 2, &[0, 1, 2, 3], &[0]).unwrap();
        assert_eq!((s.feature, s.threshold, s.impurity), (0, 6.0, 0.0));
        assert!(best_split(&x, &[1, 1, 1, 1], 2, &[0, 1, 2, 3], &[0]).is_none());
        let x = dense(&[&[1.0, 0.0], &[2.0, 5.0], &[1.5, 0.0], &[1.2, 5.0]]);
        let s = best_split(&x, &[0, 1, 0, 1], 2, &[0, 1, 2, 3], &[0, 1]).unwrap();
        assert_eq!((s.feature, s.threshold), (1, 2.5));
    }

    #[test]
    fn zero_group_sorts_between_signs() {
        let x = dense(&[&[-1.0], &[0.0], &[0.0], &[3.0]]);
        let s = best_split(&x, &[0, 1, 1, 1], 2, &[0, 1, 2, 3], &[0]).unwrap();
        assert_eq!(s.threshold, -0.5);
        let s = best_split(&x, &[0, 0, 0, 1], 2, &[0, 1, 2, 3], &[0]).unwrap();
        assert_eq!(s.threshold, 1.5);
    }

    #[test]
    fn tree_separates_training_data() {
        let x = dense(&[&[0.0, 1.0], &[0.1, 0.9], &[1.0, 0.0], &[0.9, 0.2], &[0.5, 0.5]]);
        let y = [0, 0, 1, 1, 1];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let t = DecisionTree::fit(&x, &y, 2, (0..5).collect(), &TreeConfig { min_samples_split: 2, max_features: 2 }, &mut rng).unwrap();
        for (i, row) in x.rows.iter().enumerate() {
            assert_eq!(t.predict(row), y[i]);
        }
        assert!(t.depth() >= 1);
    }

    use rand::SeedableRng;
}
