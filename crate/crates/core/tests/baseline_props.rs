#[path = "common/separable_points.rs"]
mod points;
#[path = "common/split_oracle.rs"]
mod split_oracle;

use ladiff_core::baselines::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn one_d() -> (FeatureMatrix, Labels) {
    let x = FeatureMatrix::from_dense(&[vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]]);
    (x, Labels::Single { classes: vec![0, 0, 1, 1], n_classes: 2 })
}

fn accuracy(pred: &[usize], gold: &[usize]) -> f64 {
    pred.iter().zip(gold).filter(|(a, b)| a == b).count() as f64 / gold.len() as f64
}

#[test]
fn logreg_separates_four_points() {
    let (x, labels) = one_d();
    let cfg = LogRegConfig { lr: 0.01, epochs: 200, l2_lambda: 0.0, seed: 1 };
    let (m, hist) = train_logreg(&x, &labels, &cfg).unwrap();
    for w in hist.windows(2) {
        assert!(w[1] <= w[0], "loss rose: {} -> {}", w[0], w[1]);
    }
    let Predictions::Single(p) = BaselineClassifier::LogReg(m).predict(&x) else { panic!() };
    assert_eq!(accuracy(&p, &[0, 0, 1, 1]), 1.0);
}

#[test]
fn stronger_penalty_shrinks_weights() {
    let (x, labels) = one_d();
    let norm = |l2: f64| train_logreg(&x, &labels, &LogRegConfig { lr: 0.05, epochs: 500, l2_lambda: l2, seed: 2 }).unwrap().0.weight_norm_sq();
    assert!(norm(10.0) < norm(0.01));
}

#[test]
fn zero_epochs_is_initialization() {
    let (x, labels) = one_d();
    let a = train_logreg(&x, &labels, &LogRegConfig { epochs: 0, seed: 3, ..LogRegConfig::default() }).unwrap();
    let b = train_logreg(&x, &labels, &LogRegConfig { epochs: 0, seed: 3, ..LogRegConfig::default() }).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1.len(), 1);
    let trained = train_logreg(&x, &labels, &LogRegConfig { epochs: 1, seed: 3, ..LogRegConfig::default() }).unwrap();
    assert_ne!(trained.0, a.0);
    assert!(a.0.weights.iter().all(|w| w.abs() <= 0.01));
}

#[test]
fn logreg_one_vs_rest_has_one_model_per_label() {
    let x = FeatureMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.0, 0.0]]);
    let rows = vec![vec![true, false, false, false], vec![false, true, false, false], vec![true, true, false, false], vec![false; 4]];
    let (m, _) = train_logreg(&x, &Labels::Multi { rows: rows.clone(), n_labels: 4 }, &LogRegConfig::default()).unwrap();
    assert_eq!((m.mode, m.n_outputs), (LogRegMode::OneVsRest, 4));
    // Labels train independently: changing label 3's targets leaves the
    // other labels' parameters untouched.
    let mut flipped = rows.clone();
    flipped[0][3] = true;
    let (other, _) = train_logreg(&x, &Labels::Multi { rows: flipped, n_labels: 4 }, &LogRegConfig::default()).unwrap();
    assert_eq!(m.weights[..6], other.weights[..6]);
    assert_eq!(m.bias[..3], other.bias[..3]);
    assert_ne!(m.weights[6..], other.weights[6..]);
    let Predictions::Multi(p) = BaselineClassifier::LogReg(m).predict(&x) else { panic!() };
    assert_eq!(p, rows);
}

#[test]
fn forest_fits_separable_points() {
    let (x, y) = points::separable_points();
    let x = FeatureMatrix::from_dense(&x);
    let cfg = ForestConfig { n_estimators: 25, ..ForestConfig::default() };
    let f = train_forest(&x, &y, 2, &cfg).unwrap();
    assert!(accuracy(&f.predict_all(&x), &y) >= 0.95);
    let g = train_forest(&x, &y, 2, &cfg).unwrap();
    assert_eq!(f, g);
}

#[test]
fn forest_matches_sequential_build() {
    use rand::Rng;
    let (x, y) = points::separable_points();
    let x = FeatureMatrix::from_dense(&x);
    let cfg = ForestConfig { n_estimators: 6, min_samples_split: 4, ..ForestConfig::default() };
    let f = train_forest(&x, &y, 2, &cfg).unwrap();
    for (i, tree) in f.trees.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(42 + i as u64);
        let samples: Vec<usize> = (0..40).map(|_| rng.gen_range(0..40)).collect();
        let tc = TreeConfig { min_samples_split: 4, max_features: 1 };
        assert_eq!(&DecisionTree::fit(&x, &y, 2, samples, &tc, &mut rng).unwrap(), tree);
    }
    let one = train_forest(&x, &y, 2, &ForestConfig { n_estimators: 1, ..cfg }).unwrap();
    for r in &x.rows {
        assert_eq!(one.predict(r), f.trees[0].predict(r));
    }
}

#[test]
fn forest_defaults() {
    let c = ForestConfig::default();
    assert_eq!((c.n_estimators, c.min_samples_split, c.random_state), (1000, 15, 42));
    assert_eq!(c.candidate_features(100), 10);
    assert_eq!(c.candidate_features(3), 1);
    assert!(ForestConfig { min_samples_split: 1, ..c }.validate().is_err());
}

/// Replays the training samples through a tree and checks every split.
fn check_tree(tree: &DecisionTree, x: &FeatureMatrix, y: &[usize], samples: Vec<usize>, min_split: usize) {
    let mut stack = vec![(0usize, samples)];
    while let Some((id, s)) = stack.pop() {
        match &tree.nodes[id] {
            Node::Leaf { counts } => {
                assert!(!s.is_empty());
                assert_eq!(counts, &class_counts(y, &s, tree.n_classes));
            }
            Node::Split { feature, threshold, left, right } => {
                assert!(s.len() >= min_split);
                let (l, r): (Vec<usize>, Vec<usize>) = s.iter().partition(|&&i| x.rows[i].get(*feature) <= *threshold);
                assert!(!l.is_empty() && !r.is_empty());
                let parent = gini(&class_counts(y, &s, tree.n_classes)).unwrap();
                let n = s.len() as f64;
                let child = l.len() as f64 / n * gini(&class_counts(y, &l, tree.n_classes)).unwrap()
                    + r.len() as f64 / n * gini(&class_counts(y, &r, tree.n_classes)).unwrap();
                assert!(child < parent);
                stack.push((*left, l));
                stack.push((*right, r));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_matches_exhaustive_enumeration(
        rows in prop::collection::vec((prop::collection::vec(-3i32..4, 2), 0usize..3), 1..=8),
        n_feat in 1usize..=2,
        subset in 0usize..3,
    ) {
        let dense: Vec<Vec<f64>> = rows.iter().map(|(v, _)| v[..n_feat].iter().map(|&a| a as f64 * 0.5).collect()).collect();
        let y: Vec<usize> = rows.iter().map(|(_, c)| *c).collect();
        let features: Vec<usize> = match (n_feat, subset) {
            (1, _) => vec![0],
            (_, 0) => vec![0, 1],
            (_, 1) => vec![0],
            _ => vec![1],
        };
        let x = FeatureMatrix { rows: dense.iter().map(|r| SparseRow::from_dense(r)).collect(), n_features: n_feat };
        let samples: Vec<usize> = (0..dense.len()).collect();
        let got = best_split(&x, &y, 3, &samples, &features).map(|s| (s.feature, s.threshold));
        prop_assert_eq!(got, split_oracle::exhaustive_split(&dense, &y, &features));
    }

    #[test]
    fn trees_split_strictly(seed in 0u64..1000, n in 5usize..40, min_split in 2usize..8) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dense: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect()).collect();
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let x = FeatureMatrix::from_dense(&dense);
        let x = FeatureMatrix { n_features: 3, ..x };
        let samples: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let tree = DecisionTree::fit(&x, &y, 3, samples.clone(), &TreeConfig { min_samples_split: min_split, max_features: 2 }, &mut rng).unwrap();
        check_tree(&tree, &x, &y, samples, min_split);
    }

    #[test]
    fn tfidf_rows_are_unit_or_zero(docs in prop::collection::vec(prop::collection::vec("[a-e]", 0..6), 1..8), probe in prop::collection::vec("[a-g]", 0..6)) {
        let m = TfidfModel::fit(&docs).unwrap();
        prop_assert!(m.idf.iter().all(|&v| v > 0.0));
        for d in docs.iter().chain(std::iter::once(&probe)) {
            let r = m.transform(d);
            prop_assert!(r.idx.is_empty() || (r.norm() - 1.0).abs() < 1e-9);
            prop_assert_eq!(&r, &m.transform(d));
        }
    }
}
