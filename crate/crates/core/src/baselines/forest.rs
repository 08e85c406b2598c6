use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::{vote, DecisionTree, TreeConfig};
use super::{BaselineError, FeatureMatrix, SparseRow};

pub const DEFAULT_N_ESTIMATORS: usize = 1000;
pub const DEFAULT_MIN_SAMPLES_SPLIT: usize = 15;
pub const DEFAULT_RANDOM_STATE: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestConfig {
    pub n_estimators: usize,
    pub min_samples_split: usize,
    pub random_state: u64,
    /// Candidate features per node; `None` means `floor(sqrt(F))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_estimators: DEFAULT_N_ESTIMATORS,
            min_samples_split: DEFAULT_MIN_SAMPLES_SPLIT,
            random_state: DEFAULT_RANDOM_STATE,
            max_features: None,
            bootstrap: true,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.n_estimators == 0 {
            return Err(BaselineError::InvalidConfig("n_estimators must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(BaselineError::InvalidConfig("min_samples_split must be >= 2".into()));
        }
        if self.max_features == Some(0) {
            return Err(BaselineError::InvalidConfig("max_features must be >= 1".into()));
        }
        Ok(())
    }

    pub fn candidate_features(&self, n_features: usize) -> usize {
        self.max_features.unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub n_classes: usize,
    pub trees: Vec<DecisionTree>,
}

/// Tree `i` draws its bootstrap sample and candidate features from a
/// generator seeded with `random_state + i`, so the parallel build equals
/// the sequential one.
pub fn train_forest(x: &FeatureMatrix, y: &[usize], n_classes: usize, cfg: &ForestConfig) -> Result<Forest, BaselineError> {
    cfg.validate()?;
    if x.rows.is_empty() {
        return Err(BaselineError::EmptyData);
    }
    if x.rows.len() != y.len() {
        return Err(BaselineError::LengthMismatch { rows: x.rows.len(), targets: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(BaselineError::InvalidLabel(bad));
    }
    let tree_cfg = TreeConfig { min_samples_split: cfg.min_samples_split, max_features: cfg.candidate_features(x.n_features) };
    let n = x.rows.len();
    let trees = (0..cfg.n_estimators)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.random_state.wrapping_add(i as u64));
            let samples: Vec<usize> = if cfg.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            DecisionTree::fit(x, y, n_classes, samples, &tree_cfg, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Forest { n_classes, trees })
}

impl Forest {
    pub fn votes(&self, row: &SparseRow) -> Vec<usize> {
        let mut votes = vec![0; self.n_classes];
        for t in &self.trees {
            votes[t.predict(row)] += 1;
        }
        votes
    }

    /// Majority vote; ties go to the lower class.
    pub fn predict(&self, row: &SparseRow) -> usize {
        vote(&self.votes(row))
    }

    pub fn predict_all(&self, x: &FeatureMatrix) -> Vec<usize> {
        x.rows.par_iter().map(|r| self.predict(r)).collect()
    }
}
