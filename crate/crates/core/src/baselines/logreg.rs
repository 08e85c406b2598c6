use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BaselineError, FeatureMatrix, Labels, SparseRow};

pub const DEFAULT_L2_LAMBDA: f64 = 1e-4;
pub const DEFAULT_EPOCHS: usize = 300;
pub const DEFAULT_LR: f64 = 1.0;
pub const INIT_RANGE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogRegMode {
    /// One softmax over all classes.
    Softmax,
    /// One independent sigmoid model per label.
    OneVsRest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegConfig {
    pub l2_lambda: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig { l2_lambda: DEFAULT_L2_LAMBDA, epochs: DEFAULT_EPOCHS, lr: DEFAULT_LR, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub mode: LogRegMode,
    pub n_outputs: usize,
    pub n_features: usize,
    /// Row-major `n_outputs × n_features`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub l2_lambda: f64,
}

fn softmax(z: &mut [f64]) {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    z.iter_mut().for_each(|v| *v /= s);
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn neg_log(p: f64) -> f64 {
    -p.max(f64::MIN_POSITIVE).ln()
}

impl LogRegModel {
    fn init(mode: LogRegMode, n_outputs: usize, n_features: usize, cfg: &LogRegConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let weights = (0..n_outputs * n_features).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect();
        let bias = (0..n_outputs).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect();
        LogRegModel { mode, n_outputs, n_features, weights, bias, l2_lambda: cfg.l2_lambda }
    }

    fn scores(&self, row: &SparseRow) -> Vec<f64> {
        (0..self.n_outputs)
            .map(|k| {
                let w = &self.weights[k * self.n_features..(k + 1) * self.n_features];
                self.bias[k] + row.idx.iter().zip(&row.val).filter(|(c, _)| **c < self.n_features).map(|(&c, &v)| w[c] * v).sum::<f64>()
            })
            .collect()
    }

    /// Class probabilities (softmax) or per-label probabilities (one-vs-rest).
    pub fn predict_proba(&self, row: &SparseRow) -> Vec<f64> {
        let mut z = self.scores(row);
        match self.mode {
            LogRegMode::Softmax => softmax(&mut z),
            LogRegMode::OneVsRest => z.iter_mut().for_each(|v| *v = sigmoid(*v)),
        }
        z
    }

    /// Regularized objective: mean cross-entropy (summed over labels in
    /// one-vs-rest mode) plus `λ/2 · ‖W‖²`.
    pub fn loss(&self, x: &FeatureMatrix, labels: &Labels) -> f64 {
        let n = x.rows.len() as f64;
        let mut data = 0.0;
        for (i, row) in x.rows.iter().enumerate() {
            let p = self.predict_proba(row);
            match labels {
                Labels::Single { classes, .. } => data += neg_log(p[classes[i]]),
                Labels::Multi { rows, .. } => {
                    for (k, &on) in rows[i].iter().enumerate() {
                        data += if on { neg_log(p[k]) } else { neg_log(1.0 - p[k]) };
                    }
                }
            }
        }
        data / n + 0.5 * self.l2_lambda * self.weight_norm_sq()
    }

    pub fn weight_norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

/// Full-batch gradient descent. Returns the model and the objective before
/// each epoch followed by the final objective.
pub fn train_logreg(x: &FeatureMatrix, labels: &Labels, cfg: &LogRegConfig) -> Result<(LogRegModel, Vec<f64>), BaselineError> {
    if x.rows.is_empty() {
        return Err(BaselineError::EmptyData);
    }
    labels.check(x.rows.len())?;
    if !(cfg.l2_lambda >= 0.0 && cfg.lr > 0.0 && cfg.lr.is_finite() && cfg.l2_lambda.is_finite()) {
        return Err(BaselineError::InvalidConfig("lr must be positive and l2_lambda non-negative".into()));
    }
    let (mode, k) = match labels {
        Labels::Single { n_classes, .. } => (LogRegMode::Softmax, *n_classes),
        Labels::Multi { n_labels, .. } => (LogRegMode::OneVsRest, *n_labels),
    };
    let f = x.n_features;
    let mut model = LogRegModel::init(mode, k, f, cfg);
    let n = x.rows.len() as f64;
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    for _ in 0..cfg.epochs {
        history.push(model.loss(x, labels));
        let mut gw = vec![0.0; k * f];
        let mut gb = vec![0.0; k];
        for (i, row) in x.rows.iter().enumerate() {
            let mut d = model.predict_proba(row);
            match labels {
                Labels::Single { classes, .. } => d[classes[i]] -= 1.0,
                Labels::Multi { rows, .. } => {
                    for (dk, &on) in d.iter_mut().zip(&rows[i]) {
                        *dk -= if on { 1.0 } else { 0.0 };
                    }
                }
            }
            for c in 0..k {
                gb[c] += d[c] / n;
                for (&j, &v) in row.idx.iter().zip(&row.val) {
                    gw[c * f + j] += d[c] * v / n;
                }
            }
        }
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= cfg.lr * (g + cfg.l2_lambda * *w);
        }
        for (b, g) in model.bias.iter_mut().zip(&gb) {
            *b -= cfg.lr * g;
        }
    }
    history.push(model.loss(x, labels));
    Ok((model, history))
}
