//! Adaptive-moment optimizer with per-group state.

use crate::model::{Gradients, LayerGroupedModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { beta1: 0.9, beta2: 0.99, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl Moments {
    pub fn zeros(shapes: &[usize]) -> Self {
        Moments { step: 0, m: shapes.iter().map(|&n| vec![0.0; n]).collect(), v: shapes.iter().map(|&n| vec![0.0; n]).collect() }
    }
}

/// One bias-corrected update of `params` in place.
pub fn optimizer_step(params: &mut [Vec<f64>], grads: &[Vec<f64>], moments: &mut Moments, lr: f64, cfg: &AdamConfig) {
    moments.step += 1;
    let t = moments.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let (m, v) = (&mut moments.m[k], &mut moments.v[k]);
        for i in 0..p.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
}

/// Moments for every group; a group's moments are zeroed when it thaws.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupOptimizer {
    pub config: AdamConfig,
    pub groups: Vec<Option<Moments>>,
}

impl GroupOptimizer {
    pub fn new(num_groups: usize, config: AdamConfig) -> Self {
        GroupOptimizer { config, groups: vec![None; num_groups] }
    }

    /// Applies `grads` with per-group rates; groups without gradients lose
    /// their moments so a later thaw starts fresh.
    pub fn step(&mut self, model: &mut LayerGroupedModel, grads: Gradients, lrs: &[f64]) {
        for (g, grad) in grads.groups.into_iter().enumerate() {
            let Some(grad) = grad else {
                self.groups[g] = None;
                continue;
            };
            let group = &mut model.groups[g];
            let moments = self.groups[g].get_or_insert_with(|| {
                Moments::zeros(&group.tensors.iter().map(|t| t.data.len()).collect::<Vec<_>>())
            });
            let mut params: Vec<Vec<f64>> = group.tensors.iter_mut().map(|t| std::mem::take(&mut t.data)).collect();
            optimizer_step(&mut params, &grad, moments, lrs[g], &self.config);
            for (t, p) in group.tensors.iter_mut().zip(params) {
                t.data = p;
            }
        }
    }
}
