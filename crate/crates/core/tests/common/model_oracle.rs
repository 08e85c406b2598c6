//! Independent scalar re-implementation of the recurrent model and a
//! central-difference gradient checker.

#![allow(dead_code, clippy::needless_range_loop)]

use ladiff_core::model::{
    init_model, ForwardState, GroupFreezeState, LayerGroupedModel, ModelConfig, ModelKind, Targets,
};

pub fn tiny_config(seed: u64) -> ModelConfig {
    ModelConfig { vocab_size: 11, embed_dim: 3, hidden_dim: 4, num_recurrent_layers: 2, num_classes: 2, multilabel: false, seed }
}

/// Overwrites every parameter with a fixed deterministic pattern.
pub fn handset(model: &mut LayerGroupedModel) {
    for (g, group) in model.groups.iter_mut().enumerate() {
        for (ti, t) in group.tensors.iter_mut().enumerate() {
            for (k, v) in t.data.iter_mut().enumerate() {
                *v = 0.37 * ((k * 5 + ti * 11 + g * 17) as f64 * 0.731).sin();
            }
        }
    }
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn at(m: &[f64], cols: usize, r: usize, c: usize) -> f64 {
    m[r * cols + c]
}

/// One recurrent layer, straight-line.
fn layer(model: &LayerGroupedModel, l: usize, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t = &model.groups[l + 1].tensors;
    let n_in = t[0].shape[1];
    let n_out = t[0].shape[0];
    let (wf, uf, bf, wc, uc, bc) = (&t[0].data, &t[1].data, &t[2].data, &t[3].data, &t[4].data, &t[5].data);
    let mut h = vec![0.0; n_out];
    let mut out = Vec::new();
    for x in xs {
        let mut f = vec![0.0; n_out];
        for i in 0..n_out {
            let mut a = bf[i];
            for j in 0..n_in {
                a += at(wf, n_in, i, j) * x[j];
            }
            for j in 0..n_out {
                a += at(uf, n_out, i, j) * h[j];
            }
            f[i] = sig(a);
        }
        let mut next = vec![0.0; n_out];
        for i in 0..n_out {
            let mut a = bc[i];
            for j in 0..n_in {
                a += at(wc, n_in, i, j) * x[j];
            }
            for j in 0..n_out {
                a += at(uc, n_out, i, j) * f[j] * h[j];
            }
            next[i] = (1.0 - f[i]) * h[i] + f[i] * a.tanh();
        }
        h = next;
        out.push(h.clone());
    }
    out
}

fn top_states(model: &LayerGroupedModel, ids: &[usize]) -> Vec<Vec<f64>> {
    let e = model.config.embed_dim;
    let emb = &model.groups[0].tensors[0].data;
    let mut xs: Vec<Vec<f64>> = ids.iter().map(|&id| (0..e).map(|j| emb[id * e + j]).collect()).collect();
    for l in 0..model.config.num_recurrent_layers {
        xs = layer(model, l, &xs);
    }
    xs
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ex: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = ex.iter().sum();
    ex.iter().map(|v| v / s).collect()
}

pub fn lm_probs(model: &LayerGroupedModel, ids: &[usize]) -> Vec<Vec<f64>> {
    let (v, e) = (model.config.vocab_size, model.config.embed_dim);
    let emb = &model.groups[0].tensors[0].data;
    let bias = &model.groups.last().unwrap().tensors[0].data;
    top_states(model, ids)
        .iter()
        .map(|h| {
            let z: Vec<f64> = (0..v).map(|w| bias[w] + (0..e).map(|j| emb[w * e + j] * h[j]).sum::<f64>()).collect();
            softmax(&z)
        })
        .collect()
}

pub fn clf_outputs(model: &LayerGroupedModel, ids: &[usize]) -> Vec<f64> {
    let (c, e) = (model.config.num_classes, model.config.embed_dim);
    let hs = top_states(model, ids);
    let mut feat = Vec::new();
    for j in 0..e {
        feat.push(hs.iter().map(|h| h[j]).sum::<f64>() / hs.len() as f64);
    }
    for j in 0..e {
        feat.push(hs.iter().map(|h| h[j]).fold(f64::NEG_INFINITY, f64::max));
    }
    feat.extend_from_slice(hs.last().unwrap());
    let head = &model.groups.last().unwrap().tensors;
    let z: Vec<f64> = (0..c).map(|k| head[1].data[k] + (0..3 * e).map(|j| head[0].data[k * 3 * e + j] * feat[j]).sum::<f64>()).collect();
    if model.config.multilabel {
        z.iter().map(|&x| sig(x)).collect()
    } else {
        softmax(&z)
    }
}

/// Smallest gap between the largest and second-largest value of any max-pooled
/// unit; finite differences are unreliable when this is tiny.
pub fn min_max_pool_gap(model: &LayerGroupedModel, batch: &[Vec<usize>]) -> f64 {
    let mut gap = f64::INFINITY;
    for ids in batch {
        let hs = top_states(model, ids);
        for j in 0..model.config.embed_dim {
            let mut col: Vec<f64> = hs.iter().map(|h| h[j]).collect();
            col.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if col.len() > 1 {
                gap = gap.min(col[0] - col[1]);
            }
        }
    }
    gap
}

fn forward(model: &LayerGroupedModel, batch: &[Vec<usize>]) -> ForwardState {
    match model.kind {
        ModelKind::LanguageModel => model.lm_forward(batch).unwrap(),
        ModelKind::Classifier => model.clf_forward(batch).unwrap(),
    }
}

pub fn loss(model: &LayerGroupedModel, batch: &[Vec<usize>], targets: &Targets) -> f64 {
    model.loss(&forward(model, batch), targets).unwrap()
}

/// `|a − n| / max(|a|, |n|, 1e-6)`.
pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

pub struct FdReport {
    pub max_rel_err: f64,
    pub checked: usize,
}

/// Compares every returned partial derivative with a central difference.
pub fn finite_difference(model: &LayerGroupedModel, batch: &[Vec<usize>], targets: &Targets, h: f64) -> FdReport {
    let freeze = GroupFreezeState::all_unfrozen(model.num_groups());
    let grads = model.backward(&forward(model, batch), targets, &freeze).unwrap();
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for g in 0..model.num_groups() {
        let gg = grads.group(g).expect("unfrozen group has gradients");
        for t in 0..model.groups[g].tensors.len() {
            for k in 0..model.groups[g].tensors[t].data.len() {
                let orig = probe.groups[g].tensors[t].data[k];
                probe.groups[g].tensors[t].data[k] = orig + h;
                let up = loss(&probe, batch, targets);
                probe.groups[g].tensors[t].data[k] = orig - h;
                let down = loss(&probe, batch, targets);
                probe.groups[g].tensors[t].data[k] = orig;
                let numeric = (up - down) / (2.0 * h);
                worst = worst.max(rel_err(gg[t][k], numeric));
                checked += 1;
            }
        }
    }
    FdReport { max_rel_err: worst, checked }
}

pub fn fd_batch() -> Vec<Vec<usize>> {
    vec![vec![2, 5, 7, 1, 9], vec![2, 3, 10, 4, 4]]
}

pub fn fd_lm_targets() -> Targets {
    Targets::NextToken(vec![vec![5, 7, 1, 9, 0], vec![3, 10, 4, 4, 8]])
}

pub fn tiny_lm(seed: u64) -> LayerGroupedModel {
    init_model(&tiny_config(seed), ModelKind::LanguageModel).unwrap()
}
