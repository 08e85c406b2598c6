//! Layer-grouped recurrent language model and classifier.
//!
//! Parameter groups, in order:
//!
//! * group 0: token embedding `[vocab × embed]`, also the (tied) output
//!   projection of the language model;
//! * groups 1..=L: one group per recurrent layer. Layer `l` maps
//!   `embed|hidden → hidden|embed`; the last layer emits `embed` units so the
//!   tied projection applies;
//! * group L+1: the task head. For the language model a vocabulary bias; for
//!   the classifier a linear map from concat-pooled features (mean, max, last;
//!   `3 × embed`) to class scores.
//!
//! Groups are the unit of freezing.

mod cell;
mod checkpoint;
mod linalg;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use cell::LayerTrace;
pub use checkpoint::Checkpoint;

use cell::CellParams;
use linalg::{matvec, matvec_t_add, outer_add, sigmoid, softmax};

pub const INIT_RANGE: f64 = 0.1;

const BACKWARD_CHUNK: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    IdOutOfRange { id: usize, vocab_size: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("empty batch")]
    EmptyBatch,
    #[error("operation needs a {expected} model")]
    WrongKind { expected: &'static str },
    #[error("forward state does not match this model")]
    StateMismatch,
    #[error("targets do not match outputs: {0}")]
    TargetMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("freeze state has {got} groups, model has {expected}")]
    FreezeMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub num_recurrent_layers: usize,
    /// Classifier outputs; ignored by the language model.
    pub num_classes: usize,
    pub multilabel: bool,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(vocab_size: usize) -> Self {
        ModelConfig {
            vocab_size,
            embed_dim: 64,
            hidden_dim: 128,
            num_recurrent_layers: 2,
            num_classes: 2,
            multilabel: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.vocab_size < 3 {
            return Err(ModelError::InvalidConfig("vocab_size must be >= 3".into()));
        }
        for (name, v) in [
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("num_recurrent_layers", self.num_recurrent_layers),
            ("num_classes", self.num_classes),
        ] {
            if v == 0 {
                return Err(ModelError::InvalidConfig(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }

    pub fn num_groups(&self) -> usize {
        self.num_recurrent_layers + 2
    }

    fn layer_dims(&self, layer: usize) -> (usize, usize) {
        let last = self.num_recurrent_layers - 1;
        let in_dim = if layer == 0 { self.embed_dim } else { self.hidden_dim };
        let out_dim = if layer == last { self.embed_dim } else { self.hidden_dim };
        (in_dim, out_dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    LanguageModel,
    Classifier,
}

impl ModelKind {
    fn label(self) -> &'static str {
        match self {
            ModelKind::LanguageModel => "language",
            ModelKind::Classifier => "classifier",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    fn uniform(name: &str, shape: Vec<usize>, rng: &mut ChaCha8Rng) -> Self {
        let len = shape.iter().product();
        let data = (0..len).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect();
        Tensor { name: name.to_string(), shape, data }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamGroup {
    pub name: String,
    pub tensors: Vec<Tensor>,
}

impl ParamGroup {
    pub fn num_params(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGroupedModel {
    pub config: ModelConfig,
    pub kind: ModelKind,
    pub groups: Vec<ParamGroup>,
}

/// Per-group frozen flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupFreezeState {
    pub frozen: Vec<bool>,
}

impl GroupFreezeState {
    pub fn all_unfrozen(num_groups: usize) -> Self {
        GroupFreezeState { frozen: vec![false; num_groups] }
    }

    pub fn all_frozen(num_groups: usize) -> Self {
        GroupFreezeState { frozen: vec![true; num_groups] }
    }

    /// Only the last `count` groups unfrozen.
    pub fn top_unfrozen(num_groups: usize, count: usize) -> Self {
        let first = num_groups.saturating_sub(count);
        GroupFreezeState { frozen: (0..num_groups).map(|g| g < first).collect() }
    }

    pub fn is_frozen(&self, group: usize) -> bool {
        self.frozen[group]
    }

    pub fn unfrozen_count(&self) -> usize {
        self.frozen.iter().filter(|f| !**f).count()
    }
}

/// Gradients for the unfrozen groups; `None` for frozen ones. Tensor layout
/// mirrors the model's.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub groups: Vec<Option<Vec<Vec<f64>>>>,
}

impl Gradients {
    pub fn is_empty(&self) -> bool {
        self.groups.iter().all(Option::is_none)
    }

    pub fn group(&self, g: usize) -> Option<&[Vec<f64>]> {
        self.groups.get(g).and_then(|o| o.as_deref())
    }
}

/// Training targets, one entry per sequence in the batch.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// Next-token ids, one per input position.
    NextToken(Vec<Vec<usize>>),
    /// Class index per sequence (softmax head).
    Class(Vec<usize>),
    /// Multi-hot vector per sequence (sigmoid head).
    MultiHot(Vec<Vec<f64>>),
}

#[derive(Debug, Clone)]
pub struct SequenceState {
    pub(crate) ids: Vec<usize>,
    pub(crate) layers: Vec<LayerTrace>,
    /// Classifier only: pooled features and the argmax timestep per max unit.
    pub(crate) pooled: Vec<f64>,
    pub(crate) argmax: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum Outputs {
    /// Per sequence, per position: probability distribution over the vocabulary.
    Lm(Vec<Vec<Vec<f64>>>),
    /// Per sequence: softmax probabilities or per-class sigmoids.
    Classifier(Vec<Vec<f64>>),
}

/// Everything the backward pass needs for one batch.
#[derive(Debug, Clone)]
pub struct ForwardState {
    pub(crate) kind: ModelKind,
    pub(crate) config: ModelConfig,
    pub(crate) sequences: Vec<SequenceState>,
    pub outputs: Outputs,
}

impl ForwardState {
    pub fn lm_predictions(&self) -> Option<&[Vec<Vec<f64>>]> {
        match &self.outputs {
            Outputs::Lm(p) => Some(p),
            Outputs::Classifier(_) => None,
        }
    }

    pub fn class_outputs(&self) -> Option<&[Vec<f64>]> {
        match &self.outputs {
            Outputs::Classifier(p) => Some(p),
            Outputs::Lm(_) => None,
        }
    }

    /// Top-layer hidden states of sequence `i`.
    pub fn top_states(&self, i: usize) -> &[Vec<f64>] {
        self.sequences[i].layers.last().unwrap().outputs()
    }

    pub fn pooled(&self, i: usize) -> &[f64] {
        &self.sequences[i].pooled
    }
}

fn head_shapes(cfg: &ModelConfig, kind: ModelKind) -> Vec<(&'static str, Vec<usize>)> {
    match kind {
        ModelKind::LanguageModel => vec![("out_bias", vec![cfg.vocab_size])],
        ModelKind::Classifier => vec![
            ("weight", vec![cfg.num_classes, 3 * cfg.embed_dim]),
            ("bias", vec![cfg.num_classes]),
        ],
    }
}

fn head_group(cfg: &ModelConfig, kind: ModelKind, rng: &mut ChaCha8Rng) -> ParamGroup {
    let name = match kind {
        ModelKind::LanguageModel => "lm_head",
        ModelKind::Classifier => "classifier_head",
    };
    ParamGroup {
        name: name.into(),
        tensors: head_shapes(cfg, kind).into_iter().map(|(n, s)| Tensor::uniform(n, s, rng)).collect(),
    }
}

/// Builds a model with every parameter drawn uniformly from
/// `[-0.1, 0.1]` using a generator seeded by `cfg.seed`.
pub fn init_model(cfg: &ModelConfig, kind: ModelKind) -> Result<LayerGroupedModel, ModelError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut groups = Vec::with_capacity(cfg.num_groups());
    groups.push(ParamGroup {
        name: "embedding".into(),
        tensors: vec![Tensor::uniform("weight", vec![cfg.vocab_size, cfg.embed_dim], &mut rng)],
    });
    for layer in 0..cfg.num_recurrent_layers {
        let (i, o) = cfg.layer_dims(layer);
        let tensors = cell::TENSOR_NAMES
            .iter()
            .zip(cell::tensor_shapes(i, o))
            .map(|(n, s)| Tensor::uniform(n, s, &mut rng))
            .collect();
        groups.push(ParamGroup { name: format!("recurrent_{layer}"), tensors });
    }
    groups.push(head_group(cfg, kind, &mut rng));
    Ok(LayerGroupedModel { config: cfg.clone(), kind, groups })
}

/// Copies the embedding and recurrent groups of a language model into a new
/// classifier whose head is drawn from `seed`.
pub fn init_classifier_from_lm(
    lm: &LayerGroupedModel,
    num_classes: usize,
    multilabel: bool,
    seed: u64,
) -> Result<LayerGroupedModel, ModelError> {
    if lm.kind != ModelKind::LanguageModel {
        return Err(ModelError::WrongKind { expected: "language" });
    }
    lm.check_shapes()?;
    let cfg = ModelConfig { num_classes, multilabel, seed, ..lm.config.clone() };
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: Vec<ParamGroup> = lm.groups[..=cfg.num_recurrent_layers].to_vec();
    groups.push(head_group(&cfg, ModelKind::Classifier, &mut rng));
    Ok(LayerGroupedModel { config: cfg, kind: ModelKind::Classifier, groups })
}

impl LayerGroupedModel {
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn num_params(&self) -> usize {
        self.groups.iter().map(ParamGroup::num_params).sum()
    }

    pub fn embedding(&self) -> &[f64] {
        &self.groups[0].tensors[0].data
    }

    /// The language model's output projection, which is the embedding matrix.
    pub fn output_projection(&self) -> &[f64] {
        self.embedding()
    }

    fn head(&self) -> &ParamGroup {
        self.groups.last().unwrap()
    }

    /// Checks every group against the shapes the config implies.
    pub fn check_shapes(&self) -> Result<(), ModelError> {
        let cfg = &self.config;
        if self.groups.len() != cfg.num_groups() {
            return Err(ModelError::DimensionMismatch(format!(
                "{} groups, config implies {}",
                self.groups.len(),
                cfg.num_groups()
            )));
        }
        let mut expected: Vec<Vec<Vec<usize>>> = vec![vec![vec![cfg.vocab_size, cfg.embed_dim]]];
        for layer in 0..cfg.num_recurrent_layers {
            let (i, o) = cfg.layer_dims(layer);
            expected.push(cell::tensor_shapes(i, o).to_vec());
        }
        expected.push(head_shapes(cfg, self.kind).into_iter().map(|(_, s)| s).collect());
        for (g, (group, shapes)) in self.groups.iter().zip(&expected).enumerate() {
            let actual: Vec<&Vec<usize>> = group.tensors.iter().map(|t| &t.shape).collect();
            let consistent = group.tensors.iter().all(|t| t.shape.iter().product::<usize>() == t.data.len());
            if actual != shapes.iter().collect::<Vec<_>>() || !consistent {
                return Err(ModelError::DimensionMismatch(format!("group {g} ({})", group.name)));
            }
        }
        Ok(())
    }

    fn cell_params(&self, layer: usize) -> CellParams<'_> {
        let (in_dim, out_dim) = self.config.layer_dims(layer);
        let t = &self.groups[layer + 1].tensors;
        CellParams {
            in_dim,
            out_dim,
            tensors: [&t[0].data, &t[1].data, &t[2].data, &t[3].data, &t[4].data, &t[5].data],
        }
    }

    fn encode(&self, ids: &[usize]) -> Result<Vec<LayerTrace>, ModelError> {
        let cfg = &self.config;
        if ids.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        if let Some(&id) = ids.iter().find(|&&id| id >= cfg.vocab_size) {
            return Err(ModelError::IdOutOfRange { id, vocab_size: cfg.vocab_size });
        }
        let emb = self.embedding();
        let e = cfg.embed_dim;
        let mut xs: Vec<Vec<f64>> = ids.iter().map(|&id| emb[id * e..(id + 1) * e].to_vec()).collect();
        let mut layers = Vec::with_capacity(cfg.num_recurrent_layers);
        for layer in 0..cfg.num_recurrent_layers {
            let trace = cell::forward(&self.cell_params(layer), xs);
            xs = trace.outputs().to_vec();
            layers.push(trace);
        }
        Ok(layers)
    }

    fn expect_kind(&self, kind: ModelKind) -> Result<(), ModelError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(ModelError::WrongKind { expected: kind.label() })
        }
    }

    /// Next-token distributions: row `t` of sequence `s` predicts the token
    /// after `batch[s][t]`.
    pub fn lm_forward(&self, batch: &[Vec<usize>]) -> Result<ForwardState, ModelError> {
        self.expect_kind(ModelKind::LanguageModel)?;
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let cfg = &self.config;
        let (v, e) = (cfg.vocab_size, cfg.embed_dim);
        let bias = &self.head().tensors[0].data;
        let per_seq: Vec<(SequenceState, Vec<Vec<f64>>)> = batch
            .par_iter()
            .map(|ids| {
                let layers = self.encode(ids)?;
                let rows = layers
                    .last()
                    .unwrap()
                    .outputs()
                    .iter()
                    .map(|h| {
                        let mut logits = vec![0.0; v];
                        matvec(self.output_projection(), v, e, h, &mut logits);
                        for (l, b) in logits.iter_mut().zip(bias) {
                            *l += b;
                        }
                        softmax(&mut logits);
                        logits
                    })
                    .collect();
                Ok((SequenceState { ids: ids.clone(), layers, pooled: Vec::new(), argmax: Vec::new() }, rows))
            })
            .collect::<Result<_, ModelError>>()?;
        let (sequences, predictions) = per_seq.into_iter().unzip();
        Ok(ForwardState { kind: self.kind, config: cfg.clone(), sequences, outputs: Outputs::Lm(predictions) })
    }

    /// Class probabilities (softmax) or per-class sigmoids (multilabel) from
    /// concat-pooled top-layer states.
    pub fn clf_forward(&self, batch: &[Vec<usize>]) -> Result<ForwardState, ModelError> {
        self.expect_kind(ModelKind::Classifier)?;
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let cfg = &self.config;
        let (c, e) = (cfg.num_classes, cfg.embed_dim);
        let head = self.head();
        let (w, b) = (&head.tensors[0].data, &head.tensors[1].data);
        let per_seq: Vec<(SequenceState, Vec<f64>)> = batch
            .par_iter()
            .map(|ids| {
                let layers = self.encode(ids)?;
                let (pooled, argmax) = concat_pool(layers.last().unwrap().outputs(), e);
                let mut scores = vec![0.0; c];
                matvec(w, c, 3 * e, &pooled, &mut scores);
                for (s, bb) in scores.iter_mut().zip(b) {
                    *s += bb;
                }
                if cfg.multilabel {
                    scores.iter_mut().for_each(|s| *s = sigmoid(*s));
                } else {
                    softmax(&mut scores);
                }
                Ok((SequenceState { ids: ids.clone(), layers, pooled, argmax }, scores))
            })
            .collect::<Result<_, ModelError>>()?;
        let (sequences, outputs) = per_seq.into_iter().unzip();
        Ok(ForwardState { kind: self.kind, config: cfg.clone(), sequences, outputs: Outputs::Classifier(outputs) })
    }

    /// Exact gradients of the mean batch loss for every unfrozen group.
    pub fn backward(
        &self,
        state: &ForwardState,
        targets: &Targets,
        freeze: &GroupFreezeState,
    ) -> Result<Gradients, ModelError> {
        if state.kind != self.kind || state.config != self.config {
            return Err(ModelError::StateMismatch);
        }
        let n_groups = self.num_groups();
        if freeze.frozen.len() != n_groups {
            return Err(ModelError::FreezeMismatch { got: freeze.frozen.len(), expected: n_groups });
        }
        validate_targets(self, state, targets)?;
        let zeros = |g: usize| -> Option<Vec<Vec<f64>>> {
            (!freeze.is_frozen(g)).then(|| self.groups[g].tensors.iter().map(|t| vec![0.0; t.data.len()]).collect())
        };
        let mut grads: Vec<Option<Vec<Vec<f64>>>> = (0..n_groups).map(zeros).collect();
        let Some(lowest) = (0..n_groups).find(|&g| !freeze.is_frozen(g)) else {
            return Ok(Gradients { groups: grads });
        };
        let norm = loss_normalizer(state, targets);
        // Fixed-size chunks of sequences in parallel, summed in batch order,
        // so the result does not depend on the thread count.
        let n = state.sequences.len();
        let parts: Vec<Vec<Option<Vec<Vec<f64>>>>> = (0..n)
            .step_by(BACKWARD_CHUNK)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|start| {
                let mut local: Vec<Option<Vec<Vec<f64>>>> = (0..n_groups).map(zeros).collect();
                for s in start..(start + BACKWARD_CHUNK).min(n) {
                    self.sequence_backward(state, s, targets, norm, lowest, &mut local);
                }
                local
            })
            .collect();
        for part in parts {
            for (acc, g) in grads.iter_mut().zip(part) {
                if let (Some(acc), Some(g)) = (acc.as_mut(), g) {
                    for (a, b) in acc.iter_mut().zip(&g) {
                        linalg::add_assign(a, b);
                    }
                }
            }
        }
        Ok(Gradients { groups: grads })
    }

    fn sequence_backward(
        &self,
        state: &ForwardState,
        s: usize,
        targets: &Targets,
        norm: f64,
        lowest: usize,
        grads: &mut [Option<Vec<Vec<f64>>>],
    ) {
        let cfg = &self.config;
        let (e, n_layers) = (cfg.embed_dim, cfg.num_recurrent_layers);
        let head_idx = self.num_groups() - 1;
        let seq = &state.sequences[s];
        let t_len = seq.ids.len();
        let mut dh = vec![vec![0.0; e]; t_len];
        match (targets, &state.outputs) {
            (Targets::NextToken(tgt), Outputs::Lm(preds)) => {
                let v = cfg.vocab_size;
                let emb = self.output_projection();
                let top = seq.layers.last().unwrap().outputs();
                for t in 0..t_len {
                    let mut dlogits = preds[s][t].clone();
                    dlogits[tgt[s][t]] -= 1.0;
                    dlogits.iter_mut().for_each(|d| *d /= norm);
                    if let Some(g) = grads[head_idx].as_mut() {
                        linalg::add_assign(&mut g[0], &dlogits);
                    }
                    if let Some(g) = grads[0].as_mut() {
                        outer_add(&mut g[0], v, e, &dlogits, &top[t]);
                    }
                    matvec_t_add(emb, v, e, &dlogits, &mut dh[t]);
                }
            }
            (_, Outputs::Classifier(outs)) => {
                let c = cfg.num_classes;
                let mut dscores = outs[s].clone();
                match targets {
                    Targets::Class(classes) => dscores[classes[s]] -= 1.0,
                    Targets::MultiHot(hot) => {
                        for (d, y) in dscores.iter_mut().zip(&hot[s]) {
                            *d -= y;
                        }
                    }
                    Targets::NextToken(_) => unreachable!("validated"),
                }
                dscores.iter_mut().for_each(|d| *d /= norm);
                let w = &self.head().tensors[0].data;
                if let Some(g) = grads[head_idx].as_mut() {
                    outer_add(&mut g[0], c, 3 * e, &dscores, &seq.pooled);
                    linalg::add_assign(&mut g[1], &dscores);
                }
                let mut dpooled = vec![0.0; 3 * e];
                matvec_t_add(w, c, 3 * e, &dscores, &mut dpooled);
                let inv_t = 1.0 / t_len as f64;
                for row in dh.iter_mut() {
                    for j in 0..e {
                        row[j] += dpooled[j] * inv_t;
                    }
                }
                for j in 0..e {
                    dh[seq.argmax[j]][j] += dpooled[e + j];
                    dh[t_len - 1][j] += dpooled[2 * e + j];
                }
            }
            _ => unreachable!("validated"),
        }

        for layer in (0..n_layers).rev() {
            let group = layer + 1;
            if group < lowest {
                break;
            }
            let need_dx = lowest < group;
            let dx = cell::backward(
                &self.cell_params(layer),
                &seq.layers[layer],
                &dh,
                grads[group].as_deref_mut(),
                need_dx,
            );
            match dx {
                Some(dx) => dh = dx,
                None => break,
            }
        }
        if let Some(g) = grads[0].as_mut() {
            for (t, &id) in seq.ids.iter().enumerate() {
                linalg::add_assign(&mut g[0][id * e..(id + 1) * e], &dh[t]);
            }
        }
    }

    /// Loss of a forward state: mean next-token cross-entropy, mean softmax
    /// cross-entropy, or mean per-label binary cross-entropy.
    pub fn loss(&self, state: &ForwardState, targets: &Targets) -> Result<f64, ModelError> {
        validate_targets(self, state, targets)?;
        match (&state.outputs, targets) {
            (Outputs::Lm(preds), Targets::NextToken(tgt)) => lm_loss(preds, tgt),
            (Outputs::Classifier(outs), Targets::Class(c)) => Ok(softmax_ce(outs, c)),
            (Outputs::Classifier(outs), Targets::MultiHot(h)) => Ok(sigmoid_bce(outs, h)),
            _ => unreachable!("validated"),
        }
    }
}

fn concat_pool(states: &[Vec<f64>], e: usize) -> (Vec<f64>, Vec<usize>) {
    let t_len = states.len();
    let mut pooled = vec![0.0; 3 * e];
    let mut argmax = vec![0usize; e];
    for j in 0..e {
        let mut sum = 0.0;
        let mut best = f64::NEG_INFINITY;
        for (t, h) in states.iter().enumerate() {
            sum += h[j];
            if h[j] > best {
                best = h[j];
                argmax[j] = t;
            }
        }
        pooled[j] = sum / t_len as f64;
        pooled[e + j] = best;
        pooled[2 * e + j] = states[t_len - 1][j];
    }
    (pooled, argmax)
}

fn loss_normalizer(state: &ForwardState, targets: &Targets) -> f64 {
    match targets {
        Targets::NextToken(t) => t.iter().map(Vec::len).sum::<usize>() as f64,
        Targets::Class(c) => c.len() as f64,
        Targets::MultiHot(h) => (h.len() * state.config.num_classes) as f64,
    }
}

fn validate_targets(model: &LayerGroupedModel, state: &ForwardState, targets: &Targets) -> Result<(), ModelError> {
    let n = state.sequences.len();
    let mismatch = |m: String| Err(ModelError::TargetMismatch(m));
    match (targets, model.kind) {
        (Targets::NextToken(t), ModelKind::LanguageModel) => {
            if t.len() != n {
                return mismatch(format!("{} target rows for {n} sequences", t.len()));
            }
            for (row, seq) in t.iter().zip(&state.sequences) {
                if row.len() != seq.ids.len() {
                    return mismatch("target length differs from sequence length".into());
                }
                if let Some(&id) = row.iter().find(|&&id| id >= model.config.vocab_size) {
                    return Err(ModelError::IdOutOfRange { id, vocab_size: model.config.vocab_size });
                }
            }
        }
        (Targets::Class(c), ModelKind::Classifier) if !model.config.multilabel => {
            if c.len() != n {
                return mismatch(format!("{} targets for {n} sequences", c.len()));
            }
            if let Some(&bad) = c.iter().find(|&&k| k >= model.config.num_classes) {
                return mismatch(format!("class {bad} >= num_classes {}", model.config.num_classes));
            }
        }
        (Targets::MultiHot(h), ModelKind::Classifier) if model.config.multilabel => {
            if h.len() != n {
                return mismatch(format!("{} targets for {n} sequences", h.len()));
            }
            if h.iter().any(|row| row.len() != model.config.num_classes) {
                return mismatch(format!("multi-hot rows must have {} entries", model.config.num_classes));
            }
        }
        _ => return mismatch("target kind does not fit the model head".into()),
    }
    Ok(())
}

fn neg_log(p: f64) -> f64 {
    -p.max(f64::MIN_POSITIVE).ln()
}

/// Mean negative log-probability of the targets over every position.
pub fn lm_loss(predictions: &[Vec<Vec<f64>>], targets: &[Vec<usize>]) -> Result<f64, ModelError> {
    if predictions.len() != targets.len() {
        return Err(ModelError::TargetMismatch("batch sizes differ".into()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (rows, tgt) in predictions.iter().zip(targets) {
        if rows.len() != tgt.len() {
            return Err(ModelError::TargetMismatch("sequence lengths differ".into()));
        }
        for (p, &t) in rows.iter().zip(tgt) {
            let prob = *p.get(t).ok_or(ModelError::IdOutOfRange { id: t, vocab_size: p.len() })?;
            total += neg_log(prob);
            count += 1;
        }
    }
    if count == 0 {
        return Err(ModelError::EmptyBatch);
    }
    Ok(total / count as f64)
}

fn softmax_ce(outs: &[Vec<f64>], classes: &[usize]) -> f64 {
    outs.iter().zip(classes).map(|(p, &c)| neg_log(p[c])).sum::<f64>() / outs.len() as f64
}

fn sigmoid_bce(outs: &[Vec<f64>], hot: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (p, y) in outs.iter().zip(hot) {
        for (&pi, &yi) in p.iter().zip(y) {
            total += yi * neg_log(pi) + (1.0 - yi) * neg_log(1.0 - pi);
            count += 1;
        }
    }
    total / count as f64
}

/// Index of the largest probability; ties go to the lower index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
