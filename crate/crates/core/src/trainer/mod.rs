//! Staged, layer-differentiated fine-tuning: gradual unfreezing on a fixed
//! batch cadence, discriminative per-group rates on a slanted-triangular
//! clock, and a per-batch loss log.

mod log;
mod optim;
mod schedule;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{LayerGroupedModel, ModelError, ModelKind, Targets};

pub use log::{LogRecord, Spike, TrainLog, CSV_HEADER};
pub use optim::{optimizer_step, AdamConfig, GroupOptimizer, Moments};
pub use schedule::{
    LRPolicy, StageSchedule, DEFAULT_BASE_LR, DEFAULT_CUT_FRAC, DEFAULT_DISCRIMINATIVE_FACTOR, DEFAULT_RATIO,
    DEFAULT_STAGE_LENGTH,
};

pub const DEFAULT_BATCH_SIZE: usize = 32;
pub const DEFAULT_BPTT: usize = 35;
pub const DEFAULT_MAX_SEQ_LEN: usize = 200;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("batch {t} out of range for a run of {total} batches")]
    BatchOutOfRange { t: usize, total: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("class-count mismatch: {0}")]
    ClassCountMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("train log: {0}")]
    LogFormat(String),
    #[error("train log csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub batch_size: usize,
    /// Language-model window length.
    pub bptt: usize,
    /// Classifier inputs are cut to their first `max_seq_len` tokens.
    pub max_seq_len: usize,
    pub adam: AdamConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { batch_size: DEFAULT_BATCH_SIZE, bptt: DEFAULT_BPTT, max_seq_len: DEFAULT_MAX_SEQ_LEN, adam: AdamConfig::default() }
    }
}

impl TrainOptions {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0 || self.bptt == 0 || self.max_seq_len == 0 {
            return Err(TrainError::InvalidConfig("batch_size, bptt and max_seq_len must be >= 1".into()));
        }
        Ok(())
    }
}

/// Token-id inputs with one target per input.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierData {
    pub inputs: Vec<Vec<usize>>,
    pub targets: Targets,
}

impl ClassifierData {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Concatenates documents into one stream and cuts it into consecutive
/// windows of at most `bptt` inputs, each paired with the next tokens.
pub fn lm_windows(docs: &[Vec<usize>], bptt: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let stream: Vec<usize> = docs.iter().flatten().copied().collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start + 1 < stream.len() {
        let end = (start + bptt + 1).min(stream.len());
        out.push((stream[start..end - 1].to_vec(), stream[start + 1..end].to_vec()));
        start += bptt;
    }
    out
}

fn select_targets(targets: &Targets, idx: &[usize]) -> Targets {
    match targets {
        Targets::NextToken(t) => Targets::NextToken(idx.iter().map(|&i| t[i].clone()).collect()),
        Targets::Class(t) => Targets::Class(idx.iter().map(|&i| t[i]).collect()),
        Targets::MultiHot(t) => Targets::MultiHot(idx.iter().map(|&i| t[i].clone()).collect()),
    }
}

fn targets_len(targets: &Targets) -> usize {
    match targets {
        Targets::NextToken(t) => t.len(),
        Targets::Class(t) => t.len(),
        Targets::MultiHot(t) => t.len(),
    }
}

/// Endless seeded sequence of shuffled mini-batches over `n` items.
struct BatchStream {
    rng: ChaCha8Rng,
    order: Vec<usize>,
    pos: usize,
    batch_size: usize,
}

impl BatchStream {
    fn new(n: usize, batch_size: usize, seed: u64) -> Self {
        BatchStream { rng: ChaCha8Rng::seed_from_u64(seed), order: (0..n).collect(), pos: n, batch_size }
    }

    fn next_batch(&mut self) -> Vec<usize> {
        if self.pos >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let batch = self.order[self.pos..end].to_vec();
        self.pos = end;
        batch
    }
}

fn forward(model: &LayerGroupedModel, inputs: &[Vec<usize>]) -> Result<crate::model::ForwardState, ModelError> {
    match model.kind {
        ModelKind::LanguageModel => model.lm_forward(inputs),
        ModelKind::Classifier => model.clf_forward(inputs),
    }
}

fn loss_weight(targets: &Targets) -> usize {
    match targets {
        Targets::NextToken(t) => t.iter().map(Vec::len).sum(),
        Targets::Class(t) => t.len(),
        Targets::MultiHot(t) => t.iter().map(Vec::len).sum(),
    }
}

/// Mean loss over a whole dataset, weighted exactly as one giant batch.
pub fn dataset_loss(model: &LayerGroupedModel, inputs: &[Vec<usize>], targets: &Targets, batch_size: usize) -> Result<f64, TrainError> {
    let mut total = 0.0;
    let mut weight = 0usize;
    let idx: Vec<usize> = (0..inputs.len()).collect();
    for chunk in idx.chunks(batch_size.max(1)) {
        let batch: Vec<Vec<usize>> = chunk.iter().map(|&i| inputs[i].clone()).collect();
        let t = select_targets(targets, chunk);
        let state = forward(model, &batch)?;
        let w = loss_weight(&t);
        total += model.loss(&state, &t)? * w as f64;
        weight += w;
    }
    if weight == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    Ok(total / weight as f64)
}

/// Next-token loss over a document set.
pub fn lm_dataset_loss(model: &LayerGroupedModel, docs: &[Vec<usize>], opts: &TrainOptions) -> Result<f64, TrainError> {
    let (inputs, targets): (Vec<_>, Vec<_>) = lm_windows(docs, opts.bptt).into_iter().unzip();
    dataset_loss(model, &inputs, &Targets::NextToken(targets), opts.batch_size)
}

/// Classifier outputs for each input, in order.
pub fn predict(model: &LayerGroupedModel, inputs: &[Vec<usize>], opts: &TrainOptions) -> Result<Vec<Vec<f64>>, TrainError> {
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(opts.batch_size.max(1)) {
        let batch: Vec<Vec<usize>> = chunk.iter().map(|s| truncate(s, opts.max_seq_len)).collect();
        let state = model.clf_forward(&batch)?;
        out.extend(state.class_outputs().expect("classifier outputs").iter().cloned());
    }
    Ok(out)
}

fn truncate(ids: &[usize], max: usize) -> Vec<usize> {
    ids[..ids.len().min(max)].to_vec()
}

/// Called after every optimizer step with the new record and model.
pub type Observer<'o> = &'o mut dyn FnMut(&LogRecord, &LayerGroupedModel);

struct Run<'a, 'o> {
    inputs: &'a [Vec<usize>],
    targets: &'a Targets,
    valid: Option<(&'a [Vec<usize>], &'a Targets)>,
    observer: Option<Observer<'o>>,
}

fn run(
    mut model: LayerGroupedModel,
    mut data: Run<'_, '_>,
    schedule: &StageSchedule,
    policy: &LRPolicy,
    opts: &TrainOptions,
    seed: u64,
) -> Result<(LayerGroupedModel, TrainLog), TrainError> {
    policy.validate()?;
    opts.validate()?;
    let g = model.num_groups();
    if schedule.num_groups != g {
        return Err(TrainError::InvalidConfig(format!("schedule has {} groups, model has {g}", schedule.num_groups)));
    }
    if data.inputs.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let mut optimizer = GroupOptimizer::new(g, opts.adam);
    let mut batches = BatchStream::new(data.inputs.len(), opts.batch_size, seed);
    let mut log = TrainLog::default();
    for t in 0..policy.total_batches {
        let freeze = schedule.freeze_state(t);
        let val_loss = match data.valid {
            Some((vi, vt)) if t % schedule.stage_length_batches == 0 => Some(dataset_loss(&model, vi, vt, opts.batch_size)?),
            _ => None,
        };
        let idx = batches.next_batch();
        let inputs: Vec<Vec<usize>> = idx.iter().map(|&i| data.inputs[i].clone()).collect();
        let targets = select_targets(data.targets, &idx);
        let state = forward(&model, &inputs)?;
        let train_loss = model.loss(&state, &targets)?;
        let grads = model.backward(&state, &targets, &freeze)?;
        drop(state);
        let lrs = (0..g).map(|k| policy.group_lr(t, k, g)).collect::<Result<Vec<_>, _>>()?;
        optimizer.step(&mut model, grads, &lrs);
        let record = LogRecord { batch: t, stage: schedule.stage(t), unfrozen_groups: freeze.unfrozen_count(), train_loss, val_loss };
        if let Some(obs) = data.observer.as_mut() {
            obs(&record, &model);
        }
        log.push(record);
    }
    Ok((model, log))
}

/// Next-token training on windows of the concatenated documents.
pub fn train_lm(
    model: LayerGroupedModel,
    train: &[Vec<usize>],
    valid: Option<&[Vec<usize>]>,
    schedule: &StageSchedule,
    policy: &LRPolicy,
    opts: &TrainOptions,
    seed: u64,
) -> Result<(LayerGroupedModel, TrainLog), TrainError> {
    train_lm_observed(model, train, valid, schedule, policy, opts, seed, None)
}

#[allow(clippy::too_many_arguments)]
pub fn train_lm_observed(
    model: LayerGroupedModel,
    train: &[Vec<usize>],
    valid: Option<&[Vec<usize>]>,
    schedule: &StageSchedule,
    policy: &LRPolicy,
    opts: &TrainOptions,
    seed: u64,
    observer: Option<Observer<'_>>,
) -> Result<(LayerGroupedModel, TrainLog), TrainError> {
    if model.kind != ModelKind::LanguageModel {
        return Err(ModelError::WrongKind { expected: "language" }.into());
    }
    opts.validate()?;
    let (inputs, targets): (Vec<_>, Vec<_>) = lm_windows(train, opts.bptt).into_iter().unzip();
    let targets = Targets::NextToken(targets);
    let valid = match valid {
        Some(docs) => {
            let (vi, vt): (Vec<_>, Vec<_>) = lm_windows(docs, opts.bptt).into_iter().unzip();
            (!vi.is_empty()).then_some((vi, Targets::NextToken(vt)))
        }
        None => None,
    };
    run(
        model,
        Run { inputs: &inputs, targets: &targets, valid: valid.as_ref().map(|(i, t)| (i.as_slice(), t)), observer },
        schedule,
        policy,
        opts,
        seed,
    )
}

fn check_classifier_data(model: &LayerGroupedModel, data: &ClassifierData) -> Result<(), TrainError> {
    let cfg = &model.config;
    if targets_len(&data.targets) != data.inputs.len() {
        return Err(TrainError::ClassCountMismatch("one target per input required".into()));
    }
    match &data.targets {
        Targets::Class(c) if !cfg.multilabel => {
            if let Some(bad) = c.iter().find(|&&k| k >= cfg.num_classes) {
                return Err(TrainError::ClassCountMismatch(format!("class {bad} with {} outputs", cfg.num_classes)));
            }
        }
        Targets::MultiHot(h) if cfg.multilabel => {
            if let Some(row) = h.iter().find(|r| r.len() != cfg.num_classes) {
                return Err(TrainError::ClassCountMismatch(format!("{} labels with {} outputs", row.len(), cfg.num_classes)));
            }
        }
        _ => return Err(TrainError::ClassCountMismatch("target kind does not fit the classifier head".into())),
    }
    Ok(())
}

/// Classification fine-tuning; validation loss is logged at stage boundaries.
pub fn train_classifier(
    model: LayerGroupedModel,
    train: &ClassifierData,
    valid: Option<&ClassifierData>,
    schedule: &StageSchedule,
    policy: &LRPolicy,
    opts: &TrainOptions,
    seed: u64,
) -> Result<(LayerGroupedModel, TrainLog), TrainError> {
    train_classifier_observed(model, train, valid, schedule, policy, opts, seed, None)
}

#[allow(clippy::too_many_arguments)]
pub fn train_classifier_observed(
    model: LayerGroupedModel,
    train: &ClassifierData,
    valid: Option<&ClassifierData>,
    schedule: &StageSchedule,
    policy: &LRPolicy,
    opts: &TrainOptions,
    seed: u64,
    observer: Option<Observer<'_>>,
) -> Result<(LayerGroupedModel, TrainLog), TrainError> {
    if model.kind != ModelKind::Classifier {
        return Err(ModelError::WrongKind { expected: "classifier" }.into());
    }
    opts.validate()?;
    check_classifier_data(&model, train)?;
    let inputs: Vec<Vec<usize>> = train.inputs.iter().map(|s| truncate(s, opts.max_seq_len)).collect();
    let valid = match valid {
        Some(v) if !v.is_empty() => {
            check_classifier_data(&model, v)?;
            Some((v.inputs.iter().map(|s| truncate(s, opts.max_seq_len)).collect::<Vec<_>>(), &v.targets))
        }
        _ => None,
    };
    run(
        model,
        Run { inputs: &inputs, targets: &train.targets, valid: valid.as_ref().map(|(i, t)| (i.as_slice(), *t)), observer },
        schedule,
        policy,
        opts,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_cover_stream() {
        let w = lm_windows(&[vec![1, 2, 3], vec![4, 5]], 2);
        assert_eq!(w, vec![(vec![1, 2], vec![2, 3]), (vec![3, 4], vec![4, 5])]);
        let w = lm_windows(&[vec![1, 2, 3, 4]], 2);
        assert_eq!(w, vec![(vec![1, 2], vec![2, 3]), (vec![3], vec![4])]);
        assert!(lm_windows(&[vec![7]], 4).is_empty());
    }

    #[test]
    fn batch_stream_visits_everything_each_epoch() {
        let mut s = BatchStream::new(5, 2, 1);
        let mut seen: Vec<usize> = (0..3).flat_map(|_| s.next_batch()).collect();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
    }
}
