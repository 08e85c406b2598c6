use std::path::Path;

use ladiff_core::container::Reader;
use ladiff_core::corpus::{DatasetSplit, LabelScheme, NUM_HOSTILE};
use ladiff_core::model::{init_classifier_from_lm, init_model, Checkpoint, ModelConfig, ModelKind, Targets};
use ladiff_core::preprocess::PreprocessConfig;
use ladiff_core::tokenizer::Vocab;
use ladiff_core::trainer::{
    train_classifier, train_lm, AdamConfig, ClassifierData, LRPolicy, StageSchedule, TrainLog, TrainOptions,
    DEFAULT_BATCH_SIZE, DEFAULT_BPTT, DEFAULT_MAX_SEQ_LEN, DEFAULT_STAGE_LENGTH,
};

use crate::data::{self, ATTACH_MAX_SEQ_LEN, ATTACH_SCHEME, ATTACH_TRAIN_LOG, ATTACH_VOCAB};
use crate::error::{at, CliError};
use crate::params::{Params, Schema, Typed};

use super::Invocation;

pub const DEFAULT_TOTAL_BATCHES: usize = 400;

fn training_schema() -> Schema {
    let policy = LRPolicy::new(DEFAULT_TOTAL_BATCHES);
    let adam = AdamConfig::default();
    vec![
        ("seed", "0".into()),
        ("batch_size", DEFAULT_BATCH_SIZE.to_string()),
        ("stage_length", DEFAULT_STAGE_LENGTH.to_string()),
        ("total_batches", DEFAULT_TOTAL_BATCHES.to_string()),
        ("base_lr", policy.base_lr.to_string()),
        ("discriminative_factor", policy.discriminative_factor.to_string()),
        ("cut_frac", policy.cut_frac.to_string()),
        ("ratio", policy.ratio.to_string()),
        ("beta1", adam.beta1.to_string()),
        ("beta2", adam.beta2.to_string()),
        ("eps", adam.eps.to_string()),
    ]
}

struct Training {
    seed: u64,
    stage_length: usize,
    policy: LRPolicy,
    opts: TrainOptions,
}

fn training(t: &mut Typed) -> Training {
    let seed = t.u64("seed");
    let batch_size = t.usize_min("batch_size", 1);
    let stage_length = t.usize_min("stage_length", 1);
    let total_batches = t.usize_min("total_batches", 1);
    let policy = LRPolicy {
        base_lr: t.f64("base_lr"),
        discriminative_factor: t.f64("discriminative_factor"),
        cut_frac: t.f64("cut_frac"),
        ratio: t.f64("ratio"),
        total_batches,
    };
    if policy.base_lr <= 0.0 {
        t.error("`base_lr`: must be > 0");
    }
    if policy.discriminative_factor < 1.0 {
        t.error("`discriminative_factor`: must be >= 1");
    }
    if !(policy.cut_frac > 0.0 && policy.cut_frac < 1.0) {
        t.error("`cut_frac`: must lie in (0, 1)");
    }
    if policy.ratio <= 1.0 {
        t.error("`ratio`: must be > 1");
    }
    if policy.cut() == 0 {
        t.error("`cut_frac` * `total_batches`: must be >= 1 batch");
    }
    let adam = AdamConfig { beta1: t.f64("beta1"), beta2: t.f64("beta2"), eps: t.f64("eps") };
    for (key, v) in [("beta1", adam.beta1), ("beta2", adam.beta2)] {
        if !(0.0..1.0).contains(&v) {
            t.error(format!("`{key}`: must lie in [0, 1)"));
        }
    }
    if adam.eps <= 0.0 {
        t.error("`eps`: must be > 0");
    }
    let opts = TrainOptions { batch_size, adam, ..TrainOptions::default() };
    Training { seed, stage_length, policy, opts }
}

/// Fills an empty `log` key with `<output>.losses.csv`.
fn log_path(params: &mut Params) -> std::path::PathBuf {
    if params.get("log").is_empty() && !params.get("output").is_empty() {
        let derived = format!("{}.losses.csv", params.get("output"));
        params.fill("log", derived);
    }
    params.get("log").into()
}

fn report_losses(log: &TrainLog) {
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    println!("batches={} final_train_loss={} last_val_loss={}", log.len(), fmt(log.final_train_loss()), fmt(log.last_val_loss()));
}

pub fn train_lm_schema() -> Schema {
    let m = ModelConfig::new(3);
    let mut s: Schema = vec![
        ("input", String::new()),
        ("valid", String::new()),
        ("vocab", String::new()),
        ("output", String::new()),
        ("log", String::new()),
        ("embed_dim", m.embed_dim.to_string()),
        ("hidden_dim", m.hidden_dim.to_string()),
        ("num_layers", m.num_recurrent_layers.to_string()),
        ("bptt", DEFAULT_BPTT.to_string()),
    ];
    s.extend(training_schema());
    s.extend(data::format_schema());
    s.extend(data::preprocess_schema());
    s
}

pub fn run_train_lm(inv: Invocation) -> Result<(), CliError> {
    let mut params = inv.resolve(train_lm_schema())?;
    let log_file = log_path(&mut params);
    let mut t = params.typed();
    let input = t.path("input");
    let valid = t.optional_path("valid");
    let vocab_path = t.path("vocab");
    let output = t.path("output");
    let embed_dim = t.usize_min("embed_dim", 1);
    let hidden_dim = t.usize_min("hidden_dim", 1);
    let num_layers = t.usize_min("num_layers", 1);
    let bptt = t.usize_min("bptt", 1);
    let mut run = training(&mut t);
    run.opts.bptt = bptt;
    let format = data::input_format(&mut t, &params);
    t.finish()?;
    let cfg = data::preprocess_config(&mut params)?;
    params.write_sidecar(inv.sidecar(), "train-lm")?;

    let vocab = Vocab::load(&vocab_path).map_err(|e| at(&vocab_path, e))?;
    let encode_file = |path: &Path| -> Result<Vec<Vec<usize>>, CliError> {
        Ok(data::read_texts(path, &format)?.iter().map(|text| data::encode(text, &cfg, &vocab)).collect())
    };
    let train_docs = encode_file(&input)?;
    let valid_docs = valid.as_deref().map(encode_file).transpose()?;
    let model_cfg = ModelConfig {
        embed_dim,
        hidden_dim,
        num_recurrent_layers: num_layers,
        seed: run.seed,
        ..ModelConfig::new(vocab.len())
    };
    let model = init_model(&model_cfg, ModelKind::LanguageModel)?;
    let schedule = StageSchedule::new(model.num_groups(), run.stage_length)?;
    let (model, log) =
        train_lm(model, &train_docs, valid_docs.as_deref(), &schedule, &run.policy, &run.opts, run.seed)?;

    let mut ckpt = Checkpoint::new(model);
    ckpt.attach(ATTACH_VOCAB, vocab.to_text());
    for (name, text) in data::preprocess_attachments(&cfg) {
        ckpt.attach(name, text);
    }
    let log_csv = log.to_csv_string();
    ckpt.attach(ATTACH_TRAIN_LOG, log_csv.clone());
    ckpt.save(&output).map_err(|e| at(&output, e))?;
    data::write_file(&log_file, &log_csv)?;
    report_losses(&log);
    Ok(())
}

pub fn train_clf_schema() -> Schema {
    let mut s: Schema = vec![
        ("input", String::new()),
        ("valid", String::new()),
        ("lm", String::new()),
        ("output", String::new()),
        ("log", String::new()),
        ("scheme", "binary".into()),
        ("max_seq_len", DEFAULT_MAX_SEQ_LEN.to_string()),
    ];
    s.extend(training_schema());
    s.extend(data::format_schema());
    s
}

/// Vocabulary and preprocessing config stored in a checkpoint.
pub fn text_pipeline(ckpt: &Checkpoint) -> Result<(Vocab, PreprocessConfig), CliError> {
    let vocab_text = ckpt.attachment(ATTACH_VOCAB).ok_or_else(|| CliError::data("checkpoint has no vocabulary"))?;
    let vocab = Vocab::from_text(vocab_text)?;
    let cfg = data::preprocess_from_attachments(ckpt.attachment(data::ATTACH_PREPROCESS), ckpt.attachment(data::ATTACH_EMOJI))?;
    Ok((vocab, cfg))
}

/// Encoded inputs and targets of a labeled split.
pub fn classifier_data(split: &DatasetSplit, scheme: &LabelScheme, cfg: &PreprocessConfig, vocab: &Vocab) -> ClassifierData {
    let inputs = split.examples.iter().map(|e| data::encode(&e.text, cfg, vocab)).collect();
    let targets = if scheme.is_multilabel() {
        Targets::MultiHot(
            split
                .examples
                .iter()
                .map(|e| scheme.hostile_flags(&e.labels).iter().map(|&f| if f { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    } else {
        Targets::Class(
            split
                .examples
                .iter()
                .map(|e| scheme.class_index(&e.labels[0]).expect("validated label"))
                .collect(),
        )
    };
    ClassifierData { inputs, targets }
}

pub fn run_train_clf(inv: Invocation) -> Result<(), CliError> {
    let mut params = inv.resolve(train_clf_schema())?;
    if params.get("lm").is_empty() {
        return Err(CliError::Usage("classifier requires LM init (set `lm` or pass --lm)".into()));
    }
    let log_file = log_path(&mut params);
    let mut t = params.typed();
    let input = t.path("input");
    let valid = t.optional_path("valid");
    let lm_path = t.path("lm");
    let output = t.path("output");
    let scheme = data::scheme(&mut t, "scheme");
    let max_seq_len = t.usize_min("max_seq_len", 1);
    let mut run = training(&mut t);
    run.opts.max_seq_len = max_seq_len;
    let format = data::input_format(&mut t, &params);
    t.finish()?;
    params.write_sidecar(inv.sidecar(), "train-clf")?;

    let lm = load_checkpoint(&lm_path)?;
    if lm.model.kind != ModelKind::LanguageModel {
        return Err(at(&lm_path, "classifier requires LM init, but this is a classifier checkpoint"));
    }
    let (vocab, cfg) = text_pipeline(&lm)?;
    let train = classifier_data(&data::read_labeled(&input, &format, &scheme)?, &scheme, &cfg, &vocab);
    let valid = match valid {
        Some(p) => Some(classifier_data(&data::read_labeled(&p, &format, &scheme)?, &scheme, &cfg, &vocab)),
        None => None,
    };
    let num_classes = if scheme.is_multilabel() { NUM_HOSTILE } else { scheme.classes.len() };
    let model = init_classifier_from_lm(&lm.model, num_classes, scheme.is_multilabel(), run.seed)?;
    let schedule = StageSchedule::new(model.num_groups(), run.stage_length)?;
    let (model, log) = train_classifier(model, &train, valid.as_ref(), &schedule, &run.policy, &run.opts, run.seed)?;

    let mut ckpt = Checkpoint::new(model);
    for (name, text) in &lm.attachments {
        if name != ATTACH_TRAIN_LOG {
            ckpt.attach(name, text.clone());
        }
    }
    ckpt.attach(ATTACH_SCHEME, data::scheme_name(&scheme));
    ckpt.attach(ATTACH_MAX_SEQ_LEN, max_seq_len.to_string());
    let log_csv = log.to_csv_string();
    ckpt.attach(ATTACH_TRAIN_LOG, log_csv.clone());
    ckpt.save(&output).map_err(|e| at(&output, e))?;
    data::write_file(&log_file, &log_csv)?;
    report_losses(&log);
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CliError> {
    Checkpoint::load(path).map_err(|e| at(path, e))
}

pub fn export_losses_schema() -> Schema {
    vec![("checkpoint", String::new()), ("output", String::new())]
}

pub fn run_export_losses(inv: Invocation) -> Result<(), CliError> {
    let params = inv.resolve(export_losses_schema())?;
    let mut t = params.typed();
    let ckpt_path = t.path("checkpoint");
    let output = t.path("output");
    t.finish()?;
    params.write_sidecar(inv.sidecar(), "export-losses")?;

    let file = std::fs::File::open(&ckpt_path).map_err(|e| at(&ckpt_path, e))?;
    let kind = Reader::new(std::io::BufReader::new(file)).map_err(|e| at(&ckpt_path, e))?.kind().to_string();
    if kind == ladiff_core::baselines::MODEL_KIND {
        return Err(at(&ckpt_path, "baseline models have no training-loss log"));
    }
    let ckpt = load_checkpoint(&ckpt_path)?;
    let text = ckpt
        .attachment(ATTACH_TRAIN_LOG)
        .ok_or_else(|| at(&ckpt_path, "checkpoint has no training-loss log"))?;
    let log = TrainLog::read_csv(text.as_bytes()).map_err(|e| at(&ckpt_path, e))?;
    let mut out = Vec::new();
    log.write_csv(&mut out).map_err(|e| at(&output, e))?;
    std::fs::write(&output, out).map_err(|e| at(&output, e))?;
    eprintln!("{} log rows -> {}", log.len(), output.display());
    Ok(())
}
