use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use ladiff_core::baselines::{BaselineModel, Predictions, MODEL_KIND};
use ladiff_core::container::Reader;
use ladiff_core::corpus::{DatasetSplit, LabelScheme, NUM_HOSTILE};
use ladiff_core::metrics::{binary_report, format_kv, format_report, multilabel_report, HostileFlags, MetricsReport, TableKind};
use ladiff_core::model::{argmax, ModelKind};
use ladiff_core::preprocess::PreprocessConfig;
use ladiff_core::trainer::{predict, TrainOptions};

use crate::data::{self, ATTACH_MAX_SEQ_LEN, ATTACH_SCHEME};
use crate::error::{at, CliError};
use crate::params::Schema;

use super::neural::{classifier_data, load_checkpoint, text_pipeline};
use super::Invocation;

pub fn evaluate_schema() -> Schema {
    let mut s: Schema = vec![
        ("model", String::new()),
        ("input", String::new()),
        ("output", String::new()),
        ("scheme", String::new()),
        ("percent", "false".into()),
        ("report_format", "table".into()),
    ];
    s.extend(data::format_schema());
    s
}

pub fn table_kind(scheme: &LabelScheme) -> TableKind {
    if scheme.is_multilabel() {
        TableKind::Multilabel
    } else {
        TableKind::Binary
    }
}

fn gold_classes(split: &DatasetSplit, scheme: &LabelScheme) -> Vec<usize> {
    split.examples.iter().map(|e| scheme.class_index(&e.labels[0]).expect("validated label")).collect()
}

fn gold_flags(split: &DatasetSplit, scheme: &LabelScheme) -> Vec<HostileFlags> {
    split.examples.iter().map(|e| scheme.hostile_flags(&e.labels)).collect()
}

fn report_for(split: &DatasetSplit, scheme: &LabelScheme, pred: Predictions) -> Result<MetricsReport, CliError> {
    let report = match pred {
        Predictions::Single(p) if !scheme.is_multilabel() => {
            MetricsReport::Binary(binary_report(&gold_classes(split, scheme), &p).map_err(CliError::data)?)
        }
        Predictions::Multi(rows) if scheme.is_multilabel() => {
            let pred: Vec<HostileFlags> = rows
                .iter()
                .map(|r| {
                    let mut flags = [false; NUM_HOSTILE];
                    for (f, &v) in flags.iter_mut().zip(r) {
                        *f = v;
                    }
                    flags
                })
                .collect();
            MetricsReport::Multilabel(multilabel_report(&gold_flags(split, scheme), &pred).map_err(CliError::data)?)
        }
        _ => return Err(CliError::config("scheme/model mismatch: predictions do not fit the scheme")),
    };
    Ok(report)
}

pub fn baseline_report(
    model: &BaselineModel,
    split: &DatasetSplit,
    scheme: &LabelScheme,
    cfg: &PreprocessConfig,
) -> Result<MetricsReport, CliError> {
    let docs: Vec<Vec<String>> = split.examples.iter().map(|e| data::words(&e.text, cfg)).collect();
    report_for(split, scheme, model.predict(&docs))
}

/// Scheme stored in the model, checked against an explicit request.
fn model_scheme(stored: Option<&str>, requested: &str) -> Result<LabelScheme, CliError> {
    let stored = stored.ok_or_else(|| CliError::data("model file records no label scheme"))?;
    if !requested.is_empty() && requested != stored {
        return Err(CliError::config(format!(
            "scheme/model mismatch: model was trained for `{stored}`, `scheme` is `{requested}`"
        )));
    }
    data::scheme_from_name(stored)
}

fn container_kind(path: &Path) -> Result<String, CliError> {
    let file = File::open(path).map_err(|e| at(path, e))?;
    let reader = Reader::new(BufReader::new(file)).map_err(|e| at(path, e))?;
    Ok(reader.kind().to_string())
}

pub fn run_evaluate(inv: Invocation) -> Result<(), CliError> {
    let params = inv.resolve(evaluate_schema())?;
    let mut t = params.typed();
    let model_path = t.path("model");
    let input = t.path("input");
    let output = t.optional_path("output");
    let requested = params.get("scheme").to_string();
    if !requested.is_empty() {
        data::scheme(&mut t, "scheme");
    }
    let percent = t.bool("percent");
    let as_kv = t.choice("report_format", &["table", "kv"]) == "kv";
    let format = data::input_format(&mut t, &params);
    t.finish()?;
    params.write_sidecar(inv.sidecar(), "evaluate")?;

    let report = if container_kind(&model_path)? == MODEL_KIND {
        let model = BaselineModel::load(&model_path).map_err(|e| at(&model_path, e))?;
        let scheme = model_scheme(model.attachment(ATTACH_SCHEME), &requested)?;
        if model.classifier.is_multilabel() != scheme.is_multilabel() {
            return Err(at(&model_path, "scheme/model mismatch: classifier head does not fit the stored scheme"));
        }
        let cfg = data::preprocess_from_attachments(model.attachment(data::ATTACH_PREPROCESS), model.attachment(data::ATTACH_EMOJI))?;
        let split = data::read_labeled(&input, &format, &scheme)?;
        baseline_report(&model, &split, &scheme, &cfg)?
    } else {
        let ckpt = load_checkpoint(&model_path)?;
        if ckpt.model.kind != ModelKind::Classifier {
            return Err(CliError::config(format!(
                "scheme/model mismatch: {} is a language model checkpoint, not a classifier",
                model_path.display()
            )));
        }
        let scheme = model_scheme(ckpt.attachment(ATTACH_SCHEME), &requested)?;
        if ckpt.model.config.multilabel != scheme.is_multilabel() {
            return Err(at(&model_path, "scheme/model mismatch: classifier head does not fit the stored scheme"));
        }
        let (vocab, cfg) = text_pipeline(&ckpt)?;
        let max_seq_len = match ckpt.attachment(ATTACH_MAX_SEQ_LEN) {
            Some(v) => v.parse().map_err(|_| at(&model_path, format!("bad stored max_seq_len {v:?}")))?,
            None => TrainOptions::default().max_seq_len,
        };
        let split = data::read_labeled(&input, &format, &scheme)?;
        let encoded = classifier_data(&split, &scheme, &cfg, &vocab);
        let opts = TrainOptions { max_seq_len, ..TrainOptions::default() };
        let outputs = predict(&ckpt.model, &encoded.inputs, &opts)?;
        let pred = if scheme.is_multilabel() {
            Predictions::Multi(outputs.iter().map(|o| o.iter().map(|&p| p >= 0.5).collect()).collect())
        } else {
            Predictions::Single(outputs.iter().map(|o| argmax(o)).collect())
        };
        report_for(&split, &scheme, pred)?
    };
    let text = if as_kv {
        format_kv(&report)
    } else {
        format_report(&report, report.kind(), percent).map_err(CliError::data)?
    };
    print!("{text}");
    if let Some(path) = output {
        data::write_file(&path, &text)?;
    }
    Ok(())
}
