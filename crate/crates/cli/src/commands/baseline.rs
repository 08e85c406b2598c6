use ladiff_core::baselines::{
    train_forest_classifier, train_logreg, BaselineClassifier, BaselineModel, ForestConfig, Labels, LogRegConfig,
    TfidfModel, DEFAULT_EPOCHS, DEFAULT_L2_LAMBDA, DEFAULT_LR, DEFAULT_MIN_SAMPLES_SPLIT, DEFAULT_N_ESTIMATORS,
    DEFAULT_RANDOM_STATE,
};
use ladiff_core::corpus::{DatasetSplit, LabelScheme, NUM_HOSTILE};
use ladiff_core::metrics::format_report;

use crate::data::{self, ATTACH_SCHEME};
use crate::error::{at, CliError};
use crate::params::Schema;

use super::evaluate::{baseline_report, table_kind};
use super::Invocation;

pub fn train_baseline_schema() -> Schema {
    let mut s: Schema = vec![
        ("input", String::new()),
        ("output", String::new()),
        ("scheme", "binary".into()),
        ("model", "forest".into()),
        ("n_estimators", DEFAULT_N_ESTIMATORS.to_string()),
        ("min_samples_split", DEFAULT_MIN_SAMPLES_SPLIT.to_string()),
        ("random_state", DEFAULT_RANDOM_STATE.to_string()),
        ("max_features", "sqrt".into()),
        ("bootstrap", "true".into()),
        ("l2_lambda", DEFAULT_L2_LAMBDA.to_string()),
        ("epochs", DEFAULT_EPOCHS.to_string()),
        ("lr", DEFAULT_LR.to_string()),
        ("seed", "0".into()),
    ];
    s.extend(data::format_schema());
    s.extend(data::preprocess_schema());
    s
}

/// Baseline targets: class indices, or the four hostile flags per row.
pub fn labels(split: &DatasetSplit, scheme: &LabelScheme) -> Labels {
    if scheme.is_multilabel() {
        Labels::Multi {
            rows: split.examples.iter().map(|e| scheme.hostile_flags(&e.labels).to_vec()).collect(),
            n_labels: NUM_HOSTILE,
        }
    } else {
        Labels::Single {
            classes: split.examples.iter().map(|e| scheme.class_index(&e.labels[0]).expect("validated label")).collect(),
            n_classes: scheme.classes.len(),
        }
    }
}

pub fn run_train_baseline(inv: Invocation) -> Result<(), CliError> {
    let mut params = inv.resolve(train_baseline_schema())?;
    let mut t = params.typed();
    let input = t.path("input");
    let output = t.path("output");
    let scheme = data::scheme(&mut t, "scheme");
    let kind = t.choice("model", &["forest", "logreg"]);
    let max_features = match params.get("max_features") {
        "sqrt" => None,
        _ => Some(t.usize_min("max_features", 1)),
    };
    let forest = ForestConfig {
        n_estimators: t.usize_min("n_estimators", 1),
        min_samples_split: t.usize_min("min_samples_split", 2),
        random_state: t.u64("random_state"),
        max_features,
        bootstrap: t.bool("bootstrap"),
    };
    let logreg = LogRegConfig { l2_lambda: t.f64("l2_lambda"), epochs: t.usize("epochs"), lr: t.f64("lr"), seed: t.u64("seed") };
    if logreg.l2_lambda < 0.0 {
        t.error("`l2_lambda`: must be >= 0");
    }
    if logreg.lr <= 0.0 {
        t.error("`lr`: must be > 0");
    }
    let format = data::input_format(&mut t, &params);
    t.finish()?;
    let cfg = data::preprocess_config(&mut params)?;
    params.write_sidecar(inv.sidecar(), "train-baseline")?;

    let split = data::read_labeled(&input, &format, &scheme)?;
    if split.is_empty() {
        return Err(at(&input, "no rows"));
    }
    let docs: Vec<Vec<String>> = split.examples.iter().map(|e| data::words(&e.text, &cfg)).collect();
    let tfidf = TfidfModel::fit(&docs)?;
    let x = tfidf.transform_all(&docs);
    let targets = labels(&split, &scheme);
    let classifier = match kind {
        "logreg" => BaselineClassifier::LogReg(train_logreg(&x, &targets, &logreg)?.0),
        _ => train_forest_classifier(&x, &targets, &forest)?,
    };
    let mut attachments: Vec<(String, String)> =
        data::preprocess_attachments(&cfg).into_iter().map(|(n, t)| (n.to_string(), t)).collect();
    attachments.push((ATTACH_SCHEME.to_string(), data::scheme_name(&scheme).to_string()));
    let model = BaselineModel { tfidf, classifier, attachments };
    model.save(&output).map_err(|e| at(&output, e))?;

    let report = baseline_report(&model, &split, &scheme, &cfg)?;
    print!("{}", format_report(&report, table_kind(&scheme), false).map_err(CliError::data)?);
    Ok(())
}
