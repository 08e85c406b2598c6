//! Input formats, preprocessing configs and the text attachments that travel
//! inside model files.

use std::path::{Path, PathBuf};

use ladiff_core::corpus::{load_delimited, DatasetSplit, Exclusivity, FormatSpec, LabelScheme, SchemeKind, SplitName};
use ladiff_core::kv;
use ladiff_core::preprocess::{preprocess, EmojiMap, Language, PreprocessConfig, CONFIG_KEYS};
use ladiff_core::tokenizer::{tokenize, Vocab};

use crate::error::{at, CliError};
use crate::params::{Params, Schema, Source, Typed};

pub const ATTACH_VOCAB: &str = "vocab";
pub const ATTACH_PREPROCESS: &str = "preprocess";
pub const ATTACH_EMOJI: &str = "emoji_map";
pub const ATTACH_SCHEME: &str = "scheme";
pub const ATTACH_TRAIN_LOG: &str = "train_log";
pub const ATTACH_MAX_SEQ_LEN: &str = "max_seq_len";

pub const SCHEMES: [&str; 2] = ["binary", "multilabel"];

/// Column layout keys shared by every command that reads a dataset.
pub fn format_schema() -> Schema {
    let d = FormatSpec::default();
    vec![
        ("input_format", "delimited".into()),
        ("delimiter", "comma".into()),
        ("id_column", d.id_column),
        ("text_column", d.text_column),
        ("label_column", d.label_column.unwrap_or_default()),
        ("exclusivity", "strict".into()),
    ]
}

/// `preprocess_config` plus every preprocessing key at its English default.
pub fn preprocess_schema() -> Schema {
    let mut s: Schema = vec![("preprocess_config", String::new())];
    for (k, v) in PreprocessConfig::new(Language::En).to_pairs() {
        let key = CONFIG_KEYS.iter().find(|c| **c == k).expect("canonical key");
        s.push((key, v));
    }
    s
}

#[derive(Debug, Clone)]
pub struct InputFormat {
    pub lines: bool,
    pub spec: FormatSpec,
}

pub fn input_format(t: &mut Typed, params: &Params) -> InputFormat {
    let lines = t.choice("input_format", &["delimited", "lines"]) == "lines";
    let delimiter = match params.get("delimiter") {
        "comma" | "," => b',',
        "tab" | "\\t" => b'\t',
        "semicolon" | ";" => b';',
        "pipe" | "|" => b'|',
        other if other.len() == 1 && other.is_ascii() => other.as_bytes()[0],
        other => {
            t.error(format!("`delimiter`: expected comma, tab, semicolon, pipe or one ASCII character, got {other:?}"));
            b','
        }
    };
    let exclusivity = match t.choice("exclusivity", &["strict", "warn"]) {
        "warn" => Exclusivity::Warn,
        _ => Exclusivity::Strict,
    };
    let label = params.get("label_column");
    InputFormat {
        lines,
        spec: FormatSpec {
            id_column: params.get("id_column").to_string(),
            text_column: params.get("text_column").to_string(),
            label_column: (!label.is_empty()).then(|| label.to_string()),
            delimiter,
            exclusivity,
        },
    }
}

pub fn scheme(t: &mut Typed, key: &str) -> LabelScheme {
    match t.choice(key, &SCHEMES) {
        "multilabel" => LabelScheme::multilabel(),
        _ => LabelScheme::binary(),
    }
}

pub fn scheme_name(scheme: &LabelScheme) -> &'static str {
    match scheme.kind {
        SchemeKind::Binary => "binary",
        SchemeKind::Multilabel => "multilabel",
    }
}

pub fn scheme_from_name(name: &str) -> Result<LabelScheme, CliError> {
    match name {
        "binary" => Ok(LabelScheme::binary()),
        "multilabel" => Ok(LabelScheme::multilabel()),
        other => Err(CliError::data(format!("model file names unknown scheme `{other}`"))),
    }
}

/// Raw texts in file order, ignoring labels.
pub fn read_texts(path: &Path, format: &InputFormat) -> Result<Vec<String>, CliError> {
    if format.lines {
        let text = std::fs::read_to_string(path).map_err(|e| at(path, e))?;
        return Ok(text.lines().map(str::to_string).collect());
    }
    let spec = FormatSpec { label_column: None, ..format.spec.clone() };
    let split = load_delimited(path, &spec, &LabelScheme::binary(), SplitName::Train).map_err(|e| at(path, e))?;
    Ok(split.examples.into_iter().map(|e| e.text).collect())
}

/// Labeled rows under `scheme`; warnings are reported on stderr.
pub fn read_labeled(path: &Path, format: &InputFormat, scheme: &LabelScheme) -> Result<DatasetSplit, CliError> {
    if format.lines {
        return Err(CliError::config("`input_format`: labeled data must be delimited"));
    }
    if format.spec.label_column.is_none() {
        return Err(CliError::config("`label_column`: required for labeled data"));
    }
    let split = load_delimited(path, &format.spec, scheme, SplitName::Train).map_err(|e| at(path, e))?;
    for w in &split.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(split)
}

/// Builds the preprocessing config from the run params. Keys left at their
/// defaults take their value from `preprocess_config` when one is given.
/// The params are then rewritten with the effective values.
pub fn preprocess_config(params: &mut Params) -> Result<PreprocessConfig, CliError> {
    let file_pairs = match params.get("preprocess_config") {
        "" => Vec::new(),
        p => {
            let path = PathBuf::from(p);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::config(format!("`preprocess_config` {p}: {e}")))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            kv::parse(&text)
                .map_err(|e| CliError::config(format!("`preprocess_config` {p}: {e}")))?
                .into_iter()
                .map(|(k, v)| {
                    if k == "emoji_map" && v != "builtin" && Path::new(&v).is_relative() {
                        let joined = base.join(&v).display().to_string();
                        (k, joined)
                    } else {
                        (k, v)
                    }
                })
                .collect::<Vec<_>>()
        }
    };
    if let Some((k, _)) = file_pairs.iter().find(|(k, _)| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(CliError::config(format!("`preprocess_config`: unknown key `{k}`")));
    }
    let pairs: Vec<(String, String)> = CONFIG_KEYS
        .iter()
        .map(|&key| {
            let from_file = file_pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
            let value = match (params.source(key), from_file) {
                (Source::Default, Some(v)) => v,
                _ => params.get(key).to_string(),
            };
            (key.to_string(), value)
        })
        .collect();
    let cfg = PreprocessConfig::from_pairs(&pairs, None)?;
    for (k, v) in cfg.to_pairs() {
        params.fill(&k, v);
    }
    Ok(cfg)
}

/// Attachments that let a model file rebuild its preprocessing config.
pub fn preprocess_attachments(cfg: &PreprocessConfig) -> Vec<(&'static str, String)> {
    let mut out = vec![(ATTACH_PREPROCESS, cfg.to_kv_string())];
    if cfg.emoji_map_path.is_some() {
        out.push((ATTACH_EMOJI, cfg.emoji_map.to_tsv()));
    }
    out
}

pub fn preprocess_from_attachments(
    preprocess_kv: Option<&str>,
    emoji_tsv: Option<&str>,
) -> Result<PreprocessConfig, CliError> {
    let text = preprocess_kv.ok_or_else(|| CliError::data("model file has no preprocessing config"))?;
    let pairs = kv::parse(text).map_err(|e| CliError::data(format!("stored preprocessing config: {e}")))?;
    let emoji_value = pairs.iter().find(|(k, _)| k == "emoji_map").map(|(_, v)| v.clone());
    let rest: Vec<(String, String)> = pairs.into_iter().filter(|(k, _)| k != "emoji_map").collect();
    let mut cfg = PreprocessConfig::from_pairs(&rest, None).map_err(CliError::data)?;
    if let Some(tsv) = emoji_tsv {
        cfg.emoji_map = EmojiMap::parse(cfg.language, tsv).map_err(CliError::data)?;
        cfg.emoji_map_path = emoji_value.map(PathBuf::from);
    }
    Ok(cfg)
}

/// Preprocess, tokenize (with the leading bos) and numericalize.
pub fn encode(text: &str, cfg: &PreprocessConfig, vocab: &Vocab) -> Vec<usize> {
    vocab.ids(&tokenize(&preprocess(text, cfg)))
}

/// Preprocessed whitespace tokens, as used by the TF-IDF baselines.
pub fn words(text: &str, cfg: &PreprocessConfig) -> Vec<String> {
    preprocess(text, cfg).split_whitespace().map(str::to_string).collect()
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| at(path, e))
}
