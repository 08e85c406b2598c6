//! Rule-based rewriting of raw social-media posts into normalized text
//! annotated with special tokens.
//!
//! The pipeline runs, in order: HTML entity decoding, emoji replacement,
//! hashtag spacing, character-run and word-run rewriting, the two case
//! marking stages (English only), and final normalization.

mod config;
mod emoji;
mod stages;
mod text;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use config::{PreprocessConfig, CONFIG_KEYS};
pub use emoji::EmojiMap;
pub use stages::{
    decode_html, mark_allcaps, mark_capitalized, normalize, normalize_with, replace_char_reps, replace_emojis,
    replace_word_reps, space_hashtags,
};


#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("invalid preprocess config: {0}")]
    InvalidConfig(String),
    #[error("emoji map line {line}: {message}")]
    EmojiMap { line: usize, message: String },
    #[error("emoji map entry: {0}")]
    EmojiEntry(String),
    #[error("unknown language `{0}` (expected en or hi)")]
    UnknownLanguage(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Language {
    En,
    Hi,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Language::En => "en",
            Language::Hi => "hi",
        })
    }
}

impl FromStr for Language {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Language::En),
            "hi" => Ok(Language::Hi),
            other => Err(PreprocessError::UnknownLanguage(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    DecodeHtml,
    ReplaceEmojis,
    SpaceHashtags,
    ReplaceCharReps,
    ReplaceWordReps,
    MarkAllcaps,
    MarkCapitalized,
    Normalize,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::DecodeHtml => "decode_html",
            Stage::ReplaceEmojis => "replace_emojis",
            Stage::SpaceHashtags => "space_hashtags",
            Stage::ReplaceCharReps => "replace_char_reps",
            Stage::ReplaceWordReps => "replace_word_reps",
            Stage::MarkAllcaps => "mark_allcaps",
            Stage::MarkCapitalized => "mark_capitalized",
            Stage::Normalize => "normalize",
        }
    }

    pub fn apply(self, text: &str, cfg: &PreprocessConfig) -> String {
        match self {
            Stage::DecodeHtml => decode_html(text),
            Stage::ReplaceEmojis => replace_emojis(text, &cfg.emoji_map),
            Stage::SpaceHashtags => space_hashtags(text),
            Stage::ReplaceCharReps => replace_char_reps(text, cfg),
            Stage::ReplaceWordReps => replace_word_reps(text, cfg),
            Stage::MarkAllcaps => mark_allcaps(text, cfg),
            Stage::MarkCapitalized => mark_capitalized(text, cfg),
            Stage::Normalize => normalize_with(text, &cfg.tokens()),
        }
    }
}

/// Stages in execution order for a config.
pub fn pipeline_stages(cfg: &PreprocessConfig) -> Vec<Stage> {
    let mut stages = vec![
        Stage::DecodeHtml,
        Stage::ReplaceEmojis,
        Stage::SpaceHashtags,
        Stage::ReplaceCharReps,
        Stage::ReplaceWordReps,
    ];
    if cfg.case_stages_active() {
        stages.push(Stage::MarkAllcaps);
        stages.push(Stage::MarkCapitalized);
    }
    stages.push(Stage::Normalize);
    stages
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteTrace {
    pub input: String,
    pub output: String,
    pub stage_outputs: Vec<(&'static str, String)>,
}

/// Runs the full pipeline. `cfg` is assumed valid (see
/// [`PreprocessConfig::validate`]).
pub fn preprocess(text: &str, cfg: &PreprocessConfig) -> String {
    pipeline_stages(cfg)
        .into_iter()
        .fold(text.to_string(), |acc, stage| stage.apply(&acc, cfg))
}

/// [`preprocess`] that also records the text after every stage.
pub fn preprocess_traced(text: &str, cfg: &PreprocessConfig) -> RewriteTrace {
    let mut current = text.to_string();
    let mut stage_outputs = Vec::new();
    for stage in pipeline_stages(cfg) {
        current = stage.apply(&current, cfg);
        stage_outputs.push((stage.name(), current.clone()));
    }
    RewriteTrace { input: text.to_string(), output: current, stage_outputs }
}
