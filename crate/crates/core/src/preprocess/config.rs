use std::path::{Path, PathBuf};

use super::{EmojiMap, Language, PreprocessError};
use crate::kv;

/// Parameters of the rewrite pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub language: Language,
    pub rep_token: String,
    pub wrep_token: String,
    pub up_token: String,
    pub maj_token: String,
    /// Character runs at least this long are rewritten.
    pub min_char_run: usize,
    /// Word runs at least this long are rewritten.
    pub min_word_run: usize,
    pub enable_case_tokens: bool,
    pub emoji_map: EmojiMap,
    /// Where the emoji map came from; `None` means the builtin map.
    pub emoji_map_path: Option<PathBuf>,
}

pub const CONFIG_KEYS: [&str; 9] = [
    "language",
    "rep_token",
    "wrep_token",
    "up_token",
    "maj_token",
    "min_char_run",
    "min_word_run",
    "enable_case_tokens",
    "emoji_map",
];

impl PreprocessConfig {
    pub fn new(language: Language) -> Self {
        PreprocessConfig {
            language,
            rep_token: "tk_rep".into(),
            wrep_token: "tk_wrep".into(),
            up_token: "tk_up".into(),
            maj_token: "tk_maj".into(),
            min_char_run: 4,
            min_word_run: 3,
            enable_case_tokens: language == Language::En,
            emoji_map: EmojiMap::builtin(language),
            emoji_map_path: None,
        }
    }

    /// Same as [`PreprocessConfig::new`] but with an explicit emoji map.
    pub fn with_emoji_map(language: Language, emoji_map: EmojiMap) -> Self {
        PreprocessConfig { emoji_map, ..Self::new(language) }
    }

    pub fn tokens(&self) -> [&str; 4] {
        [&self.rep_token, &self.wrep_token, &self.up_token, &self.maj_token]
    }

    /// Whether the two case-marking stages run.
    pub fn case_stages_active(&self) -> bool {
        self.enable_case_tokens && self.language == Language::En
    }

    pub fn validate(&self) -> Result<(), PreprocessError> {
        let tokens = self.tokens();
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() {
                return Err(PreprocessError::InvalidConfig("special token surface is empty".into()));
            }
            if t.chars().any(char::is_whitespace) {
                return Err(PreprocessError::InvalidConfig(format!("special token {t:?} contains whitespace")));
            }
            if t.chars().any(char::is_uppercase) {
                return Err(PreprocessError::InvalidConfig(format!("special token {t:?} is not lowercase")));
            }
            if tokens[..i].contains(t) {
                return Err(PreprocessError::InvalidConfig(format!("special token {t:?} used twice")));
            }
        }
        if self.min_char_run < 2 {
            return Err(PreprocessError::InvalidConfig("min_char_run must be >= 2".into()));
        }
        if self.min_word_run < 2 {
            return Err(PreprocessError::InvalidConfig("min_word_run must be >= 2".into()));
        }
        if self.language == Language::Hi && self.enable_case_tokens {
            return Err(PreprocessError::InvalidConfig("case tokens cannot be enabled for hi".into()));
        }
        if self.emoji_map.language() != self.language {
            return Err(PreprocessError::InvalidConfig(format!(
                "emoji map language {} does not match pipeline language {}",
                self.emoji_map.language(),
                self.language
            )));
        }
        Ok(())
    }

    /// Parses a flat `key = value` config. Relative emoji map paths resolve
    /// against `base_dir`. Unknown keys are rejected.
    pub fn from_kv_str(text: &str, base_dir: Option<&Path>) -> Result<Self, PreprocessError> {
        let pairs = kv::parse(text).map_err(|e| PreprocessError::InvalidConfig(e.to_string()))?;
        Self::from_pairs(&pairs, base_dir)
    }

    pub fn from_pairs(pairs: &[(String, String)], base_dir: Option<&Path>) -> Result<Self, PreprocessError> {
        let lookup = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !CONFIG_KEYS.contains(&k.as_str())) {
            return Err(PreprocessError::InvalidConfig(format!("unknown key `{k}`")));
        }
        let language: Language = match lookup("language") {
            Some(v) => v.parse()?,
            None => Language::En,
        };
        let mut cfg = PreprocessConfig::new(language);
        let parse_usize = |key: &str, v: &str| {
            v.parse::<usize>()
                .map_err(|_| PreprocessError::InvalidConfig(format!("`{key}`: expected integer, got {v:?}")))
        };
        for (key, value) in pairs {
            match key.as_str() {
                "language" => {}
                "rep_token" => cfg.rep_token = value.clone(),
                "wrep_token" => cfg.wrep_token = value.clone(),
                "up_token" => cfg.up_token = value.clone(),
                "maj_token" => cfg.maj_token = value.clone(),
                "min_char_run" => cfg.min_char_run = parse_usize(key, value)?,
                "min_word_run" => cfg.min_word_run = parse_usize(key, value)?,
                "enable_case_tokens" => {
                    cfg.enable_case_tokens = kv::parse_bool(value).ok_or_else(|| {
                        PreprocessError::InvalidConfig(format!("`enable_case_tokens`: expected bool, got {value:?}"))
                    })?
                }
                "emoji_map" => {
                    if value != "builtin" {
                        let mut path = PathBuf::from(value);
                        if let (true, Some(base)) = (path.is_relative(), base_dir) {
                            path = base.join(path);
                        }
                        cfg.emoji_map = EmojiMap::load(language, &path)?;
                        cfg.emoji_map_path = Some(path);
                    }
                }
                _ => unreachable!(),
            }
        }
        // Devanagari has no letter case.
        if language == Language::Hi {
            cfg.enable_case_tokens = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PreprocessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PreprocessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_kv_str(&text, path.parent())
    }

    /// Every field as `key = value` pairs, in the canonical key order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let emoji = match &self.emoji_map_path {
            Some(p) => p.display().to_string(),
            None => "builtin".to_string(),
        };
        let values = [
            self.language.to_string(),
            self.rep_token.clone(),
            self.wrep_token.clone(),
            self.up_token.clone(),
            self.maj_token.clone(),
            self.min_char_run.to_string(),
            self.min_word_run.to_string(),
            self.enable_case_tokens.to_string(),
            emoji,
        ];
        CONFIG_KEYS.iter().map(|k| k.to_string()).zip(values).collect()
    }

    pub fn to_kv_string(&self) -> String {
        kv::render(&self.to_pairs())
    }
}
