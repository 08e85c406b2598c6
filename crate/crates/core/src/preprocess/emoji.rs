use std::collections::HashMap;
use std::path::Path;

use super::{Language, PreprocessError};

const BUILTIN_EN: &str = include_str!("../../data/emoji_en.tsv");
const BUILTIN_HI: &str = include_str!("../../data/emoji_hi.tsv");

/// Emoji sequence → replacement words for one language.
///
/// Keys are matched longest-first over codepoint sequences, so a skin-tone or
/// ZWJ sequence wins over its single-codepoint prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmojiMap {
    language: Language,
    entries: HashMap<String, String>,
    max_key_chars: usize,
}

impl EmojiMap {
    pub fn new(language: Language) -> Self {
        EmojiMap { language, entries: HashMap::new(), max_key_chars: 0 }
    }

    /// The curated map shipped with the crate.
    pub fn builtin(language: Language) -> Self {
        let src = match language {
            Language::En => BUILTIN_EN,
            Language::Hi => BUILTIN_HI,
        };
        Self::parse(language, src).expect("builtin emoji map is valid")
    }

    /// Parses the TAB-separated map format. Lines starting with `#` are
    /// comments; duplicate keys are rejected.
    pub fn parse(language: Language, text: &str) -> Result<Self, PreprocessError> {
        let mut map = EmojiMap::new(language);
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('\t').ok_or_else(|| PreprocessError::EmojiMap {
                line: line_no,
                message: "expected <emoji>\\t<replacement>".into(),
            })?;
            map.insert(key, value.trim()).map_err(|e| match e {
                PreprocessError::EmojiEntry(message) => PreprocessError::EmojiMap { line: line_no, message },
                other => other,
            })?;
        }
        Ok(map)
    }

    pub fn load(language: Language, path: &Path) -> Result<Self, PreprocessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PreprocessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(language, &text)
    }

    pub fn insert(&mut self, key: &str, replacement: &str) -> Result<(), PreprocessError> {
        if key.is_empty() {
            return Err(PreprocessError::EmojiEntry("empty emoji key".into()));
        }
        if key.chars().any(char::is_whitespace) {
            return Err(PreprocessError::EmojiEntry(format!("emoji key {key:?} contains whitespace")));
        }
        if replacement.trim().is_empty() {
            return Err(PreprocessError::EmojiEntry(format!("empty replacement for {key:?}")));
        }
        if replacement.contains(['#', '{', '}']) {
            return Err(PreprocessError::EmojiEntry(format!(
                "replacement for {key:?} contains a reserved character"
            )));
        }
        if replacement.chars().any(char::is_uppercase) {
            return Err(PreprocessError::EmojiEntry(format!("replacement for {key:?} is not lowercase")));
        }
        if self.entries.contains_key(key) {
            return Err(PreprocessError::EmojiEntry(format!("duplicate emoji key {key:?}")));
        }
        let words = replacement.split_whitespace().collect::<Vec<_>>().join(" ");
        self.max_key_chars = self.max_key_chars.max(key.chars().count());
        self.entries.insert(key.to_string(), words);
        Ok(())
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Longest key starting at `chars[at]`, as (codepoints consumed, replacement).
    pub fn match_at(&self, chars: &[char], at: usize) -> Option<(usize, &str)> {
        let longest = self.max_key_chars.min(chars.len() - at);
        let mut key = String::new();
        for len in (1..=longest).rev() {
            key.clear();
            key.extend(&chars[at..at + len]);
            if let Some(rep) = self.entries.get(&key) {
                return Some((len, rep));
            }
        }
        None
    }

    /// Serializes to the TAB-separated format, keys sorted for stable output.
    pub fn to_tsv(&self) -> String {
        let mut keys: Vec<&String> = self.entries.keys().collect();
        keys.sort();
        let mut out = String::new();
        for k in keys {
            out.push_str(k);
            out.push('\t');
            out.push_str(&self.entries[k]);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_maps_load() {
        let en = EmojiMap::builtin(Language::En);
        assert!(en.len() >= 30);
        assert_eq!(en.get("😢"), Some("crying face"));
        let hi = EmojiMap::builtin(Language::Hi);
        assert!(hi.len() >= 30);
        assert_eq!(hi.language(), Language::Hi);
    }

    #[test]
    fn longest_match_wins() {
        let en = EmojiMap::builtin(Language::En);
        let chars: Vec<char> = "👍🏽".chars().collect();
        assert_eq!(en.match_at(&chars, 0), Some((2, "thumbs up medium skin tone")));
        let chars: Vec<char> = "👍x".chars().collect();
        assert_eq!(en.match_at(&chars, 0), Some((1, "thumbs up")));
    }

    #[test]
    fn parse_rejects_duplicates_and_reserved_chars() {
        let err = EmojiMap::parse(Language::En, "😀\ta\n😀\tb\n").unwrap_err();
        assert!(matches!(err, PreprocessError::EmojiMap { line: 2, .. }), "{err:?}");
        let err = EmojiMap::parse(Language::En, "😀\thash # tag\n").unwrap_err();
        assert!(matches!(err, PreprocessError::EmojiMap { line: 1, .. }));
        let err = EmojiMap::parse(Language::En, "😀 no tab\n").unwrap_err();
        assert!(matches!(err, PreprocessError::EmojiMap { line: 1, .. }));
    }

    #[test]
    fn tsv_round_trip() {
        let en = EmojiMap::builtin(Language::En);
        assert_eq!(EmojiMap::parse(Language::En, &en.to_tsv()).unwrap(), en);
    }
}
