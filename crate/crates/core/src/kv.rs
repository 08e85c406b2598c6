//! Flat `key = value` text files used for preprocessing and run configs.
//!
//! Blank lines and lines whose first non-blank character is `#` are ignored.
//! Keys are trimmed; values are trimmed of surrounding whitespace.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: empty key")]
    EmptyKey { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
}

/// Parses a key/value document, preserving first-appearance order.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, KvError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(KvError::Malformed { line })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(KvError::EmptyKey { line });
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(KvError::Duplicate { line, key: key.to_string() });
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Same as [`parse`] but collected into a sorted map.
pub fn parse_map(text: &str) -> Result<BTreeMap<String, String>, KvError> {
    Ok(parse(text)?.into_iter().collect())
}

/// Accepts `true/false`, `1/0`, `yes/no`.
pub fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// Renders pairs as `key = value` lines in the given order.
pub fn render<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        s.push_str(k.as_ref());
        s.push_str(" = ");
        s.push_str(v.as_ref());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let pairs = parse("# header\n\nlanguage = en\n  min_char_run=4  \n").unwrap();
        assert_eq!(
            pairs,
            vec![
                ("language".to_string(), "en".to_string()),
                ("min_char_run".to_string(), "4".to_string())
            ]
        );
    }

    #[test]
    fn value_may_contain_equals() {
        let pairs = parse("set = a=b\n").unwrap();
        assert_eq!(pairs[0].1, "a=b");
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert_eq!(
            parse("a = 1\na = 2\n"),
            Err(KvError::Duplicate { line: 2, key: "a".into() })
        );
        assert_eq!(parse("just words\n"), Err(KvError::Malformed { line: 1 }));
        assert_eq!(parse(" = 3\n"), Err(KvError::EmptyKey { line: 1 }));
    }

    #[test]
    fn render_round_trips() {
        let pairs = vec![("x", "1"), ("y", "two words")];
        let text = render(&pairs);
        let back = parse(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1], ("y".to_string(), "two words".to_string()));
    }
}
