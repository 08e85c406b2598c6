//! Character classes and word/piece segmentation shared by the rewrite stages.

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CharClass {
    Space,
    Word,
    Punct,
    /// Combining marks and joiners; they take the class of what precedes them.
    Attach,
}

pub(crate) fn class_of(c: char) -> CharClass {
    if c.is_whitespace() {
        CharClass::Space
    } else if c == '\u{200C}' || c == '\u{200D}' || c.general_category_group() == GeneralCategoryGroup::Mark {
        CharClass::Attach
    } else if c.is_alphanumeric() || c == '_' {
        CharClass::Word
    } else {
        CharClass::Punct
    }
}

/// Byte spans of whitespace-delimited words.
pub(crate) fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                spans.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Splits one word into pieces at word/punctuation boundaries. A word equal
/// to a protected token is kept whole. Spans are relative to `word`.
pub(crate) fn piece_spans(word: &str, protected: &[&str]) -> Vec<(usize, usize)> {
    if protected.contains(&word) {
        return vec![(0, word.len())];
    }
    let mut spans = Vec::new();
    let mut start = 0;
    let mut current: Option<CharClass> = None;
    for (i, c) in word.char_indices() {
        let class = class_of(c);
        if class == CharClass::Attach {
            continue;
        }
        match current {
            Some(prev) if prev != class => {
                spans.push((start, i));
                start = i;
                current = Some(class);
            }
            Some(_) => {}
            None => current = Some(class),
        }
    }
    if !word.is_empty() {
        spans.push((start, word.len()));
    }
    spans
}

/// Absolute byte spans of every piece of every word in `text`.
pub(crate) fn all_piece_spans(text: &str, protected: &[&str]) -> Vec<(usize, usize)> {
    word_spans(text)
        .into_iter()
        .flat_map(|(ws, we)| {
            piece_spans(&text[ws..we], protected)
                .into_iter()
                .map(move |(ps, pe)| (ws + ps, ws + pe))
        })
        .collect()
}

/// Case-insensitive identity of a character for run detection.
pub(crate) fn fold_char(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

pub(crate) fn is_all_caps(word: &str) -> bool {
    let mut letters = word.chars().filter(|c| c.is_alphabetic()).peekable();
    letters.peek().is_some() && letters.all(char::is_uppercase)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pieces(word: &str) -> Vec<&str> {
        piece_spans(word, &["tk_rep"]).into_iter().map(|(s, e)| &word[s..e]).collect()
    }

    #[test]
    fn splits_at_class_boundaries() {
        assert_eq!(pieces("a&b"), vec!["a", "&", "b"]);
        assert_eq!(pieces("ok?!"), vec!["ok", "?!"]);
        assert_eq!(pieces("covid19"), vec!["covid19"]);
        assert_eq!(pieces("tk_rep"), vec!["tk_rep"]);
        assert_eq!(pieces("#tag"), vec!["#", "tag"]);
    }

    #[test]
    fn devanagari_marks_stay_attached() {
        // virama and vowel signs are combining marks
        assert_eq!(pieces("नमस्ते"), vec!["नमस्ते"]);
        assert_eq!(pieces("नमस्ते!"), vec!["नमस्ते", "!"]);
    }

    #[test]
    fn emoji_variation_selector_stays_with_emoji() {
        assert_eq!(pieces("a❤\u{FE0F}"), vec!["a", "❤\u{FE0F}"]);
    }

    #[test]
    fn word_spans_skip_whitespace_runs() {
        let t = "  ab \t c ";
        let words: Vec<&str> = word_spans(t).into_iter().map(|(s, e)| &t[s..e]).collect();
        assert_eq!(words, vec!["ab", "c"]);
    }

    #[test]
    fn all_caps_needs_a_letter() {
        assert!(is_all_caps("OK?"));
        assert!(is_all_caps("I"));
        assert!(!is_all_caps("Ok"));
        assert!(!is_all_caps("42"));
        assert!(!is_all_caps("नमस्ते"));
    }
}
