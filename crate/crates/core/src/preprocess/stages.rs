//! The individual rewrite stages. Each is a total function on text; the
//! pipeline in the parent module fixes their order.

use super::text::{all_piece_spans, class_of, fold_char, is_all_caps, piece_spans, word_spans, CharClass};
use super::{EmojiMap, PreprocessConfig};

const ENTITIES: [(&str, &str); 5] = [("&amp;", "&"), ("&lt;", "<"), ("&gt;", ">"), ("&quot;", "\""), ("&#39;", "'")];

fn decode_once(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        let hit = ENTITIES
            .iter()
            .find(|(ent, _)| rest.get(..ent.len()).is_some_and(|head| head.eq_ignore_ascii_case(ent)));
        match hit {
            Some((ent, ch)) => {
                out.push_str(ch);
                rest = &rest[ent.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Decodes the five HTML entities (ASCII case-insensitively, as browsers
/// accept `&AMP;`) until none remain, so doubly escaped text (`&amp;amp;`)
/// decodes fully.
pub fn decode_html(text: &str) -> String {
    let mut current = decode_once(text);
    loop {
        let next = decode_once(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

pub fn replace_emojis(text: &str, map: &EmojiMap) -> String {
    if map.is_empty() {
        return text.to_string();
    }
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        match map.match_at(&chars, i) {
            Some((len, rep)) => {
                out.push(' ');
                out.push_str(rep);
                out.push(' ');
                i += len;
            }
            None => {
                out.push(chars[i]);
                i += 1;
            }
        }
    }
    out
}

pub fn space_hashtags(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        out.push(c);
        if c == '#' && chars.peek().is_some_and(|n| !n.is_whitespace()) {
            out.push(' ');
        }
    }
    out
}

/// Rewrites runs of one repeated character as ` {rep_token} n c `. Runs are
/// detected case-insensitively; `c` is the first character of the run.
pub fn replace_char_reps(text: &str, cfg: &PreprocessConfig) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            out.push(c);
            i += 1;
            continue;
        }
        let key = fold_char(c);
        let mut j = i + 1;
        while j < chars.len() && !chars[j].is_whitespace() && fold_char(chars[j]) == key {
            j += 1;
        }
        let n = j - i;
        if n >= cfg.min_char_run {
            out.push(' ');
            out.push_str(&cfg.rep_token);
            out.push(' ');
            out.push_str(&n.to_string());
            out.push(' ');
            out.push(c);
            out.push(' ');
        } else {
            out.extend(&chars[i..j]);
        }
        i = j;
    }
    out
}

/// Rewrites runs of identical consecutive words as ` {wrep_token} n w `.
///
/// Words are compared as they will appear after normalization: split at
/// word/punctuation boundaries and lowercased. `w` is the first word of the run
/// as written.
pub fn replace_word_reps(text: &str, cfg: &PreprocessConfig) -> String {
    let protected = cfg.tokens();
    let spans = all_piece_spans(text, &protected);
    let keys: Vec<String> = spans.iter().map(|&(s, e)| text[s..e].to_lowercase()).collect();
    let mut out = String::with_capacity(text.len());
    let mut copied = 0;
    let mut i = 0;
    while i < spans.len() {
        let mut j = i + 1;
        while j < spans.len() && keys[j] == keys[i] {
            j += 1;
        }
        let n = j - i;
        if n >= cfg.min_word_run {
            let (start, first_end) = spans[i];
            let end = spans[j - 1].1;
            out.push_str(&text[copied..start]);
            out.push(' ');
            out.push_str(&cfg.wrep_token);
            out.push(' ');
            out.push_str(&n.to_string());
            out.push(' ');
            out.push_str(&text[start..first_end]);
            out.push(' ');
            copied = end;
        }
        i = j;
    }
    out.push_str(&text[copied..]);
    out
}

fn rewrite_words(text: &str, mut f: impl FnMut(usize, &str, Option<&str>) -> Option<String>) -> String {
    let spans = word_spans(text);
    let mut out = String::with_capacity(text.len() + 16);
    let mut copied = 0;
    for (idx, &(s, e)) in spans.iter().enumerate() {
        let prev = idx.checked_sub(1).map(|p| &text[spans[p].0..spans[p].1]);
        if let Some(rep) = f(idx, &text[s..e], prev) {
            out.push_str(&text[copied..s]);
            out.push_str(&rep);
            copied = e;
        }
    }
    out.push_str(&text[copied..]);
    out
}

fn is_hashtag_body(prev: Option<&str>) -> bool {
    prev == Some("#")
}

/// `WORD` → `{up_token} word` for every word whose letters are all uppercase.
/// Hashtag bodies (the word after a lone `#`) are left for normalization.
pub fn mark_allcaps(text: &str, cfg: &PreprocessConfig) -> String {
    rewrite_words(text, |_, word, prev| {
        (is_all_caps(word) && !is_hashtag_body(prev)).then(|| format!("{} {}", cfg.up_token, word.to_lowercase()))
    })
}

fn lower_first(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// `Word` → `{maj_token} word` unless the word opens a sentence (first word
/// of the text, or following a word ending in `.`, `!` or `?`), in which case
/// it is lowercased without a token. Hashtag bodies are skipped.
pub fn mark_capitalized(text: &str, cfg: &PreprocessConfig) -> String {
    rewrite_words(text, |idx, word, prev| {
        let first = word.chars().next()?;
        if !first.is_uppercase() || is_hashtag_body(prev) {
            return None;
        }
        let sentence_initial = idx == 0 || prev.is_some_and(|p| p.ends_with(['.', '!', '?']));
        if sentence_initial {
            Some(word.to_lowercase())
        } else if is_all_caps(word) {
            None
        } else {
            Some(format!("{} {}", cfg.maj_token, lower_first(word)))
        }
    })
}

/// Decodes HTML entities, separates word characters from adjacent
/// punctuation, lowercases, and collapses whitespace.
pub fn normalize(text: &str) -> String {
    normalize_with(text, &[])
}

/// [`normalize`] that keeps the given tokens whole even if they contain
/// punctuation.
pub fn normalize_with(text: &str, protected: &[&str]) -> String {
    let decoded = decode_html(text);
    let mut out = String::with_capacity(decoded.len() + 16);
    for (ws, we) in word_spans(&decoded) {
        let word = &decoded[ws..we];
        for (ps, pe) in piece_spans(word, protected) {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&word[ps..pe]);
        }
    }
    let lowered = out.to_lowercase();
    // lowercasing never introduces whitespace, but keep the contract explicit
    debug_assert!(!lowered.chars().any(|c| class_of(c) == CharClass::Space && c != ' '));
    lowered
}
