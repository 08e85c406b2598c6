//! Fuzz alphabet for preprocessing: letters in both cases, digits, hashtags,
//! punctuation, HTML entities, emojis with modifiers, Devanagari and odd
//! whitespace.

#![allow(dead_code)]

use rand::Rng;

pub const FRAGMENTS: &[&str] = &[
    "a", "b", "e", "o", "r", "y", "A", "B", "O", "Y", "I", "Go", "Stop", "NEWS", "covid19", "COVID19", "very", "Very",
    "no", "1", "7", "#", "##", ".", ",", "!", "?", "'", "\"", "&", ";", "&amp;", "&lt;", "&#39;", "&AMP;", "_", "-",
    "😀", "😢", "🙏", "👍🏽", "👍", "❤️", "🦄", "👨\u{200D}⚕\u{FE0F}", "नमस्ते", "भारत", "़", "\u{FE0F}", " ", " ", " ",
    "  ", "\t", "\n",
];

/// Same shape as the proptest strategy: up to 23 pieces, each a fragment,
/// a fragment repeated 2..9 times, or 2..6 copies joined by spaces.
pub fn random_post<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(0..24);
    let mut out = String::new();
    for _ in 0..n {
        let f = FRAGMENTS[rng.gen_range(0..FRAGMENTS.len())];
        match rng.gen_range(0..6) {
            0..=3 => out.push_str(f),
            4 => out.push_str(&f.repeat(rng.gen_range(2..9))),
            _ => out.push_str(&vec![f; rng.gen_range(2..6)].join(" ")),
        }
    }
    out
}
