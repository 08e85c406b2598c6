//! Whitespace tokenization of preprocessed text and a frequency-ranked
//! vocabulary with three reserved specials.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

pub const UNK: &str = "xxunk";
pub const PAD: &str = "xxpad";
pub const BOS: &str = "xxbos";
pub const UNK_ID: usize = 0;
pub const PAD_ID: usize = 1;
pub const BOS_ID: usize = 2;
pub const SPECIALS: [&str; 3] = [UNK, PAD, BOS];

pub const DEFAULT_MIN_FREQ: usize = 2;
pub const DEFAULT_MAX_SIZE: usize = 30_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VocabError {
    #[error("max_size {0} cannot hold the 3 special tokens")]
    MaxSizeTooSmall(usize),
    #[error("min_freq must be >= 1")]
    MinFreqZero,
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("id {id} out of range for vocabulary of size {size}")]
    IdOutOfRange { id: usize, size: usize },
    #[error("vocabulary file: {0}")]
    Format(String),
}

/// Token strings of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub ids: Option<Vec<usize>>,
}

impl TokenSequence {
    pub fn from_tokens<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        TokenSequence { tokens: tokens.into_iter().map(Into::into).collect(), ids: None }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Splits preprocessed text on whitespace and prepends the bos special.
pub fn tokenize(text: &str) -> TokenSequence {
    let tokens = std::iter::once(BOS.to_string())
        .chain(text.split_whitespace().map(str::to_string))
        .collect();
    TokenSequence { tokens, ids: None }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    id_to_token: Vec<String>,
    token_to_id: HashMap<String, usize>,
    pub min_freq: usize,
    pub max_size: usize,
}

impl Vocab {
    /// Ranks tokens by frequency (descending), ties by first occurrence in
    /// scan order, keeps those seen at least `min_freq` times, and truncates
    /// to `max_size` entries including the specials.
    pub fn build(corpus: &[TokenSequence], min_freq: usize, max_size: usize) -> Result<Self, VocabError> {
        if max_size < SPECIALS.len() {
            return Err(VocabError::MaxSizeTooSmall(max_size));
        }
        if min_freq == 0 {
            return Err(VocabError::MinFreqZero);
        }
        if corpus.is_empty() {
            return Err(VocabError::EmptyCorpus);
        }
        // (count, first-seen index)
        let mut stats: HashMap<&str, (usize, usize)> = HashMap::new();
        let mut order = 0usize;
        for seq in corpus {
            for tok in &seq.tokens {
                if SPECIALS.contains(&tok.as_str()) {
                    continue;
                }
                let entry = stats.entry(tok.as_str()).or_insert_with(|| {
                    order += 1;
                    (0, order)
                });
                entry.0 += 1;
            }
        }
        let mut ranked: Vec<(&str, usize, usize)> = stats
            .into_iter()
            .filter(|(_, (count, _))| *count >= min_freq)
            .map(|(tok, (count, first))| (tok, count, first))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        ranked.truncate(max_size - SPECIALS.len());

        let id_to_token = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(ranked.into_iter().map(|(t, _, _)| t.to_string()))
            .collect();
        Ok(Self::from_parts(id_to_token, min_freq, max_size))
    }

    fn from_parts(id_to_token: Vec<String>, min_freq: usize, max_size: usize) -> Self {
        let token_to_id = id_to_token.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocab { id_to_token, token_to_id, min_freq, max_size }
    }

    /// Rebuilds a vocabulary from its token list (specials first).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, VocabError> {
        if tokens.len() < SPECIALS.len() || tokens[..3] != SPECIALS {
            return Err(VocabError::Format(format!("first three tokens must be {SPECIALS:?}")));
        }
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(VocabError::Format(format!("token {i} is empty or contains whitespace")));
            }
        }
        let size = tokens.len();
        let vocab = Self::from_parts(tokens, 1, size);
        if vocab.token_to_id.len() != size {
            return Err(VocabError::Format("duplicate tokens".into()));
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn id(&self, token: &str) -> usize {
        self.token_to_id.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    pub fn numericalize(&self, seq: &TokenSequence) -> TokenSequence {
        TokenSequence {
            tokens: seq.tokens.clone(),
            ids: Some(seq.tokens.iter().map(|t| self.id(t)).collect()),
        }
    }

    pub fn ids(&self, seq: &TokenSequence) -> Vec<usize> {
        seq.tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn denumericalize(&self, ids: &[usize]) -> Result<Vec<String>, VocabError> {
        ids.iter()
            .map(|&id| {
                self.token(id)
                    .map(str::to_string)
                    .ok_or(VocabError::IdOutOfRange { id, size: self.len() })
            })
            .collect()
    }

    /// One token per line; line number (from 0) is the id.
    pub fn to_text(&self) -> String {
        let mut s = self.id_to_token.join("\n");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self, VocabError> {
        Self::from_tokens(text.lines().map(str::to_string).collect())
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self, VocabError> {
        let text = std::fs::read_to_string(path).map_err(|e| VocabError::Format(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}
