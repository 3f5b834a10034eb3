//! Tokenization, normalization, and n-gram extraction shared by all
//! metrics and encoders.
//!
//! The rules are deliberately minimal so that every downstream score is
//! reproducible: lowercase, drop sentence-final punctuation, treat any
//! other punctuation as a separator. No stemming, no stop words.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// A question with a stable id and tokens derived from its raw text.
///
/// `tokens` is always `tokenize(normalize(text))`; the constructor is the
/// only way to build one, so the derivation cannot drift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    id: String,
    text: String,
    tokens: Vec<String>,
}

impl Question {
    /// Build a question from its raw text. The id must be non-empty.
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::invalid("question id must be non-empty"));
        }
        let text = text.into();
        let tokens = tokenize(&normalize(&text));
        Ok(Question { id, text, tokens })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// The raw text, punctuation and casing intact. Noise concatenation
    /// uses this form; metrics and encoders use `tokens`.
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Sliding-window n-gram counts over a token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCounts {
    n: usize,
    counts: HashMap<Vec<String>, usize>,
}

impl NGramCounts {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &HashMap<Vec<String>, usize> {
        &self.counts
    }

    pub fn get(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Total number of n-gram occurrences, i.e. `max(0, len - n + 1)`.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Normalize raw question text for comparison.
///
/// Lowercases, strips the trailing run of `?`/`.`/`!`, replaces every other
/// punctuation character with a space, and collapses whitespace. Idempotent.
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    let mut pending_space = false;
    for ch in lowered.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch);
        } else {
            // whitespace and punctuation both separate tokens
            pending_space = true;
        }
    }
    out
}

/// Split normalized text into tokens. Empty tokens never occur because
/// `normalize` collapses separators to single spaces.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Count the n-grams of `tokens` with a sliding window.
///
/// Rejects `n = 0`; returns an empty map when the sequence is shorter
/// than `n`.
pub fn ngrams(tokens: &[String], n: usize) -> Result<NGramCounts> {
    if n == 0 {
        return Err(Error::invalid("n-gram order must be at least 1"));
    }
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    Ok(NGramCounts { n, counts })
}
