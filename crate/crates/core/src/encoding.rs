//! Question-to-vector encoding for the sparse-regression ranker.
//!
//! Questions become L2-normalized TF-IDF vectors over a word n-gram
//! vocabulary fitted on the basic-question pool, or come from a
//! pre-computed embedding file keyed by question id. Vectors are stored
//! sparsely; a TF-IDF vocabulary over a large pool easily reaches 10^4..10^5
//! dimensions while each question touches a few dozen of them.

use crate::error::{Error, Result};
use crate::text::{ngrams, Question};
use std::collections::HashMap;
use std::fs;
use std::path::Path;

/// A sparse vector: sorted `(index, value)` entries, zeros omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl Vector {
    /// Entries must be strictly increasing in index, in range, finite and
    /// non-zero.
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev: Option<usize> = None;
        for &(idx, value) in &entries {
            if idx >= dim {
                return Err(Error::invalid(format!(
                    "vector entry index {idx} out of range for dim {dim}"
                )));
            }
            if prev.is_some_and(|p| p >= idx) {
                return Err(Error::invalid("vector entries must be sorted by index"));
            }
            if !value.is_finite() || value == 0.0 {
                return Err(Error::invalid(format!(
                    "vector entry at {idx} must be finite and non-zero, got {value}"
                )));
            }
            prev = Some(idx);
        }
        Ok(Vector { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Vector { dim, entries: Vec::new() }
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dense vector contains non-finite values"));
        }
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        Ok(Vector { dim: values.len(), entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            dense[i] = v;
        }
        dense
    }

    /// Dot product against a dense vector of the same dimension.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        debug_assert_eq!(dense.len(), self.dim);
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    /// `dense += scale * self`.
    pub fn add_scaled_into(&self, scale: f64, dense: &mut [f64]) {
        debug_assert_eq!(dense.len(), self.dim);
        for &(i, v) in &self.entries {
            dense[i] += scale * v;
        }
    }

    fn l2_normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            for entry in &mut self.entries {
                entry.1 /= norm;
            }
        }
        self
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &Vector, b: &Vector) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let norm_a = a.norm();
    let norm_b = b.norm();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Ok(0.0);
    }
    let mut dot = 0.0;
    let mut ia = a.entries.iter().peekable();
    let mut ib = b.entries.iter().peekable();
    while let (Some(&&(i, va)), Some(&&(j, vb))) = (ia.peek(), ib.peek()) {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => {
                ia.next();
            }
            std::cmp::Ordering::Greater => {
                ib.next();
            }
            std::cmp::Ordering::Equal => {
                dot += va * vb;
                ia.next();
                ib.next();
            }
        }
    }
    Ok((dot / (norm_a * norm_b)).clamp(-1.0, 1.0))
}

/// Which word n-gram orders make up the TF-IDF vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgramOrders {
    Unigrams,
    UnigramsAndBigrams,
}

impl NgramOrders {
    fn max_order(self) -> usize {
        match self {
            NgramOrders::Unigrams => 1,
            NgramOrders::UnigramsAndBigrams => 2,
        }
    }
}

impl Default for NgramOrders {
    fn default() -> Self {
        NgramOrders::UnigramsAndBigrams
    }
}

/// Turns questions into fixed-dimension vectors.
#[derive(Debug, Clone)]
pub enum Encoder {
    /// Vocabulary and IDF weights fitted on a question corpus. Terms are
    /// space-joined n-grams, sorted lexicographically so dimension order
    /// is deterministic.
    TfIdf {
        vocab: Vec<String>,
        index: HashMap<String, usize>,
        idf: Vec<f64>,
        orders: NgramOrders,
    },
    /// Pre-computed embeddings keyed by question id.
    External {
        dim: usize,
        embeddings: HashMap<String, Vec<f64>>,
    },
}

impl Encoder {
    pub fn dim(&self) -> usize {
        match self {
            Encoder::TfIdf { vocab, .. } => vocab.len(),
            Encoder::External { dim, .. } => *dim,
        }
    }

    /// Encode one question. TF-IDF vectors are L2-normalized (an
    /// all-out-of-vocabulary question stays the zero vector); external
    /// embeddings are returned as stored.
    pub fn encode(&self, question: &Question) -> Result<Vector> {
        match self {
            Encoder::TfIdf { vocab, index, idf, orders } => {
                let mut counts: HashMap<usize, usize> = HashMap::new();
                for n in 1..=orders.max_order() {
                    for (gram, &count) in ngrams(question.tokens(), n)?.counts() {
                        let term = gram.join(" ");
                        if let Some(&i) = index.get(&term) {
                            *counts.entry(i).or_insert(0) += count;
                        }
                    }
                }
                let mut entries: Vec<(usize, f64)> = counts
                    .into_iter()
                    .map(|(i, count)| (i, count as f64 * idf[i]))
                    .filter(|&(_, v)| v != 0.0)
                    .collect();
                entries.sort_unstable_by_key(|&(i, _)| i);
                Ok(Vector { dim: vocab.len(), entries }.l2_normalized())
            }
            Encoder::External { dim, embeddings } => {
                let values = embeddings
                    .get(question.id())
                    .ok_or_else(|| Error::MissingEmbedding { id: question.id().to_owned() })?;
                debug_assert_eq!(values.len(), *dim);
                Vector::from_dense(values)
            }
        }
    }
}

/// Fit a TF-IDF encoder on a corpus. The vocabulary is the union of the
/// corpus's n-gram terms for the requested orders; `idf(t) =
/// ln((n_docs + 1) / (df(t) + 1))`.
pub fn fit_tfidf(corpus: &[Question], orders: NgramOrders) -> Result<Encoder> {
    if corpus.is_empty() {
        return Err(Error::invalid("tf-idf corpus must be non-empty"));
    }
    let mut doc_freq: HashMap<String, usize> = HashMap::new();
    for question in corpus {
        let mut seen: Vec<String> = Vec::new();
        for n in 1..=orders.max_order() {
            for gram in ngrams(question.tokens(), n)?.counts().keys() {
                seen.push(gram.join(" "));
            }
        }
        seen.sort_unstable();
        seen.dedup();
        for term in seen {
            *doc_freq.entry(term).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<String> = doc_freq.keys().cloned().collect();
    vocab.sort_unstable();
    let n_docs = corpus.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|term| ((n_docs + 1.0) / ((doc_freq[term] + 1) as f64)).ln())
        .collect();
    let index: HashMap<String, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, term)| (term.clone(), i))
        .collect();
    Ok(Encoder::TfIdf { vocab, index, idf, orders })
}

/// Load pre-computed embeddings from a UTF-8 file of
/// `<id>\t<v1> <v2> ... <vd>` lines. The first record fixes the dimension;
/// blank lines are skipped; duplicate ids and ragged dimensions are errors.
pub fn load_external(path: &Path) -> Result<Encoder> {
    let contents = fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut embeddings: HashMap<String, Vec<f64>> = HashMap::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in contents.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&display, lineno, "expected <id>\\t<values>"))?;
        if id.is_empty() {
            return Err(Error::parse(&display, lineno, "empty id"));
        }
        let mut values = Vec::new();
        for field in rest.split_whitespace() {
            let value: f64 = field.parse().map_err(|_| {
                Error::parse(&display, lineno, format!("invalid float {field:?}"))
            })?;
            if !value.is_finite() {
                return Err(Error::parse(&display, lineno, "non-finite embedding value"));
            }
            values.push(value);
        }
        if values.is_empty() {
            return Err(Error::parse(&display, lineno, "embedding has no values"));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::parse(
                    &display,
                    lineno,
                    format!("expected {d} values, got {}", values.len()),
                ));
            }
            Some(_) => {}
        }
        if embeddings.insert(id.to_owned(), values).is_some() {
            return Err(Error::parse(&display, lineno, format!("duplicate id {id:?}")));
        }
    }
    let dim = dim.ok_or_else(|| Error::parse(&display, 0, "embedding file is empty"))?;
    Ok(Encoder::External { dim, embeddings })
}
