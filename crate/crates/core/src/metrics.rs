//! Sentence-level similarity metrics, each producing a score in `[0, 1]`.
//!
//! These are the seven non-LASSO ranking methods: BLEU-1 through BLEU-4,
//! ROUGE-L, CIDEr, and METEOR. All of them are directional (the main
//! question is always the reference, the basic question the candidate)
//! and none of them assume symmetry.
//!
//! Deviations from the classic definitions, chosen to keep every score
//! deterministic, dependency-free, and inside `[0, 1]`:
//!
//! - BLEU smooths zero precisions with a small epsilon instead of
//!   collapsing to 0, so near-miss candidates still order totally.
//! - ROUGE is fixed to ROUGE-L with beta = 1.2.
//! - METEOR is exact-match only (no stemming or synonym tables); it is
//!   exported as `meteor_lite` to flag that restriction.
//! - CIDEr drops the conventional x10 scale so the result fits `[0, 1]`.

use crate::error::{Error, Result};
use crate::text::{ngrams, Question};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

const BLEU_EPSILON: f64 = 1e-9;
const ROUGE_BETA: f64 = 1.2;
const CIDER_MAX_ORDER: usize = 4;

/// A similarity value, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub fn new(value: f64) -> Self {
        debug_assert!(
            value.is_finite() && value > -1e-9 && value < 1.0 + 1e-9,
            "similarity score out of range: {value}"
        );
        SimilarityScore(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// The seven metric-based ranking methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricName {
    Bleu1,
    Bleu2,
    Bleu3,
    Bleu4,
    Rouge,
    Cider,
    Meteor,
}

impl MetricName {
    pub const ALL: [MetricName; 7] = [
        MetricName::Bleu1,
        MetricName::Bleu2,
        MetricName::Bleu3,
        MetricName::Bleu4,
        MetricName::Rouge,
        MetricName::Cider,
        MetricName::Meteor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Bleu1 => "bleu1",
            MetricName::Bleu2 => "bleu2",
            MetricName::Bleu3 => "bleu3",
            MetricName::Bleu4 => "bleu4",
            MetricName::Rouge => "rouge",
            MetricName::Cider => "cider",
            MetricName::Meteor => "meteor",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bleu1" => Ok(MetricName::Bleu1),
            "bleu2" => Ok(MetricName::Bleu2),
            "bleu3" => Ok(MetricName::Bleu3),
            "bleu4" => Ok(MetricName::Bleu4),
            "rouge" => Ok(MetricName::Rouge),
            "cider" => Ok(MetricName::Cider),
            "meteor" => Ok(MetricName::Meteor),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

/// Cumulative sentence BLEU with brevity penalty.
///
/// Modified k-gram precisions are combined by geometric mean for
/// k = 1..=max_n; a precision of zero is replaced by a small epsilon.
/// Orders for which the candidate has no k-grams at all (candidate
/// shorter than k) are left out of the mean, so `bleu(q, q, n)` is 1 for
/// every non-empty `q`. Empty candidate or reference scores 0.
pub fn bleu(candidate: &Question, reference: &Question, max_n: usize) -> Result<SimilarityScore> {
    if !(1..=4).contains(&max_n) {
        return Err(Error::invalid(format!(
            "bleu max_n must be in 1..=4, got {max_n}"
        )));
    }
    let cand = candidate.tokens();
    let refr = reference.tokens();
    if cand.is_empty() || refr.is_empty() {
        return Ok(SimilarityScore::new(0.0));
    }

    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for k in 1..=max_n.min(cand.len()) {
        let cand_grams = ngrams(cand, k)?;
        let ref_grams = ngrams(refr, k)?;
        let total = cand_grams.total();
        let clipped: usize = cand_grams
            .counts()
            .iter()
            .map(|(gram, &count)| count.min(ref_grams.get(gram)))
            .sum();
        let precision = if clipped == 0 {
            BLEU_EPSILON
        } else {
            clipped as f64 / total as f64
        };
        log_sum += precision.ln();
        orders += 1;
    }

    let geo_mean = (log_sum / orders as f64).exp();
    let c = cand.len() as f64;
    let r = refr.len() as f64;
    let brevity = (1.0 - r / c).exp().min(1.0);
    Ok(SimilarityScore::new(geo_mean * brevity))
}

/// ROUGE-L: F-measure over the longest common subsequence, beta = 1.2.
pub fn rouge_l(candidate: &Question, reference: &Question) -> SimilarityScore {
    let cand = candidate.tokens();
    let refr = reference.tokens();
    if cand.is_empty() || refr.is_empty() {
        return SimilarityScore::new(0.0);
    }
    let lcs = lcs_len(cand, refr);
    if lcs == 0 {
        return SimilarityScore::new(0.0);
    }
    let p = lcs as f64 / cand.len() as f64;
    let r = lcs as f64 / refr.len() as f64;
    let beta_sq = ROUGE_BETA * ROUGE_BETA;
    SimilarityScore::new((1.0 + beta_sq) * r * p / (r + beta_sq * p))
}

/// Exact-match METEOR.
///
/// Unigram matches are aligned leftmost-first one-to-one; the fragmentation
/// penalty counts maximal runs that are contiguous in both sentences.
pub fn meteor_lite(candidate: &Question, reference: &Question) -> SimilarityScore {
    let cand = candidate.tokens();
    let refr = reference.tokens();
    if cand.is_empty() || refr.is_empty() {
        return SimilarityScore::new(0.0);
    }
    let (matches, chunks) = align_chunks(cand, refr);
    if matches == 0 {
        return SimilarityScore::new(0.0);
    }
    let m = matches as f64;
    let p = m / cand.len() as f64;
    let r = m / refr.len() as f64;
    let f_mean = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * (chunks as f64 / m).powi(3);
    SimilarityScore::new(f_mean * (1.0 - penalty))
}

/// Leftmost-feasible one-to-one token alignment.
///
/// Returns `(m, chunks)`: the number of matched candidate tokens and the
/// number of maximal runs whose candidate and reference positions are both
/// contiguous and increasing. `1 <= chunks <= m` whenever `m >= 1`.
fn align_chunks(cand: &[String], refr: &[String]) -> (usize, usize) {
    let mut free: HashMap<&str, VecDeque<usize>> = HashMap::new();
    for (j, tok) in refr.iter().enumerate() {
        free.entry(tok).or_default().push_back(j);
    }

    let mut aligned: Vec<(usize, usize)> = Vec::new();
    for (i, tok) in cand.iter().enumerate() {
        if let Some(slots) = free.get_mut(tok.as_str()) {
            if let Some(j) = slots.pop_front() {
                aligned.push((i, j));
            }
        }
    }

    let mut chunks = 0;
    for (t, &(i, j)) in aligned.iter().enumerate() {
        let continues = t > 0 && {
            let (pi, pj) = aligned[t - 1];
            i == pi + 1 && j == pj + 1
        };
        if !continues {
            chunks += 1;
        }
    }
    (aligned.len(), chunks)
}

/// Corpus document frequencies for CIDEr's TF-IDF weighting.
///
/// `idf(g) = ln((n_docs + 1) / (df(g) + 1))`, with `df = 0` for grams the
/// corpus never saw.
#[derive(Debug, Clone)]
pub struct IdfTable {
    n_docs: usize,
    max_order: usize,
    doc_freq: HashMap<Vec<String>, usize>,
}

impl IdfTable {
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn doc_freq(&self, gram: &[String]) -> usize {
        self.doc_freq.get(gram).copied().unwrap_or(0)
    }

    pub fn idf(&self, gram: &[String]) -> f64 {
        let df = self.doc_freq(gram);
        (((self.n_docs + 1) as f64) / ((df + 1) as f64)).ln()
    }
}

/// Count, for every n-gram of order `1..=n_max`, how many corpus questions
/// contain it at least once.
pub fn compute_idf(corpus: &[Question], n_max: usize) -> Result<IdfTable> {
    if corpus.is_empty() {
        return Err(Error::invalid("idf corpus must be non-empty"));
    }
    if n_max == 0 {
        return Err(Error::invalid("idf max order must be at least 1"));
    }
    let mut doc_freq: HashMap<Vec<String>, usize> = HashMap::new();
    for question in corpus {
        let mut seen: HashSet<Vec<String>> = HashSet::new();
        for n in 1..=n_max {
            for gram in ngrams(question.tokens(), n)?.counts().keys() {
                seen.insert(gram.clone());
            }
        }
        for gram in seen {
            *doc_freq.entry(gram).or_insert(0) += 1;
        }
    }
    Ok(IdfTable {
        n_docs: corpus.len(),
        max_order: n_max,
        doc_freq,
    })
}

/// CIDEr without the x10 scale: mean over n = 1..=4 of the cosine between
/// TF-IDF n-gram vectors. An order where either vector is zero contributes 0.
pub fn cider(candidate: &Question, reference: &Question, idf: &IdfTable) -> Result<SimilarityScore> {
    let mut sum = 0.0;
    for n in 1..=CIDER_MAX_ORDER {
        let cand_vec = tfidf_grams(candidate, n, idf)?;
        let ref_vec = tfidf_grams(reference, n, idf)?;
        sum += sparse_cosine(&cand_vec, &ref_vec);
    }
    Ok(SimilarityScore::new(sum / CIDER_MAX_ORDER as f64))
}

fn tfidf_grams(q: &Question, n: usize, idf: &IdfTable) -> Result<HashMap<Vec<String>, f64>> {
    let grams = ngrams(q.tokens(), n)?;
    Ok(grams
        .counts()
        .iter()
        .map(|(gram, &count)| {
            let weight = count as f64 * idf.idf(gram);
            (gram.clone(), weight)
        })
        .collect())
}

fn sparse_cosine(a: &HashMap<Vec<String>, f64>, b: &HashMap<Vec<String>, f64>) -> f64 {
    let norm_a: f64 = a.values().map(|v| v * v).sum::<f64>().sqrt();
    let norm_b: f64 = b.values().map(|v| v * v).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    let dot: f64 = a
        .iter()
        .map(|(gram, &w)| w * b.get(gram).copied().unwrap_or(0.0))
        .sum();
    (dot / (norm_a * norm_b)).clamp(-1.0, 1.0)
}

/// Score `candidate` against `reference` with the named metric. The main
/// question is the reference; `idf` is required for CIDEr.
pub fn score(
    method: MetricName,
    candidate: &Question,
    reference: &Question,
    idf: Option<&IdfTable>,
) -> Result<SimilarityScore> {
    match method {
        MetricName::Bleu1 => bleu(candidate, reference, 1),
        MetricName::Bleu2 => bleu(candidate, reference, 2),
        MetricName::Bleu3 => bleu(candidate, reference, 3),
        MetricName::Bleu4 => bleu(candidate, reference, 4),
        MetricName::Rouge => Ok(rouge_l(candidate, reference)),
        MetricName::Meteor => Ok(meteor_lite(candidate, reference)),
        MetricName::Cider => {
            let idf = idf.ok_or(Error::MissingIdf)?;
            cider(candidate, reference, idf)
        }
    }
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for tok_a in a {
        for (j, tok_b) in b.iter().enumerate() {
            curr[j + 1] = if tok_a == tok_b {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}
