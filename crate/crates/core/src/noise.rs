//! Graded noise: appending ranked basic questions to a main question.
//!
//! A ranked list is cut into consecutive groups of `group_size`. Noise
//! level `L` appends group `L`, so level 1 carries the most similar basic
//! questions and deeper levels progressively less similar ones. Level 0 is
//! the untouched main question. Raw question texts are concatenated with
//! single spaces, main question first.

use crate::encoding::Encoder;
use crate::error::{Error, Result};
use crate::io::MqRecord;
use crate::metrics::{compute_idf, MetricName};
use crate::ranker::{rank, RankOptions, RankedBQD, RankedEntry, RankingMethod};
use crate::text::Question;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A main question with `level * group_size`-deep noise appended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyQuestion {
    pub mq_id: String,
    pub image_id: String,
    pub level: usize,
    #[serde(rename = "question")]
    pub text: String,
    pub appended_bq_ids: Vec<String>,
}

/// Deepest level a ranked list supports: one level per full group.
pub fn max_level(ranked: &RankedBQD, group_size: usize) -> usize {
    if group_size == 0 {
        return 0;
    }
    ranked.entries.len() / group_size
}

/// The entries noise level `level` appends: ranks `(level-1)*g+1 ..= level*g`,
/// 1-based. Level 0 selects nothing. Levels partition the ranked prefix, so
/// no entry appears at two levels.
pub fn select_level(
    ranked: &RankedBQD,
    level: usize,
    group_size: usize,
) -> Result<&[RankedEntry]> {
    if group_size == 0 {
        return Err(Error::invalid("group_size must be at least 1"));
    }
    if level == 0 {
        return Ok(&[]);
    }
    let max = max_level(ranked, group_size);
    if level > max {
        return Err(Error::LevelOutOfRange { level, max_level: max });
    }
    let start = (level - 1) * group_size;
    Ok(&ranked.entries[start..start + group_size])
}

/// Concatenate raw texts with single spaces, main question first.
pub fn concat_noise(mq_text: &str, entries: &[RankedEntry]) -> String {
    let mut text = mq_text.to_owned();
    for entry in entries {
        text.push(' ');
        text.push_str(&entry.question);
    }
    text
}

/// Build the noisy variant of one main question at one level.
pub fn noisy_question(
    mq: &MqRecord,
    ranked: &RankedBQD,
    level: usize,
    group_size: usize,
) -> Result<NoisyQuestion> {
    if ranked.mq_id != mq.id {
        return Err(Error::invalid(format!(
            "ranking belongs to {:?}, not {:?}",
            ranked.mq_id, mq.id
        )));
    }
    let selected = select_level(ranked, level, group_size)?;
    Ok(NoisyQuestion {
        mq_id: mq.id.clone(),
        image_id: mq.image_id.clone(),
        level,
        text: concat_noise(&mq.question, selected),
        appended_bq_ids: selected.iter().map(|e| e.bq_id.clone()).collect(),
    })
}

/// The ranking outcome for one main question in a batch.
#[derive(Debug)]
pub struct RankOutcome {
    pub mq_id: String,
    pub result: Result<RankedBQD>,
}

/// Rank every main question against the pool, in parallel.
///
/// Shared resources are fitted once, on the pool alone: the TF-IDF encoder
/// for LASSO (unless a caller-provided encoder overrides it) and the IDF
/// table for CIDEr. One degenerate main question does not abort the batch;
/// its failure is returned in place, in input order.
pub fn build_ranked_bqd(
    mqs: &[MqRecord],
    pool: &[Question],
    method: RankingMethod,
    encoder: Option<&Encoder>,
    options: &RankOptions,
) -> Result<Vec<RankOutcome>> {
    if mqs.is_empty() {
        return Err(Error::EmptyRecords);
    }
    if pool.is_empty() {
        return Err(Error::EmptyRecords);
    }

    let fitted;
    let encoder = match (method, encoder) {
        (RankingMethod::Lasso, Some(enc)) => Some(enc),
        (RankingMethod::Lasso, None) => {
            fitted = crate::encoding::fit_tfidf(pool, Default::default())?;
            Some(&fitted)
        }
        _ => None,
    };
    let idf = match method {
        RankingMethod::Metric(MetricName::Cider) => Some(compute_idf(pool, 4)?),
        _ => None,
    };

    Ok(mqs
        .par_iter()
        .map(|mq| {
            let result = mq
                .to_question()
                .and_then(|question| rank(&question, pool, method, encoder, idf.as_ref(), options));
            RankOutcome { mq_id: mq.id.clone(), result }
        })
        .collect())
}
