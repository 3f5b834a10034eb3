//! JSONL record files: main questions, basic-question pools, rankings, and
//! noisy questions.
//!
//! One JSON object per line, blank lines skipped. Parse and validation
//! failures are reported as `path:line: message` so a bad record in a large
//! file is findable. All writers emit records in input order with a fixed
//! field order, so identical data produces identical bytes.

use crate::error::{Error, Result};
use crate::noise::NoisyQuestion;
use crate::ranker::{RankedBQD, RankingMethod};
use crate::text::Question;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

/// A main question; `answers` is the gold answer list (1 to 10 entries)
/// and may be omitted for rank-only inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MqRecord {
    pub id: String,
    pub image_id: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answers: Option<Vec<String>>,
}

impl MqRecord {
    pub fn to_question(&self) -> Result<Question> {
        Question::new(&self.id, &self.question)
    }
}

/// One basic-question pool entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRecord {
    pub id: String,
    pub question: String,
}

impl PoolRecord {
    pub fn to_question(&self) -> Result<Question> {
        Question::new(&self.id, &self.question)
    }
}

fn parse_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let contents = fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        records.push((lineno, record));
    }
    Ok(records)
}

/// Read a JSONL file without record-level validation.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    Ok(parse_lines(path)?.into_iter().map(|(_, r)| r).collect())
}

/// Write one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read and validate a main-question file: non-empty ids and question
/// texts, unique ids, 1 to 10 non-empty gold answers when present.
pub fn read_mq_file(path: &Path) -> Result<Vec<MqRecord>> {
    let records: Vec<(usize, MqRecord)> = parse_lines(path)?;
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut seen: HashSet<&str> = HashSet::new();
    for (lineno, record) in &records {
        if record.id.is_empty() {
            return Err(Error::parse(path, *lineno, "empty id"));
        }
        if record.question.trim().is_empty() {
            return Err(Error::parse(path, *lineno, "empty question"));
        }
        if let Some(answers) = &record.answers {
            if answers.is_empty() || answers.len() > 10 {
                return Err(Error::parse(
                    path,
                    *lineno,
                    format!("expected 1 to 10 answers, got {}", answers.len()),
                ));
            }
            if answers.iter().any(|a| a.trim().is_empty()) {
                return Err(Error::parse(path, *lineno, "empty answer"));
            }
        }
        if !seen.insert(record.id.as_str()) {
            return Err(Error::parse(
                path,
                *lineno,
                format!("duplicate id {:?}", record.id),
            ));
        }
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Read and validate a basic-question pool: non-empty ids and texts,
/// unique ids.
pub fn read_pool_file(path: &Path) -> Result<Vec<PoolRecord>> {
    let records: Vec<(usize, PoolRecord)> = parse_lines(path)?;
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut seen: HashSet<&str> = HashSet::new();
    for (lineno, record) in &records {
        if record.id.is_empty() {
            return Err(Error::parse(path, *lineno, "empty id"));
        }
        if record.question.trim().is_empty() {
            return Err(Error::parse(path, *lineno, "empty question"));
        }
        if !seen.insert(record.id.as_str()) {
            return Err(Error::parse(
                path,
                *lineno,
                format!("duplicate id {:?}", record.id),
            ));
        }
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Read a rankings file (one `RankedBQD` per line) and check its internal
/// invariants: known method, unique main-question ids, per-ranking unique
/// entry ids, finite scores, and no more entries than `top_k`.
pub fn read_ranked_file(path: &Path) -> Result<Vec<RankedBQD>> {
    let records: Vec<(usize, RankedBQD)> = parse_lines(path)?;
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut seen_mq: HashSet<&str> = HashSet::new();
    for (lineno, ranked) in &records {
        if ranked.mq_id.is_empty() {
            return Err(Error::parse(path, *lineno, "empty mq_id"));
        }
        if ranked.method.parse::<RankingMethod>().is_err() {
            return Err(Error::parse(
                path,
                *lineno,
                format!("unknown ranking method {:?}", ranked.method),
            ));
        }
        if ranked.top_k == 0 {
            return Err(Error::parse(path, *lineno, "top_k must be at least 1"));
        }
        if ranked.entries.len() > ranked.top_k {
            return Err(Error::parse(
                path,
                *lineno,
                format!(
                    "{} entries exceed top_k {}",
                    ranked.entries.len(),
                    ranked.top_k
                ),
            ));
        }
        let mut seen_bq: HashSet<&str> = HashSet::new();
        for entry in &ranked.entries {
            if entry.bq_id.is_empty() {
                return Err(Error::parse(path, *lineno, "empty bq_id"));
            }
            if !entry.score.is_finite() {
                return Err(Error::parse(
                    path,
                    *lineno,
                    format!("non-finite score for {:?}", entry.bq_id),
                ));
            }
            if !seen_bq.insert(entry.bq_id.as_str()) {
                return Err(Error::parse(
                    path,
                    *lineno,
                    format!("duplicate entry id {:?}", entry.bq_id),
                ));
            }
        }
        if !seen_mq.insert(ranked.mq_id.as_str()) {
            return Err(Error::parse(
                path,
                *lineno,
                format!("duplicate mq_id {:?}", ranked.mq_id),
            ));
        }
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Read a noisy-question file and check that ids and texts are non-empty
/// and that no `(mq_id, level)` pair repeats.
pub fn read_noisy_file(path: &Path) -> Result<Vec<NoisyQuestion>> {
    let records: Vec<(usize, NoisyQuestion)> = parse_lines(path)?;
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut seen: HashSet<(&str, usize)> = HashSet::new();
    for (lineno, record) in &records {
        if record.mq_id.is_empty() {
            return Err(Error::parse(path, *lineno, "empty mq_id"));
        }
        if record.text.trim().is_empty() {
            return Err(Error::parse(path, *lineno, "empty question"));
        }
        if !seen.insert((record.mq_id.as_str(), record.level)) {
            return Err(Error::parse(
                path,
                *lineno,
                format!(
                    "duplicate record for mq_id {:?} at level {}",
                    record.mq_id, record.level
                ),
            ));
        }
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Convert validated pool records to the text-domain type.
pub fn pool_to_questions(records: &[PoolRecord]) -> Result<Vec<Question>> {
    records.iter().map(PoolRecord::to_question).collect()
}
