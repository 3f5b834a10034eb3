//! Model evaluation: adapters, accuracy, and the robustness score.
//!
//! A model is anything that maps `(id, image_id, question)` requests to
//! `(id, answer)` responses. External models run as a subprocess speaking
//! a two-file JSONL protocol; the mock adapters cover the interesting
//! degenerate behaviors (noise-immune, noise-sensitive, constant, scripted)
//! deterministically, which is what the test suite and offline experiments
//! need.
//!
//! Robustness compares clean accuracy against accuracy under graded noise:
//! `r = clamp(1 - (relative accuracy drop) / tolerance, 0, 1)`, so a model
//! that loses nothing scores 1 and one that loses `tolerance` of its clean
//! accuracy (relatively) scores 0.

use crate::error::{Error, Result};
use crate::io::MqRecord;
use crate::noise::{max_level, noisy_question, NoisyQuestion};
use crate::ranker::RankedBQD;
use crate::text::normalize;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::str::FromStr;

pub const DEFAULT_TOLERANCE: f64 = 0.2;
pub const DEFAULT_ANSWER: &str = "unknown";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// One question sent to a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRequest {
    pub id: String,
    pub image_id: String,
    pub question: String,
}

/// One answer from a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub id: String,
    pub answer: String,
}

/// How questions are answered.
#[derive(Debug, Clone)]
pub enum ModelAdapter {
    /// Run `argv` with two extra arguments, a request file and a response
    /// file, both JSONL. Exit code 0 means success, and the response file
    /// must answer every request id exactly once.
    External { argv: Vec<String> },
    /// Answer every question the same way.
    MockConstant { answer: String },
    /// Answer by request id; unknown ids get the default answer.
    MockLookup { answers: HashMap<String, String>, default: String },
    /// Answer from the question text up to its first '?', which appended
    /// noise never alters. With a lookup table, the normalized prefix is
    /// the key; without one, the normalized prefix is echoed back.
    MockPrefix { answers: Option<HashMap<String, String>> },
    /// Answer from a seeded FNV-1a hash of the whole question text, so any
    /// appended noise changes the answer almost surely.
    MockHash { seed: u64 },
}

fn fnv1a(seed: u64, text: &str) -> u64 {
    let mut hash = FNV_OFFSET ^ seed;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// The normalized text up to the first '?'. Appending noise after a
/// question mark never changes this, which is what makes `MockPrefix`
/// noise-immune; it is also the lookup key for its answer table.
pub fn prefix_key(question: &str) -> String {
    let prefix = question.split('?').next().unwrap_or(question);
    normalize(prefix)
}

fn mock_answer(adapter: &ModelAdapter, request: &ModelRequest) -> String {
    match adapter {
        ModelAdapter::External { .. } => unreachable!("external adapters are batched"),
        ModelAdapter::MockConstant { answer } => answer.clone(),
        ModelAdapter::MockLookup { answers, default } => {
            answers.get(&request.id).cloned().unwrap_or_else(|| default.clone())
        }
        ModelAdapter::MockPrefix { answers } => {
            let key = prefix_key(&request.question);
            match answers {
                Some(map) => map.get(&key).cloned().unwrap_or_else(|| DEFAULT_ANSWER.into()),
                None if key.is_empty() => DEFAULT_ANSWER.into(),
                None => key,
            }
        }
        ModelAdapter::MockHash { seed } => {
            format!("a{}", fnv1a(*seed, &request.question) % 16)
        }
    }
}

/// Answer a batch of requests. Request ids must be unique; responses come
/// back aligned with the requests.
pub fn query_model(
    adapter: &ModelAdapter,
    requests: &[ModelRequest],
) -> Result<Vec<ModelResponse>> {
    if requests.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut ids: HashSet<&str> = HashSet::new();
    for request in requests {
        if request.id.is_empty() {
            return Err(Error::invalid("request id must be non-empty"));
        }
        if !ids.insert(request.id.as_str()) {
            return Err(Error::invalid(format!("duplicate request id {:?}", request.id)));
        }
    }
    match adapter {
        ModelAdapter::External { argv } => query_external(argv, requests),
        _ => Ok(requests
            .iter()
            .map(|request| ModelResponse {
                id: request.id.clone(),
                answer: mock_answer(adapter, request),
            })
            .collect()),
    }
}

fn query_external(argv: &[String], requests: &[ModelRequest]) -> Result<Vec<ModelResponse>> {
    if argv.is_empty() {
        return Err(Error::invalid("external adapter command is empty"));
    }
    let dir = tempfile::tempdir()?;
    let request_path = dir.path().join("requests.jsonl");
    let response_path = dir.path().join("responses.jsonl");
    crate::io::write_jsonl(&request_path, requests)?;

    let output = Command::new(&argv[0])
        .args(&argv[1..])
        .arg(&request_path)
        .arg(&response_path)
        .output()
        .map_err(|e| Error::Adapter(format!("failed to launch {:?}: {e}", argv[0])))?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        let tail: String = stderr.chars().rev().take(400).collect::<Vec<_>>().into_iter().rev().collect();
        return Err(Error::Adapter(format!(
            "command exited with {}: {}",
            output.status,
            tail.trim()
        )));
    }

    if !response_path.exists() {
        return Err(Error::Adapter("adapter wrote no response file".into()));
    }
    let responses: Vec<ModelResponse> = crate::io::read_jsonl(&response_path)
        .map_err(|e| Error::Adapter(format!("bad response file: {e}")))?;

    let mut by_id: HashMap<&str, &str> = HashMap::new();
    for response in &responses {
        if by_id.insert(&response.id, &response.answer).is_some() {
            return Err(Error::Adapter(format!("id {:?} answered twice", response.id)));
        }
    }
    let expected: HashSet<&str> = requests.iter().map(|r| r.id.as_str()).collect();
    for id in by_id.keys() {
        if !expected.contains(id) {
            return Err(Error::Adapter(format!("unexpected id {id:?} in response")));
        }
    }
    requests
        .iter()
        .map(|request| {
            by_id
                .get(request.id.as_str())
                .map(|answer| ModelResponse {
                    id: request.id.clone(),
                    answer: (*answer).to_owned(),
                })
                .ok_or_else(|| Error::Adapter(format!("no answer for id {:?}", request.id)))
        })
        .collect()
}

/// How an answer is scored against the gold answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AccuracyKind {
    /// Consensus scoring: `min(matching gold answers / 3, 1)`.
    #[default]
    Vqa,
    /// 1 if the answer equals the first gold answer, else 0. Meant for
    /// single-gold datasets, where consensus scoring would cap at 1/3.
    Exact,
}

impl AccuracyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AccuracyKind::Vqa => "vqa",
            AccuracyKind::Exact => "exact",
        }
    }
}

impl fmt::Display for AccuracyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccuracyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vqa" => Ok(AccuracyKind::Vqa),
            "exact" => Ok(AccuracyKind::Exact),
            other => Err(Error::invalid(format!("unknown accuracy kind {other:?}"))),
        }
    }
}

fn record_score(kind: AccuracyKind, answer: &str, golds: &[String]) -> f64 {
    let answer = normalize(answer);
    match kind {
        AccuracyKind::Vqa => {
            let matches = golds.iter().filter(|g| normalize(g) == answer).count();
            (matches as f64 / 3.0).min(1.0)
        }
        AccuracyKind::Exact => {
            if golds.first().map(|g| normalize(g)) == Some(answer) {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Mean per-record accuracy. Answers and gold lists are parallel slices.
pub fn accuracy(kind: AccuracyKind, answers: &[String], golds: &[Vec<String>]) -> Result<f64> {
    if answers.len() != golds.len() {
        return Err(Error::invalid(format!(
            "{} answers against {} gold lists",
            answers.len(),
            golds.len()
        )));
    }
    if answers.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let total: f64 = answers
        .iter()
        .zip(golds)
        .map(|(answer, gold)| record_score(kind, answer, gold))
        .sum();
    Ok(total / answers.len() as f64)
}

/// Consensus (VQA-style) accuracy: each record scores
/// `min(matching gold answers / 3, 1)`.
pub fn vqa_accuracy(answers: &[String], golds: &[Vec<String>]) -> Result<f64> {
    accuracy(AccuracyKind::Vqa, answers, golds)
}

/// Strict accuracy: each record scores 1 only if the normalized answer
/// equals the normalized first gold answer.
pub fn exact_match_accuracy(answers: &[String], golds: &[Vec<String>]) -> Result<f64> {
    accuracy(AccuracyKind::Exact, answers, golds)
}

/// Robustness of a noisy accuracy against the clean baseline:
/// `clamp(1 - (max(0, clean - noisy) / clean) / tolerance, 0, 1)`.
/// Undefined when clean accuracy is 0.
pub fn r_score(acc_clean: f64, acc_noisy: f64, tolerance: f64) -> Result<f64> {
    for (name, value) in [("clean", acc_clean), ("noisy", acc_noisy)] {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!(
                "{name} accuracy must be in [0, 1], got {value}"
            )));
        }
    }
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::invalid(format!(
            "tolerance must be finite and positive, got {tolerance}"
        )));
    }
    if acc_clean == 0.0 {
        return Err(Error::UndefinedRobustness);
    }
    let drop = (acc_clean - acc_noisy).max(0.0) / acc_clean;
    Ok((1.0 - drop / tolerance).clamp(0.0, 1.0))
}

/// Accuracy and robustness at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub accuracy: f64,
    pub r_score: f64,
    pub n_records: usize,
}

/// The outcome of one robustness experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    /// Ranking method the noise came from.
    pub method: String,
    pub accuracy_kind: String,
    pub tolerance: f64,
    /// Main questions scored at every level.
    pub n_mqs: usize,
    /// Main questions dropped for missing gold answers, rankings, or levels.
    pub n_skipped: usize,
    pub acc_clean: f64,
    /// False when the adapter failed partway and later levels are absent.
    pub complete: bool,
    pub levels: Vec<LevelReport>,
}

/// One answered record, kept for per-record inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordAnswer {
    pub mq_id: String,
    pub answer: String,
}

/// A report plus every per-record answer, keyed by level (level 0 is clean).
///
/// When the adapter fails at a noisy level, the levels already evaluated
/// are kept, the report is marked incomplete, and the error lands in
/// `failure` instead of aborting the whole experiment.
#[derive(Debug)]
pub struct ExperimentResult {
    pub report: RobustnessReport,
    pub answers_by_level: BTreeMap<usize, Vec<RecordAnswer>>,
    pub failure: Option<Error>,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub accuracy: AccuracyKind,
    pub tolerance: f64,
    /// Method label to carry into the report.
    pub method: String,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            accuracy: AccuracyKind::Vqa,
            tolerance: DEFAULT_TOLERANCE,
            method: String::new(),
        }
    }
}

/// Score pre-built noisy questions against their gold answers.
///
/// The record set must include level 0 (the clean questions). Only main
/// questions that appear at every level present and have gold answers are
/// scored, so every level's accuracy is computed over the same records;
/// the rest are counted as skipped. The adapter is called once per level.
pub fn evaluate_noisy(
    adapter: &ModelAdapter,
    noisy: &[NoisyQuestion],
    mqs: &[MqRecord],
    options: &EvalOptions,
) -> Result<ExperimentResult> {
    if noisy.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let golds: HashMap<&str, &Vec<String>> = mqs
        .iter()
        .filter_map(|mq| {
            mq.answers
                .as_ref()
                .filter(|a| !a.is_empty())
                .map(|a| (mq.id.as_str(), a))
        })
        .collect();

    let mut by_level: BTreeMap<usize, HashMap<&str, &NoisyQuestion>> = BTreeMap::new();
    for record in noisy {
        let level = by_level.entry(record.level).or_default();
        if level.insert(record.mq_id.as_str(), record).is_some() {
            return Err(Error::invalid(format!(
                "duplicate record for mq_id {:?} at level {}",
                record.mq_id, record.level
            )));
        }
    }
    let clean = by_level
        .get(&0)
        .ok_or_else(|| Error::invalid("no clean (level 0) records to baseline against"))?;

    let candidates: BTreeSet<&str> = clean.keys().copied().collect();
    let eligible: Vec<&str> = candidates
        .iter()
        .copied()
        .filter(|id| golds.contains_key(id) && by_level.values().all(|m| m.contains_key(id)))
        .collect();
    if eligible.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let n_skipped = candidates.len() - eligible.len();
    let gold_lists: Vec<Vec<String>> =
        eligible.iter().map(|id| golds[id].clone()).collect();

    let mut acc_clean = 0.0;
    let mut levels = Vec::new();
    let mut answers_by_level = BTreeMap::new();
    let mut failure = None;
    for (&level, records) in &by_level {
        let requests: Vec<ModelRequest> = eligible
            .iter()
            .map(|id| {
                let record = records[id];
                ModelRequest {
                    id: record.mq_id.clone(),
                    image_id: record.image_id.clone(),
                    question: record.text.clone(),
                }
            })
            .collect();
        // without a clean baseline nothing can be reported, but a failure
        // at a later level keeps what was already measured
        let responses = match query_model(adapter, &requests) {
            Ok(responses) => responses,
            Err(err) if level > 0 => {
                failure = Some(err);
                break;
            }
            Err(err) => return Err(err),
        };
        let answers: Vec<String> = responses.iter().map(|r| r.answer.clone()).collect();
        let acc = accuracy(options.accuracy, &answers, &gold_lists)?;
        if level == 0 {
            acc_clean = acc;
        } else {
            levels.push((level, acc));
        }
        answers_by_level.insert(
            level,
            responses
                .into_iter()
                .map(|r| RecordAnswer { mq_id: r.id, answer: r.answer })
                .collect(),
        );
    }

    let levels = levels
        .into_iter()
        .map(|(level, acc)| {
            Ok(LevelReport {
                level,
                accuracy: acc,
                r_score: r_score(acc_clean, acc, options.tolerance)?,
                n_records: eligible.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentResult {
        report: RobustnessReport {
            method: options.method.clone(),
            accuracy_kind: options.accuracy.as_str().to_owned(),
            tolerance: options.tolerance,
            n_mqs: eligible.len(),
            n_skipped,
            acc_clean,
            complete: failure.is_none(),
            levels,
        },
        answers_by_level,
        failure,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub group_size: usize,
    /// Deepest level to run; defaults to the deepest level every ranking
    /// supports.
    pub max_level: Option<usize>,
    pub accuracy: AccuracyKind,
    pub tolerance: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            group_size: 3,
            max_level: None,
            accuracy: AccuracyKind::Vqa,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Generate graded noise from rankings and score it end to end.
///
/// A main question takes part only if it has a ranking deep enough for
/// every level and gold answers; others are counted as skipped.
pub fn run_experiment(
    mqs: &[MqRecord],
    rankings: &[RankedBQD],
    adapter: &ModelAdapter,
    options: &ExperimentOptions,
) -> Result<ExperimentResult> {
    if options.group_size == 0 {
        return Err(Error::invalid("group_size must be at least 1"));
    }
    if mqs.is_empty() || rankings.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut by_mq: HashMap<&str, &RankedBQD> = HashMap::new();
    for ranked in rankings {
        if by_mq.insert(ranked.mq_id.as_str(), ranked).is_some() {
            return Err(Error::invalid(format!("duplicate ranking for {:?}", ranked.mq_id)));
        }
    }

    let deepest = match options.max_level {
        Some(level) => level,
        None => rankings
            .iter()
            .map(|r| max_level(r, options.group_size))
            .min()
            .unwrap_or(0),
    };
    if deepest == 0 {
        return Err(Error::invalid(
            "no complete noise level: rankings are shallower than one group",
        ));
    }

    let mut noisy = Vec::new();
    let mut methods: BTreeSet<&str> = BTreeSet::new();
    let mut n_used = 0usize;
    for mq in mqs {
        let Some(ranked) = by_mq.get(mq.id.as_str()) else { continue };
        let has_gold = mq.answers.as_ref().is_some_and(|a| !a.is_empty());
        if !has_gold || max_level(ranked, options.group_size) < deepest {
            continue;
        }
        for level in 0..=deepest {
            noisy.push(noisy_question(mq, ranked, level, options.group_size)?);
        }
        methods.insert(ranked.method.as_str());
        n_used += 1;
    }
    if n_used == 0 {
        return Err(Error::EmptyRecords);
    }
    let method = if methods.len() == 1 {
        methods.first().unwrap().to_string()
    } else {
        "mixed".to_owned()
    };

    let eval_options = EvalOptions {
        accuracy: options.accuracy,
        tolerance: options.tolerance,
        method,
    };
    let mut result = evaluate_noisy(adapter, &noisy, mqs, &eval_options)?;
    result.report.n_skipped = mqs.len() - n_used;
    Ok(result)
}

/// Write a report as pretty-printed JSON.
pub fn write_report_json(path: &Path, report: &RobustnessReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Write a report as CSV with one row per level; level 0 is the clean
/// baseline with a robustness of 1 by definition.
pub fn write_report_csv(path: &Path, report: &RobustnessReport) -> Result<()> {
    let mut text = String::from("level,acc,r_score,n_records\n");
    text.push_str(&format!("0,{},{},{}\n", report.acc_clean, 1.0, report.n_mqs));
    for level in &report.levels {
        text.push_str(&format!(
            "{},{},{},{}\n",
            level.level, level.accuracy, level.r_score, level.n_records
        ));
    }
    fs::write(path, text)?;
    Ok(())
}
