//! Parsing of `--model` strings into adapters.
//!
//! - `cmd:<command and args>`: external subprocess, split on whitespace.
//! - `mock:constant:<answer>`: always the same answer.
//! - `mock:lookup:<file>`: JSONL of `{"id", "answer"}`, keyed by request id.
//! - `mock:prefix[:<file>]`: answers from the question prefix before the
//!   first '?'; with a file (JSONL of `{"question", "answer"}`) the prefix
//!   is looked up, without one it is echoed back.
//! - `mock:hash[:<seed>]`: seeded hash of the full question text.

use crate::CliError;
use robustqa_core::{prefix_key, Error, ModelAdapter, ModelResponse};
use serde::Deserialize;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

#[derive(Deserialize)]
struct PrefixPair {
    question: String,
    answer: String,
}

pub fn parse_model(text: &str) -> Result<ModelAdapter, CliError> {
    if let Some(rest) = text.strip_prefix("cmd:") {
        let argv: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
        if argv.is_empty() {
            return Err(CliError::usage("cmd: model needs a command to run"));
        }
        return Ok(ModelAdapter::External { argv });
    }
    let Some(rest) = text.strip_prefix("mock:") else {
        return Err(CliError::usage(format!(
            "model {text:?} must start with cmd: or mock:"
        )));
    };
    if let Some(answer) = rest.strip_prefix("constant:") {
        if answer.is_empty() {
            return Err(CliError::usage("mock:constant: needs an answer"));
        }
        Ok(ModelAdapter::MockConstant { answer: answer.to_owned() })
    } else if let Some(path) = rest.strip_prefix("lookup:") {
        Ok(ModelAdapter::MockLookup {
            answers: load_lookup(Path::new(path))?,
            default: robustqa_core::DEFAULT_ANSWER.to_owned(),
        })
    } else if rest == "prefix" {
        Ok(ModelAdapter::MockPrefix { answers: None })
    } else if let Some(path) = rest.strip_prefix("prefix:") {
        Ok(ModelAdapter::MockPrefix { answers: Some(load_prefix_map(Path::new(path))?) })
    } else if rest == "hash" {
        Ok(ModelAdapter::MockHash { seed: 0 })
    } else if let Some(seed) = rest.strip_prefix("hash:") {
        let seed = seed
            .parse()
            .map_err(|e| CliError::usage(format!("mock:hash: bad seed {seed:?}: {e}")))?;
        Ok(ModelAdapter::MockHash { seed })
    } else {
        Err(CliError::usage(format!(
            "unknown mock model {rest:?} (expected constant:<answer>, lookup:<file>, \
             prefix[:<file>], or hash[:<seed>])"
        )))
    }
}

fn parse_answer_lines<T: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<Vec<(usize, T)>, CliError> {
    let contents = fs::read_to_string(path).map_err(Error::from)?;
    let mut records = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line)
            .map_err(|e| Error::Parse { path: path.into(), line: lineno, message: e.to_string() })?;
        records.push((lineno, record));
    }
    Ok(records)
}

fn load_lookup(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let mut answers = HashMap::new();
    for (lineno, response) in parse_answer_lines::<ModelResponse>(path)? {
        if answers.insert(response.id.clone(), response.answer).is_some() {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno,
                message: format!("duplicate id {:?}", response.id),
            }
            .into());
        }
    }
    Ok(answers)
}

fn load_prefix_map(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let mut answers = HashMap::new();
    for (lineno, pair) in parse_answer_lines::<PrefixPair>(path)? {
        let key = prefix_key(&pair.question);
        if answers.insert(key, pair.answer).is_some() {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno,
                message: format!(
                    "question {:?} repeats an earlier prefix",
                    pair.question
                ),
            }
            .into());
        }
    }
    Ok(answers)
}
