//! The four subcommands.
//!
//! Each command resolves its options (flags over config over defaults) and
//! validates them before reading any input, and reads and validates all
//! inputs before writing any output. Skippable per-record problems are
//! warned to stderr and only escalate to exit 4 under `--strict`.

use crate::config::{resolve, resolve_opt, Config};
use crate::model::parse_model;
use crate::{CliError, CompareArgs, EvalArgs, NoiseArgs, RankArgs};
use robustqa_core::{
    build_ranked_bqd, evaluate_noisy, kendall_tau, load_external, max_level, noisy_question,
    pool_to_questions, read_mq_file, read_noisy_file, read_pool_file, read_ranked_file,
    write_jsonl, write_report_csv, write_report_json, AccuracyKind, Encoder, Error, EvalOptions,
    MqRecord, RankOptions, RankedBQD, RankingMethod, DEFAULT_TOLERANCE,
};
use std::collections::{BTreeSet, HashMap, HashSet};

fn parse_flag<T>(value: Option<&str>, flag: &str) -> Result<Option<T>, CliError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    match value {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|e| CliError::usage(format!("--{flag} {raw:?}: {e}"))),
    }
}

fn run_in_pool<T: Send>(
    jobs: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match jobs {
        None => Ok(work()),
        Some(0) => Err(CliError::usage("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

pub fn cmd_rank(args: RankArgs) -> Result<i32, CliError> {
    let config = Config::load(
        args.config.as_deref(),
        &["method", "top-k", "lambda-ratio", "jobs"],
    )?;
    let method: RankingMethod = resolve(
        parse_flag(args.method.as_deref(), "method")?,
        config.get_parsed("method")?,
        RankingMethod::Lasso,
    );
    let top_k = resolve(args.top_k, config.get_parsed("top-k")?, 21);
    let lambda_ratio = resolve(args.lambda_ratio, config.get_parsed("lambda-ratio")?, 0.1);
    let jobs = resolve_opt(args.jobs, config.get_parsed("jobs")?);
    if jobs == Some(0) {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    if top_k == 0 {
        return Err(CliError::usage("--top-k must be at least 1"));
    }
    if !lambda_ratio.is_finite() || lambda_ratio <= 0.0 || lambda_ratio > 1.0 {
        return Err(CliError::usage(format!(
            "--lambda-ratio must be in (0, 1], got {lambda_ratio}"
        )));
    }
    if args.embeddings.is_some() && method != RankingMethod::Lasso {
        return Err(CliError::usage("--embeddings applies only to the lasso method"));
    }

    let mqs = read_mq_file(&args.mq)?;
    let pool = pool_to_questions(&read_pool_file(&args.pool)?)?;
    let encoder: Option<Encoder> =
        args.embeddings.as_deref().map(load_external).transpose()?;

    let options = RankOptions { top_k, lambda_ratio, ..RankOptions::default() };
    let outcomes = run_in_pool(jobs, || {
        build_ranked_bqd(&mqs, &pool, method, encoder.as_ref(), &options)
    })??;

    let mut rankings: Vec<RankedBQD> = Vec::with_capacity(outcomes.len());
    let mut skipped = 0usize;
    for outcome in outcomes {
        match outcome.result {
            Ok(ranked) => rankings.push(ranked),
            Err(err) => {
                eprintln!("warning: skipping main question {:?}: {err}", outcome.mq_id);
                skipped += 1;
            }
        }
    }
    if rankings.is_empty() {
        eprintln!("error: every main question failed to rank");
        return Ok(2);
    }
    write_jsonl(&args.out, &rankings)?;
    println!(
        "ranked {} main questions with {} (top {top_k}), skipped {skipped}",
        rankings.len(),
        method
    );
    Ok(if skipped > 0 && args.strict { 4 } else { 0 })
}

pub fn cmd_noise(args: NoiseArgs) -> Result<i32, CliError> {
    let config = Config::load(args.config.as_deref(), &["group-size", "levels"])?;
    let group_size = resolve(args.group_size, config.get_parsed("group-size")?, 3);
    let levels = resolve_opt(args.levels, config.get_parsed("levels")?);
    if group_size == 0 {
        return Err(CliError::usage("--group-size must be at least 1"));
    }
    if levels == Some(0) {
        return Err(CliError::usage("--levels must be at least 1"));
    }

    let mqs = read_mq_file(&args.mq)?;
    let rankings = read_ranked_file(&args.ranked)?;
    let by_mq: HashMap<&str, &RankedBQD> =
        rankings.iter().map(|r| (r.mq_id.as_str(), r)).collect();
    let mq_ids: HashSet<&str> = mqs.iter().map(|m| m.id.as_str()).collect();
    for ranked in &rankings {
        if !mq_ids.contains(ranked.mq_id.as_str()) {
            eprintln!(
                "warning: ranking for {:?} has no main question record",
                ranked.mq_id
            );
        }
    }

    let mut skipped = 0usize;
    let mut paired: Vec<(&MqRecord, &RankedBQD)> = Vec::new();
    for mq in &mqs {
        match by_mq.get(mq.id.as_str()) {
            Some(ranked) => paired.push((mq, ranked)),
            None => {
                eprintln!("warning: main question {:?} has no ranking", mq.id);
                skipped += 1;
            }
        }
    }
    if paired.is_empty() {
        eprintln!("error: no main question has a ranking");
        return Ok(2);
    }
    let depth = match levels {
        Some(depth) => depth,
        None => paired
            .iter()
            .map(|(_, ranked)| max_level(ranked, group_size))
            .min()
            .unwrap_or(0),
    };
    if depth == 0 {
        return Err(CliError::usage(format!(
            "no complete noise level: every ranking has fewer than {group_size} entries"
        )));
    }

    let mut records = Vec::new();
    for (mq, ranked) in paired {
        let mut mine = Vec::with_capacity(depth + 1);
        let mut failed = false;
        for level in 0..=depth {
            match noisy_question(mq, ranked, level, group_size) {
                Ok(noisy) => mine.push(noisy),
                Err(err) => {
                    eprintln!("warning: skipping main question {:?}: {err}", mq.id);
                    skipped += 1;
                    failed = true;
                    break;
                }
            }
        }
        if !failed {
            records.extend(mine);
        }
    }
    if records.is_empty() {
        eprintln!("error: no noisy questions could be generated");
        return Ok(2);
    }
    write_jsonl(&args.out, &records)?;
    println!(
        "wrote {} records at levels 0..={depth} (group size {group_size}), skipped {skipped}",
        records.len()
    );
    Ok(if skipped > 0 && args.strict { 4 } else { 0 })
}

pub fn cmd_eval(args: EvalArgs) -> Result<i32, CliError> {
    let config = Config::load(
        args.config.as_deref(),
        &["model", "accuracy", "tolerance", "method-label"],
    )?;
    let model = resolve_opt(
        args.model.clone(),
        config.get_str("model").map(str::to_owned),
    )
    .ok_or_else(|| CliError::usage("--model is required (flag or config)"))?;
    let accuracy: AccuracyKind = resolve(
        parse_flag(args.accuracy.as_deref(), "accuracy")?,
        config.get_parsed("accuracy")?,
        AccuracyKind::Vqa,
    );
    let tolerance = resolve(args.tolerance, config.get_parsed("tolerance")?, DEFAULT_TOLERANCE);
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(CliError::usage(format!(
            "--tolerance must be positive, got {tolerance}"
        )));
    }
    let method = resolve(
        args.method_label.clone(),
        config.get_str("method-label").map(str::to_owned),
        "unspecified".to_owned(),
    );
    let adapter = parse_model(&model)?;

    let mqs = read_mq_file(&args.mq)?;
    let noisy = read_noisy_file(&args.noisy)?;
    let options = EvalOptions { accuracy, tolerance, method };
    let result = evaluate_noisy(&adapter, &noisy, &mqs, &options)?;
    let report = &result.report;

    println!(
        "clean accuracy {:.4} over {} main questions, skipped {}",
        report.acc_clean, report.n_mqs, report.n_skipped
    );
    for level in &report.levels {
        println!(
            "level {}: accuracy {:.4}, robustness {:.4}",
            level.level, level.accuracy, level.r_score
        );
    }
    // persist whatever was measured even when a later level failed
    if let Some(path) = &args.report_json {
        write_report_json(path, report)?;
    }
    if let Some(path) = &args.report_csv {
        write_report_csv(path, report)?;
    }
    if let Some(err) = result.failure {
        eprintln!("error: evaluation incomplete: {err}");
        return Ok(CliError::Core(err).exit_code());
    }
    Ok(if report.n_skipped > 0 && args.strict { 4 } else { 0 })
}

fn restrict(ranked: &RankedBQD, shared: &HashSet<&str>) -> RankedBQD {
    RankedBQD {
        mq_id: ranked.mq_id.clone(),
        method: ranked.method.clone(),
        top_k: ranked.top_k,
        entries: ranked
            .entries
            .iter()
            .filter(|e| shared.contains(e.bq_id.as_str()))
            .cloned()
            .collect(),
    }
}

/// Mean Kendall tau across main questions for one pair of ranking files.
/// Question pairs with fewer than two shared entries are excluded; the
/// count of exclusions comes back alongside the mean.
fn pair_tau(
    left: &HashMap<&str, &RankedBQD>,
    right: &HashMap<&str, &RankedBQD>,
    mq_ids: &BTreeSet<&str>,
) -> Result<(Option<f64>, usize), CliError> {
    let mut total = 0.0;
    let mut compared = 0usize;
    let mut skipped = 0usize;
    for id in mq_ids {
        let l = left[id];
        let r = right[id];
        let left_set: HashSet<&str> = l.entries.iter().map(|e| e.bq_id.as_str()).collect();
        let shared: HashSet<&str> = r
            .entries
            .iter()
            .map(|e| e.bq_id.as_str())
            .filter(|id| left_set.contains(id))
            .collect();
        if shared.len() < 2 {
            skipped += 1;
            continue;
        }
        total += kendall_tau(&restrict(l, &shared), &restrict(r, &shared))?;
        compared += 1;
    }
    let mean = (compared > 0).then(|| total / compared as f64);
    Ok((mean, skipped))
}

fn matrix_csv(labels: &[String], matrix: &[Vec<f64>]) -> String {
    let mut text = String::from("ranking");
    for label in labels {
        text.push(',');
        text.push_str(label);
    }
    text.push('\n');
    for (label, row) in labels.iter().zip(matrix) {
        text.push_str(label);
        for value in row {
            text.push(',');
            text.push_str(&value.to_string());
        }
        text.push('\n');
    }
    text
}

pub fn cmd_compare(args: CompareArgs) -> Result<i32, CliError> {
    let mut labels: Vec<String> = Vec::new();
    let mut files: Vec<Vec<RankedBQD>> = Vec::new();
    for path in &args.files {
        files.push(read_ranked_file(path)?);
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().replace(',', "_"))
            .unwrap_or_else(|| "ranking".to_owned());
        let mut label = stem.clone();
        let mut n = 2;
        while labels.contains(&label) {
            label = format!("{stem}#{n}");
            n += 1;
        }
        labels.push(label);
    }

    // every file must rank the same main questions
    let mq_ids: BTreeSet<&str> = files[0].iter().map(|r| r.mq_id.as_str()).collect();
    for (path, rankings) in args.files.iter().zip(&files).skip(1) {
        let ids: BTreeSet<&str> = rankings.iter().map(|r| r.mq_id.as_str()).collect();
        if ids != mq_ids {
            eprintln!(
                "error: {} ranks a different main question set than {}",
                path.display(),
                args.files[0].display()
            );
            return Err(CliError::Core(Error::MismatchedIdSets {
                only_left: mq_ids.difference(&ids).map(|s| s.to_string()).collect(),
                only_right: ids.difference(&mq_ids).map(|s| s.to_string()).collect(),
            }));
        }
    }
    let by_mq: Vec<HashMap<&str, &RankedBQD>> = files
        .iter()
        .map(|rankings| rankings.iter().map(|r| (r.mq_id.as_str(), r)).collect())
        .collect();

    let n = files.len();
    let mut matrix = vec![vec![0.0f64; n]; n];
    let mut any_skipped = false;
    for i in 0..n {
        for j in i..n {
            let (mean, skipped) = pair_tau(&by_mq[i], &by_mq[j], &mq_ids)?;
            if skipped > 0 {
                any_skipped = true;
                eprintln!(
                    "warning: {} vs {}: {skipped} main questions share fewer than \
                     two entries and were excluded",
                    labels[i], labels[j]
                );
            }
            let Some(mean) = mean else {
                eprintln!("error: {} and {} share nothing to correlate", labels[i], labels[j]);
                return Ok(2);
            };
            matrix[i][j] = mean;
            matrix[j][i] = mean;
        }
    }

    let csv = matrix_csv(&labels, &matrix);
    print!("{csv}");
    if let Some(path) = &args.out {
        std::fs::write(path, &csv).map_err(robustqa_core::Error::from)?;
    }
    eprintln!("compared {n} rankings over {} main questions", mq_ids.len());
    Ok(if any_skipped && args.strict { 4 } else { 0 })
}
