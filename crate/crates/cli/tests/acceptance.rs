//! Acceptance gate: one test per release criterion, each printing a
//! single pass/fail line. Run with `--nocapture` to see the lines on
//! success; on failure the line is shown with the panic message.
//!
//! The LASSO checks compare against an ISTA solver written from scratch
//! in this file, on its own dense matrix type, so a shared bug in the
//! library cannot vouch for itself.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robustqa_core::{
    accuracy, build_ranked_bqd, compute_idf, fit_tfidf, kendall_tau, max_level, noisy_question,
    query_model, r_score, rank, run_experiment, score, select_level, solve_lasso, AccuracyKind,
    ExperimentOptions, LassoProblem, MetricName, ModelAdapter, ModelRequest, MqRecord, Question,
    RankOptions, RankedBQD, RankingMethod, SolveOptions, Vector,
};

fn criterion<F: FnOnce()>(name: &str, body: F) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("{name}: pass"),
        Err(payload) => {
            println!("{name}: fail");
            resume_unwind(payload);
        }
    }
}

fn q(id: &str, text: &str) -> Question {
    Question::new(id, text).unwrap()
}

fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} within {tol}"
    );
}

// ---------------------------------------------------------------------------
// reference ISTA solver, self-contained

/// Largest eigenvalue of AtA by power iteration, padded 1 percent.
fn lipschitz(columns: &[Vec<f64>]) -> f64 {
    let dim = columns[0].len();
    let mut v: Vec<f64> = (0..columns.len()).map(|i| 1.0 + (i as f64).sin()).collect();
    let mut eig = 0.0;
    for _ in 0..300 {
        // w = A v, u = At w
        let mut w = vec![0.0; dim];
        for (x, col) in v.iter().zip(columns) {
            for (wi, ci) in w.iter_mut().zip(col) {
                *wi += x * ci;
            }
        }
        let u: Vec<f64> = columns
            .iter()
            .map(|col| col.iter().zip(&w).map(|(c, wi)| c * wi).sum())
            .collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        eig = norm;
        v = u.into_iter().map(|x| x / norm).collect();
    }
    eig * 1.01
}

fn residual(columns: &[Vec<f64>], b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = b.to_vec();
    for (xj, col) in x.iter().zip(columns) {
        if *xj != 0.0 {
            for (ri, ci) in r.iter_mut().zip(col) {
                *ri -= xj * ci;
            }
        }
    }
    r
}

fn objective(columns: &[Vec<f64>], b: &[f64], x: &[f64], lambda: f64) -> f64 {
    let r = residual(columns, b, x);
    0.5 * r.iter().map(|v| v * v).sum::<f64>() + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

fn soft(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn ista(columns: &[Vec<f64>], b: &[f64], lambda: f64, iters: usize) -> Vec<f64> {
    let step = 1.0 / lipschitz(columns);
    let mut x = vec![0.0; columns.len()];
    for _ in 0..iters {
        let r = residual(columns, b, &x);
        for (xj, col) in x.iter_mut().zip(columns) {
            let grad: f64 = col.iter().zip(&r).map(|(c, ri)| c * ri).sum();
            *xj = soft(*xj + step * grad, step * lambda);
        }
    }
    x
}

/// Stationarity violation of the LASSO subgradient conditions.
fn kkt(columns: &[Vec<f64>], b: &[f64], x: &[f64], lambda: f64) -> f64 {
    let r = residual(columns, b, x);
    let mut worst = 0.0f64;
    for (xj, col) in x.iter().zip(columns) {
        let corr: f64 = col.iter().zip(&r).map(|(c, ri)| c * ri).sum();
        let violation = if *xj == 0.0 {
            (corr.abs() - lambda).max(0.0)
        } else {
            (corr - lambda * xj.signum()).abs()
        };
        worst = worst.max(violation);
    }
    worst
}

// ---------------------------------------------------------------------------
// synthetic corpora

const SUBJECTS: [&str; 10] = [
    "man", "woman", "dog", "cat", "bird", "child", "horse", "player", "rider", "vendor",
];
const VERBS: [&str; 10] = [
    "walking", "running", "sleeping", "eating", "jumping", "standing", "sitting", "playing",
    "waiting", "resting",
];
const PLACES: [&str; 20] = [
    "park", "beach", "station", "market", "field", "bridge", "fountain", "bench", "car",
    "fence", "tree", "door", "window", "river", "road", "sign", "table", "kiosk", "tower",
    "garden",
];
const COLORS: [&str; 5] = ["red", "blue", "green", "yellow", "white"];

/// 2,000 basic questions covering every subject, verb, place combination.
fn pool_2000() -> Vec<Question> {
    let mut pool = Vec::with_capacity(2000);
    for (i, subject) in SUBJECTS.iter().enumerate() {
        for (j, verb) in VERBS.iter().enumerate() {
            for (k, place) in PLACES.iter().enumerate() {
                let id = format!("bq{:04}", (i * VERBS.len() + j) * PLACES.len() + k);
                pool.push(q(&id, &format!("Is the {subject} {verb} near the {place}?")));
            }
        }
    }
    pool
}

/// 10,000 basic questions: the 2,000 base forms in five color variants.
fn pool_10000() -> Vec<Question> {
    let mut pool = Vec::with_capacity(10_000);
    let mut n = 0;
    for color in COLORS {
        for subject in SUBJECTS {
            for verb in VERBS {
                for place in PLACES {
                    pool.push(q(
                        &format!("bq{n:05}"),
                        &format!("Is the {color} {subject} {verb} near the {place}?"),
                    ));
                    n += 1;
                }
            }
        }
    }
    pool
}

/// 100 main questions that share the pool vocabulary but match no pool
/// entry verbatim.
fn mqs_100() -> Vec<MqRecord> {
    let mut mqs = Vec::with_capacity(100);
    for i in 0..100usize {
        let subject = SUBJECTS[i % SUBJECTS.len()];
        let verb = VERBS[(i / SUBJECTS.len()) % VERBS.len()];
        let place = PLACES[(i * 7 + 3) % PLACES.len()];
        mqs.push(MqRecord {
            id: format!("mq{i:03}"),
            image_id: format!("img{i:03}"),
            question: format!("Is the {subject} {verb} near the {place} today?"),
            answers: Some(vec!["yes".into(), "yes".into(), "yes".into()]),
        });
    }
    mqs
}

fn write_jsonl_records(path: &Path, records: &[serde_json::Value]) {
    let mut text = String::new();
    for record in records {
        writeln!(text, "{record}").unwrap();
    }
    std::fs::write(path, text).unwrap();
}

// ---------------------------------------------------------------------------
// criteria

#[test]
fn criterion_1_metric_oracles() {
    criterion("criterion 1 (hand-checked metric values)", || {
        let start = Instant::now();

        let cand = q("c", "the cat sat");
        let refr = q("r", "the cat sat on the mat");
        // every candidate n-gram occurs in the reference, so precision is
        // 1 and only brevity remains: exp(1 - 6/3)
        let bp = (1.0f64 - 6.0 / 3.0).exp();
        for method in [MetricName::Bleu1, MetricName::Bleu2, MetricName::Bleu3] {
            let got = score(method, &cand, &refr, None).unwrap();
            assert_close(got.value(), bp, 1e-12, &format!("{method} brevity"));
        }

        // clipping: "the" matches at most once
        let stutter = q("c", "the the the");
        let got = score(MetricName::Bleu1, &stutter, &q("r", "the cat"), None).unwrap();
        assert_close(got.value(), 1.0 / 3.0, 1e-12, "bleu1 clipped");

        // ROUGE-L with LCS 2 of 2 and 3: P = 1, R = 2/3, beta = 1.2
        let got = score(MetricName::Rouge, &q("c", "the cat"), &q("r", "the dog cat"), None)
            .unwrap();
        let want = (1.0 + 1.44) * (2.0 / 3.0) / ((2.0 / 3.0) + 1.44);
        assert_close(got.value(), want, 1e-12, "rouge");

        // METEOR: all matched in one chunk, P = 1, R = 1/2
        let got = score(MetricName::Meteor, &cand, &refr, None).unwrap();
        let f = 10.0 * 1.0 * 0.5 / (0.5 + 9.0);
        let want = f * (1.0 - 0.5 * (1.0f64 / 3.0).powi(3));
        assert_close(got.value(), want, 1e-12, "meteor");

        // a full swap keeps P = R = 1 but splits the matches in two chunks
        let got = score(MetricName::Meteor, &q("c", "a b"), &q("r", "b a"), None).unwrap();
        assert_eq!(got.value(), 0.5, "meteor swap");

        // CIDEr: only "x" is shared, and only the unigram cosine is
        // nonzero, so the score is cos / 4 with hand-built idf weights
        let corpus = [q("d1", "x y"), q("d2", "x z"), q("d3", "w")];
        let idf = compute_idf(&corpus, 4).unwrap();
        let ix = (4.0f64 / 3.0).ln();
        let iy = (4.0f64 / 2.0).ln();
        let cos = ix * ix / (ix * ix + iy * iy);
        let got = score(MetricName::Cider, &corpus[0], &corpus[1], Some(&idf)).unwrap();
        assert_close(got.value(), cos / 4.0, 1e-12, "cider");

        // identity scores exactly 1 for every metric except METEOR,
        // whose fragmentation penalty leaves 1 - 0.5 / m^3 for m tokens
        let this = q("c", "is the man walking near the park");
        let other = q("d", "zebras graze quietly");
        let idf = compute_idf(&[this.clone(), other], 4).unwrap();
        for method in MetricName::ALL {
            let got = score(method, &this, &this, Some(&idf)).unwrap();
            if method == MetricName::Meteor {
                assert_close(got.value(), 1.0 - 0.5 / 343.0, 1e-12, "meteor identity");
            } else {
                assert_eq!(got.value(), 1.0, "{method} identity");
            }
        }

        // empty candidate or reference scores 0, never an error
        let empty = q("e", "???");
        for method in MetricName::ALL {
            assert_eq!(score(method, &empty, &this, Some(&idf)).unwrap().value(), 0.0);
            assert_eq!(score(method, &this, &empty, Some(&idf)).unwrap().value(), 0.0);
        }

        assert!(start.elapsed() < Duration::from_secs(1), "budget exceeded");
    });
}

#[test]
fn criterion_2_metric_ranges() {
    criterion("criterion 2 (10,000 random pairs stay in [0, 1])", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let words = [
            "the", "a", "is", "man", "dog", "red", "ball", "park", "walking", "near", "on",
            "cat", "tree", "holding", "wearing", "two", "small", "large", "left", "right",
        ];
        let sentence = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..12);
            (0..len)
                .map(|_| words[rng.gen_range(0..words.len())])
                .collect::<Vec<_>>()
                .join(" ")
        };

        let corpus: Vec<Question> = (0..200)
            .map(|i| q(&format!("d{i}"), &sentence(&mut rng)))
            .collect();
        let idf = compute_idf(&corpus, 4).unwrap();

        for i in 0..10_000 {
            let cand = q("c", &sentence(&mut rng));
            let refr = if i % 100 == 0 {
                cand.clone()
            } else {
                q("r", &sentence(&mut rng))
            };
            for method in MetricName::ALL {
                let got = score(method, &cand, &refr, Some(&idf)).unwrap().value();
                assert!(
                    got.is_finite() && (0.0..=1.0).contains(&got),
                    "{method} out of range: {got} for {:?} vs {:?}",
                    cand.text(),
                    refr.text()
                );
            }
        }

        assert!(start.elapsed() < Duration::from_secs(10), "budget exceeded");
    });
}

#[test]
fn criterion_3_lasso_matches_reference_solver() {
    criterion("criterion 3 (LASSO agrees with reference ISTA)", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let options = SolveOptions::default();
        let ratios = [0.05, 0.1, 0.5];

        for case in 0..200 {
            let dim = rng.gen_range(6..=20);
            let p = rng.gen_range(10..=40);
            let dense: Vec<Vec<f64>> = (0..p)
                .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();

            let columns: Vec<Vector> =
                dense.iter().map(|c| Vector::from_dense(c).unwrap()).collect();
            let problem = LassoProblem::new(columns, b.clone()).unwrap();
            let lambda_max = problem.lambda_max();
            let lambda = ratios[case % ratios.len()] * lambda_max;

            let solution = solve_lasso(&problem, lambda, &options).unwrap();
            assert!(solution.converged, "case {case} did not converge");

            // the reference disagrees with the library by at most 1e-6
            // in objective value, and stationarity holds to 1e-5
            let obj_ista = objective(&dense, &b, &ista(&dense, &b, lambda, 4000), lambda);
            let obj_cd = objective(&dense, &b, &solution.coefficients, lambda);
            assert!(
                obj_cd <= obj_ista + 1e-6,
                "case {case}: objective {obj_cd} above reference {obj_ista}"
            );
            assert!(
                kkt(&dense, &b, &solution.coefficients, lambda) <= 1e-5,
                "case {case}: stationarity violated"
            );

            // at or above lambda_max the zero vector is optimal, exactly
            for factor in [1.0, 1.5] {
                let solution = solve_lasso(&problem, factor * lambda_max, &options).unwrap();
                assert!(solution.coefficients.iter().all(|&x| x == 0.0));
            }

            // shrinking lambda never shrinks the l1 norm of the solution
            let mut last_l1 = 0.0;
            for ratio in [1.0, 0.5, 0.1, 0.05] {
                let solution =
                    solve_lasso(&problem, ratio * lambda_max, &options).unwrap();
                let l1: f64 = solution.coefficients.iter().map(|x| x.abs()).sum();
                assert!(
                    l1 >= last_l1 - 1e-8,
                    "case {case}: l1 fell from {last_l1} to {l1} at ratio {ratio}"
                );
                last_l1 = l1;
            }
        }

        assert!(start.elapsed() < Duration::from_secs(60), "budget exceeded");
    });
}

#[test]
fn criterion_4_copy_ranks_first_everywhere() {
    criterion("criterion 4 (verbatim copy ranks first, tau sane)", || {
        let mq = q("mq0", "Is the vendor resting near the kiosk at noon?");
        let mut pool: Vec<Question> = pool_2000().into_iter().take(60).collect();
        pool.push(q("copy", mq.text()));

        let encoder = fit_tfidf(&pool, Default::default()).unwrap();
        let idf = compute_idf(&pool, 4).unwrap();
        let options = RankOptions { top_k: 10, ..RankOptions::default() };

        for method in RankingMethod::ALL {
            let ranked = rank(&mq, &pool, method, Some(&encoder), Some(&idf), &options).unwrap();
            assert_eq!(
                ranked.entries[0].bq_id, "copy",
                "{method} ranked {:?} first",
                ranked.entries[0]
            );
            if method == RankingMethod::Metric(MetricName::Meteor) {
                assert!(ranked.entries[0].score > 0.99, "{method} top score");
            } else {
                assert_eq!(ranked.entries[0].score, 1.0, "{method} top score");
            }
            assert_eq!(ranked.entries.len(), 10);

            // agreement with itself is total, with its reverse inverted
            assert_eq!(kendall_tau(&ranked, &ranked).unwrap(), 1.0);
            let mut reversed = ranked.clone();
            reversed.entries.reverse();
            assert_eq!(kendall_tau(&ranked, &reversed).unwrap(), -1.0);
        }
    });
}

#[test]
fn criterion_5_levels_partition_top_ranks() {
    criterion("criterion 5 (noise levels partition the top 21)", || {
        let pool = pool_2000();
        let mqs = mqs_100();
        let options = RankOptions::default();
        let outcomes = build_ranked_bqd(
            &mqs,
            &pool,
            RankingMethod::Metric(MetricName::Rouge),
            None,
            &options,
        )
        .unwrap();

        for (mq, outcome) in mqs.iter().zip(&outcomes) {
            let ranked = outcome.result.as_ref().unwrap();
            assert_eq!(ranked.entries.len(), 21);
            assert_eq!(max_level(ranked, 3), 7);

            let mut seen = BTreeSet::new();
            let mut last_mean = f64::INFINITY;
            for level in 1..=7 {
                let entries = select_level(ranked, level, 3).unwrap();
                assert_eq!(entries.len(), 3);
                for entry in entries {
                    // levels are disjoint
                    assert!(seen.insert(entry.bq_id.clone()), "{} twice", entry.bq_id);
                }
                let mean: f64 = entries.iter().map(|e| e.score).sum::<f64>() / 3.0;
                assert!(
                    mean <= last_mean + 1e-12,
                    "level {level} mean {mean} above previous {last_mean}"
                );
                last_mean = mean;
            }
            // and together they cover the full top 21
            let all: BTreeSet<String> =
                ranked.entries.iter().map(|e| e.bq_id.clone()).collect();
            assert_eq!(seen, all);

            // level 0 is the untouched question; level L appends the
            // level's three questions verbatim
            let clean = noisy_question(mq, ranked, 0, 3).unwrap();
            assert_eq!(clean.text, mq.question);
            assert!(clean.appended_bq_ids.is_empty());
            for level in 1..=7 {
                let noisy = noisy_question(mq, ranked, level, 3).unwrap();
                assert_eq!(noisy.level, level);
                assert_eq!(noisy.appended_bq_ids.len(), 3);
                assert!(noisy.text.starts_with(&format!("{} ", mq.question)));
                let entries = select_level(ranked, level, 3).unwrap();
                for entry in entries {
                    assert!(noisy.text.contains(&entry.question));
                }
            }
        }
    });
}

#[test]
fn criterion_6_robustness_separates_models() {
    criterion("criterion 6 (robustness tells immune from brittle)", || {
        let pool = pool_2000();
        let mut mqs = mqs_100();
        let options = RankOptions::default();
        let outcomes = build_ranked_bqd(
            &mqs,
            &pool,
            RankingMethod::Metric(MetricName::Rouge),
            None,
            &options,
        )
        .unwrap();
        let rankings: Vec<RankedBQD> =
            outcomes.into_iter().map(|o| o.result.unwrap()).collect();

        // a model that reads only up to the first question mark never
        // sees the noise: every answer repeats and every level scores 1
        let prefix = ModelAdapter::MockPrefix { answers: None };
        for mq in &mut mqs {
            let key = robustqa_core::prefix_key(&mq.question);
            mq.answers = Some(vec![key.clone(), key.clone(), key]);
        }
        let result =
            run_experiment(&mqs, &rankings, &prefix, &ExperimentOptions::default()).unwrap();
        assert_eq!(result.report.acc_clean, 1.0);
        let noisy_levels: Vec<usize> = result.report.levels.iter().map(|l| l.level).collect();
        assert_eq!(noisy_levels, vec![1, 2, 3, 4, 5, 6, 7]);
        let clean_answers = &result.answers_by_level[&0];
        for report in &result.report.levels {
            assert_eq!(report.accuracy, 1.0, "level {}", report.level);
            assert_eq!(report.r_score, 1.0, "level {}", report.level);
            assert_eq!(report.n_records, 100);
            assert_eq!(&result.answers_by_level[&report.level], clean_answers);
        }

        // a model that hashes the whole input flips its answer as soon
        // as anything is appended: accuracy drops at every noisy level
        let hash = ModelAdapter::MockHash { seed: 99 };
        let requests: Vec<ModelRequest> = mqs
            .iter()
            .map(|mq| ModelRequest {
                id: mq.id.clone(),
                image_id: mq.image_id.clone(),
                question: mq.question.clone(),
            })
            .collect();
        for (mq, response) in mqs.iter_mut().zip(query_model(&hash, &requests).unwrap()) {
            assert_eq!(mq.id, response.id);
            mq.answers = Some(vec![response.answer.clone(), response.answer.clone(), response.answer]);
        }
        let result =
            run_experiment(&mqs, &rankings, &hash, &ExperimentOptions::default()).unwrap();
        assert_eq!(result.report.acc_clean, 1.0);
        for report in &result.report.levels {
            assert!(
                report.accuracy < result.report.acc_clean,
                "level {} accuracy {} did not drop",
                report.level,
                report.accuracy
            );
            assert!(report.r_score < 1.0, "level {}", report.level);
        }

        // the boundary case lands exactly on zero: a 20 percent relative
        // drop exhausts a 0.2 tolerance to the last bit
        assert_eq!(r_score(0.6, 0.48, 0.2).unwrap(), 0.0);
        assert_eq!(r_score(0.6, 0.6, 0.2).unwrap(), 1.0);
        assert_eq!(r_score(0.6, 0.66, 0.2).unwrap(), 1.0);

        // both accuracy kinds stay inside [0, 1] on the same answers
        let answers: Vec<String> = vec!["yes".into(), "no".into()];
        let golds: Vec<Vec<String>> = vec![vec!["yes".into(); 4], vec!["maybe".into()]];
        for kind in [AccuracyKind::Vqa, AccuracyKind::Exact] {
            let acc = accuracy(kind, &answers, &golds).unwrap();
            assert!((0.0..=1.0).contains(&acc));
        }
    });
}

#[test]
fn criterion_7_binary_is_deterministic() {
    criterion("criterion 7 (parallel reruns are byte-identical)", || {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();

        let pool: Vec<serde_json::Value> = pool_2000()
            .iter()
            .map(|q| serde_json::json!({"id": q.id(), "question": q.text()}))
            .collect();
        write_jsonl_records(&root.join("pool.jsonl"), &pool);
        let mqs: Vec<serde_json::Value> = mqs_100()
            .iter()
            .map(|mq| serde_json::to_value(mq).unwrap())
            .collect();
        write_jsonl_records(&root.join("mq.jsonl"), &mqs);

        let run = |out: &str, jobs: &str| {
            let output = Command::new(env!("CARGO_BIN_EXE_robustqa"))
                .args([
                    "rank",
                    "--mq", &root.join("mq.jsonl").display().to_string(),
                    "--pool", &root.join("pool.jsonl").display().to_string(),
                    "--out", &root.join(out).display().to_string(),
                    "--method", "lasso",
                    "--jobs", jobs,
                ])
                .output()
                .unwrap();
            assert_eq!(
                output.status.code(),
                Some(0),
                "stderr: {}",
                String::from_utf8_lossy(&output.stderr)
            );
            std::fs::read(root.join(out)).unwrap()
        };

        let first = run("r1.jsonl", "4");
        assert!(!first.is_empty());
        assert_eq!(first, run("r2.jsonl", "4"), "rerun differs");
        assert_eq!(first, run("r3.jsonl", "2"), "thread count changes output");
    });
}

#[test]
fn criterion_8_full_scale_pool_under_budget() {
    criterion("criterion 8 (100 queries against 10,000 questions)", || {
        let pool = pool_10000();
        let mqs = mqs_100();
        assert_eq!(pool.len(), 10_000);

        let start = Instant::now();
        let encoder = fit_tfidf(&pool, Default::default()).unwrap();
        let worker = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let outcomes = worker.install(|| {
            build_ranked_bqd(
                &mqs,
                &pool,
                RankingMethod::Lasso,
                Some(&encoder),
                &RankOptions::default(),
            )
        })
        .unwrap();
        let elapsed = start.elapsed();

        for outcome in &outcomes {
            let ranked = outcome.result.as_ref().unwrap();
            assert_eq!(ranked.entries.len(), 21);
            assert!(ranked.entries[0].score == 1.0);
            // scores are sorted and normalized
            for pair in ranked.entries.windows(2) {
                assert!(pair[0].score >= pair[1].score);
            }
        }
        assert!(
            elapsed < Duration::from_secs(60),
            "budget exceeded: {elapsed:?}"
        );
    });
}

// keep the helper honest: a hand-sized problem where the reference
// machinery can be checked by eye
#[test]
fn reference_solver_solves_orthogonal_case() {
    let columns = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let b = vec![3.0, -1.0];
    let x = ista(&columns, &b, 0.5, 2000);
    assert_close(x[0], 2.5, 1e-9, "x0");
    assert_close(x[1], -0.5, 1e-9, "x1");
    assert!(kkt(&columns, &b, &x, 0.5) < 1e-8);
}
