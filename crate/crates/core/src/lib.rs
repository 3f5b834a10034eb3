//! Measure how robust a question-answering model is to linguistic noise.
//!
//! The pipeline has three stages:
//!
//! 1. **Rank** a pool of basic questions against each main question, either
//!    by LASSO sparse regression on TF-IDF vectors ([`ranker`], [`encoding`])
//!    or by a sentence similarity metric ([`metrics`]).
//! 2. **Append** the top-ranked basic questions to the main question in
//!    groups, producing graded noise levels ([`noise`]).
//! 3. **Evaluate** a model on the clean and noisy questions and compare
//!    accuracies into a robustness score ([`eval`]).
//!
//! [`io`] reads and writes the JSONL record files each stage consumes and
//! produces. Everything is deterministic: the same inputs yield the same
//! bytes, regardless of thread count.

pub mod encoding;
pub mod error;
pub mod eval;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod ranker;
pub mod text;

pub use encoding::{cosine, fit_tfidf, load_external, Encoder, NgramOrders, Vector};
pub use error::{Error, Result};
pub use eval::{
    accuracy, evaluate_noisy, exact_match_accuracy, prefix_key, query_model, r_score,
    run_experiment, vqa_accuracy, write_report_csv, write_report_json, AccuracyKind, EvalOptions,
    ExperimentOptions, ExperimentResult, LevelReport, ModelAdapter, ModelRequest, ModelResponse,
    RecordAnswer, RobustnessReport, DEFAULT_ANSWER, DEFAULT_TOLERANCE,
};
pub use io::{
    pool_to_questions, read_jsonl, read_mq_file, read_noisy_file, read_pool_file,
    read_ranked_file, write_jsonl, MqRecord, PoolRecord,
};
pub use metrics::{
    bleu, cider, compute_idf, meteor_lite, rouge_l, score, IdfTable, MetricName, SimilarityScore,
};
pub use noise::{
    build_ranked_bqd, concat_noise, max_level, noisy_question, select_level, NoisyQuestion,
    RankOutcome,
};
pub use ranker::{
    kendall_tau, rank, rank_lasso, rank_metric, solve_lasso, soft_threshold, LassoProblem,
    LassoSolution, RankOptions, RankedBQD, RankedEntry, RankingMethod, SolveOptions,
};
pub use text::{ngrams, normalize, tokenize, NGramCounts, Question};
