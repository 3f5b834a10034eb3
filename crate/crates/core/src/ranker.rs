//! Ranking of basic questions against a main question.
//!
//! The flagship ranker solves a LASSO problem: the main question's vector
//! is regressed onto the pool's vectors under an L1 penalty, and the sparse
//! nonnegative part of the coefficients orders the pool. The remaining
//! methods rank by a sentence similarity metric directly.
//!
//! The solver is plain cyclic coordinate descent on
//! `f(x) = 0.5 * ||Ax - b||^2 + lambda * ||x||_1`,
//! which needs no step size and decreases `f` at every coordinate update.
//! Columns stay sparse; only the residual is dense.

use crate::encoding::{Encoder, Vector};
use crate::error::{Error, Result};
use crate::metrics::{score, IdfTable, MetricName};
use crate::text::Question;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

/// `A` (as sparse columns) and `b` for one LASSO instance.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    columns: Vec<Vector>,
    target: Vec<f64>,
}

impl LassoProblem {
    pub fn new(columns: Vec<Vector>, target: Vec<f64>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("lasso problem needs at least one column"));
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("lasso target contains non-finite values"));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.dim() != target.len() {
                return Err(Error::invalid(format!(
                    "column {j} has dim {}, target has dim {}",
                    col.dim(),
                    target.len()
                )));
            }
        }
        Ok(LassoProblem { columns, target })
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn columns(&self) -> &[Vector] {
        &self.columns
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// Smallest penalty for which the all-zero vector is optimal:
    /// `max_j |a_j . b|`.
    pub fn lambda_max(&self) -> f64 {
        self.columns
            .iter()
            .map(|col| col.dot_dense(&self.target).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Stop once no coordinate moves by more than this in a full sweep.
    pub tol: f64,
    /// Hard cap on full sweeps.
    pub max_iter: usize,
    /// Largest first-order optimality violation accepted as converged.
    pub kkt_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-6, max_iter: 10_000, kkt_tol: 1e-5 }
    }
}

#[derive(Debug, Clone)]
pub struct LassoSolution {
    pub coefficients: Vec<f64>,
    /// Completed full sweeps.
    pub iterations: usize,
    pub converged: bool,
    /// `0.5 * ||Ax - b||^2 + lambda * ||x||_1` at the returned point.
    pub objective: f64,
    /// Largest violation of the subgradient optimality conditions.
    pub kkt_residual: f64,
}

pub fn soft_threshold(z: f64, threshold: f64) -> f64 {
    if z > threshold {
        z - threshold
    } else if z < -threshold {
        z + threshold
    } else {
        0.0
    }
}

/// Cyclic coordinate descent from `x = 0`.
///
/// Each update solves the one-dimensional problem in closed form, so the
/// objective is non-increasing sweep over sweep. The residual is maintained
/// incrementally and recomputed from scratch on exit, so the reported
/// objective and KKT residual are free of accumulated drift.
pub fn solve_lasso(
    problem: &LassoProblem,
    lambda: f64,
    options: &SolveOptions,
) -> Result<LassoSolution> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if !options.tol.is_finite() || options.tol <= 0.0 {
        return Err(Error::invalid("tol must be positive"));
    }
    if options.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }

    let p = problem.n_features();
    let norms_sq: Vec<f64> = problem.columns.iter().map(Vector::norm_sq).collect();
    let mut x = vec![0.0; p];
    let mut residual = problem.target.clone();

    let mut iterations = 0;
    let mut sweep_converged = false;
    while iterations < options.max_iter {
        let mut max_change = 0.0f64;
        for j in 0..p {
            let nsq = norms_sq[j];
            if nsq == 0.0 {
                continue;
            }
            let col = &problem.columns[j];
            let rho = col.dot_dense(&residual) + x[j] * nsq;
            let updated = soft_threshold(rho, lambda) / nsq;
            let delta = updated - x[j];
            if delta != 0.0 {
                col.add_scaled_into(-delta, &mut residual);
                x[j] = updated;
            }
            max_change = max_change.max(delta.abs());
        }
        iterations += 1;
        if max_change < options.tol {
            sweep_converged = true;
            break;
        }
    }

    let mut fresh = problem.target.clone();
    for (j, col) in problem.columns.iter().enumerate() {
        if x[j] != 0.0 {
            col.add_scaled_into(-x[j], &mut fresh);
        }
    }
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    let objective = 0.5 * fresh.iter().map(|v| v * v).sum::<f64>() + lambda * l1;
    let kkt_residual = problem
        .columns
        .iter()
        .zip(&x)
        .map(|(col, &xj)| {
            let grad = col.dot_dense(&fresh);
            if xj == 0.0 {
                (grad.abs() - lambda).max(0.0)
            } else {
                (grad - lambda * xj.signum()).abs()
            }
        })
        .fold(0.0, f64::max);

    Ok(LassoSolution {
        coefficients: x,
        iterations,
        converged: sweep_converged && kkt_residual <= options.kkt_tol,
        objective,
        kkt_residual,
    })
}

/// One ranked pool entry. `question` carries the raw text so downstream
/// noise generation needs no second lookup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub bq_id: String,
    pub question: String,
    pub score: f64,
}

/// A basic-question pool ordered by relevance to one main question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedBQD {
    pub mq_id: String,
    pub method: String,
    pub top_k: usize,
    pub entries: Vec<RankedEntry>,
}

#[derive(Debug, Clone)]
pub struct RankOptions {
    /// How many entries to keep.
    pub top_k: usize,
    /// LASSO penalty as a fraction of `lambda_max`.
    pub lambda_ratio: f64,
    pub solve: SolveOptions,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions { top_k: 21, lambda_ratio: 0.1, solve: SolveOptions::default() }
    }
}

/// Every supported ranking method: the seven metrics plus LASSO.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankingMethod {
    Lasso,
    Metric(MetricName),
}

impl RankingMethod {
    pub const ALL: [RankingMethod; 8] = [
        RankingMethod::Lasso,
        RankingMethod::Metric(MetricName::Bleu1),
        RankingMethod::Metric(MetricName::Bleu2),
        RankingMethod::Metric(MetricName::Bleu3),
        RankingMethod::Metric(MetricName::Bleu4),
        RankingMethod::Metric(MetricName::Rouge),
        RankingMethod::Metric(MetricName::Cider),
        RankingMethod::Metric(MetricName::Meteor),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RankingMethod::Lasso => "lasso",
            RankingMethod::Metric(m) => m.as_str(),
        }
    }
}

impl fmt::Display for RankingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "lasso" {
            Ok(RankingMethod::Lasso)
        } else {
            s.parse::<MetricName>()
                .map(RankingMethod::Metric)
                .map_err(|_| Error::invalid(format!("unknown ranking method {s:?}")))
        }
    }
}

fn validate_rank_inputs(pool: &[Question], options: &RankOptions) -> Result<()> {
    if options.top_k == 0 {
        return Err(Error::invalid("top_k must be at least 1"));
    }
    if !options.lambda_ratio.is_finite()
        || options.lambda_ratio <= 0.0
        || options.lambda_ratio > 1.0
    {
        return Err(Error::invalid(format!(
            "lambda_ratio must be in (0, 1], got {}",
            options.lambda_ratio
        )));
    }
    if pool.is_empty() {
        return Err(Error::EmptyRecords);
    }
    Ok(())
}

/// Candidates from the pool, with the main question itself excluded by id.
fn candidates<'p>(mq: &Question, pool: &'p [Question]) -> Result<Vec<&'p Question>> {
    let kept: Vec<&Question> = pool.iter().filter(|bq| bq.id() != mq.id()).collect();
    if kept.is_empty() {
        return Err(Error::EmptyRecords);
    }
    Ok(kept)
}

fn finish_ranking(
    mq: &Question,
    method: RankingMethod,
    top_k: usize,
    mut scored: Vec<RankedEntry>,
) -> RankedBQD {
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.bq_id.cmp(&b.bq_id))
    });
    scored.truncate(top_k);
    RankedBQD {
        mq_id: mq.id().to_owned(),
        method: method.as_str().to_owned(),
        top_k,
        entries: scored,
    }
}

/// Rank the pool by sparse regression of the main question's vector onto
/// the pool's vectors.
///
/// The penalty is `lambda_ratio * lambda_max`. Coefficients are clipped at
/// zero and normalized so the best candidate scores 1; if every coefficient
/// is non-positive, all scores are 0 and ordering falls back to id. A main
/// question that encodes to the zero vector, or a pool wholly uncorrelated
/// with it, has no usable regression and is reported as degenerate.
pub fn rank_lasso(
    mq: &Question,
    pool: &[Question],
    encoder: &Encoder,
    options: &RankOptions,
) -> Result<RankedBQD> {
    validate_rank_inputs(pool, options)?;
    let kept = candidates(mq, pool)?;

    let target = encoder.encode(mq)?;
    if target.is_zero() {
        return Err(Error::RankingDegenerate { mq_id: mq.id().to_owned() });
    }
    let columns: Vec<Vector> = kept
        .iter()
        .map(|bq| encoder.encode(bq))
        .collect::<Result<_>>()?;

    let problem = LassoProblem::new(columns, target.to_dense())?;
    let lambda_max = problem.lambda_max();
    if lambda_max == 0.0 {
        return Err(Error::RankingDegenerate { mq_id: mq.id().to_owned() });
    }
    let solution = solve_lasso(&problem, options.lambda_ratio * lambda_max, &options.solve)?;

    let clipped: Vec<f64> = solution.coefficients.iter().map(|&c| c.max(0.0)).collect();
    let peak = clipped.iter().fold(0.0f64, |a, &b| a.max(b));
    let scored = kept
        .iter()
        .zip(&clipped)
        .map(|(bq, &raw)| RankedEntry {
            bq_id: bq.id().to_owned(),
            question: bq.text().to_owned(),
            score: if peak > 0.0 { raw / peak } else { 0.0 },
        })
        .collect();
    Ok(finish_ranking(mq, RankingMethod::Lasso, options.top_k, scored))
}

/// Rank the pool by a sentence similarity metric, the main question being
/// the reference. CIDEr needs an IDF table (fit it on the pool).
pub fn rank_metric(
    mq: &Question,
    pool: &[Question],
    method: MetricName,
    idf: Option<&IdfTable>,
    options: &RankOptions,
) -> Result<RankedBQD> {
    validate_rank_inputs(pool, options)?;
    let kept = candidates(mq, pool)?;

    let scored = kept
        .iter()
        .map(|bq| {
            score(method, bq, mq, idf).map(|s| RankedEntry {
                bq_id: bq.id().to_owned(),
                question: bq.text().to_owned(),
                score: s.value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_ranking(mq, RankingMethod::Metric(method), options.top_k, scored))
}

/// Rank with any method through one entry point. LASSO needs `encoder`;
/// CIDEr needs `idf`.
pub fn rank(
    mq: &Question,
    pool: &[Question],
    method: RankingMethod,
    encoder: Option<&Encoder>,
    idf: Option<&IdfTable>,
    options: &RankOptions,
) -> Result<RankedBQD> {
    match method {
        RankingMethod::Lasso => {
            let encoder = encoder
                .ok_or_else(|| Error::invalid("lasso ranking requires an encoder"))?;
            rank_lasso(mq, pool, encoder, options)
        }
        RankingMethod::Metric(metric) => rank_metric(mq, pool, metric, idf, options),
    }
}

/// Kendall tau-a between two rankings of the same id set.
///
/// Every unordered pair is concordant or discordant (positions are unique),
/// so `tau = (concordant - discordant) / (n * (n - 1) / 2)`.
pub fn kendall_tau(left: &RankedBQD, right: &RankedBQD) -> Result<f64> {
    let left_ids: BTreeSet<&str> = left.entries.iter().map(|e| e.bq_id.as_str()).collect();
    let right_ids: BTreeSet<&str> = right.entries.iter().map(|e| e.bq_id.as_str()).collect();
    if left_ids.len() != left.entries.len() || right_ids.len() != right.entries.len() {
        return Err(Error::invalid("rankings must not repeat ids"));
    }
    if left_ids != right_ids {
        return Err(Error::MismatchedIdSets {
            only_left: left_ids.difference(&right_ids).map(|s| s.to_string()).collect(),
            only_right: right_ids.difference(&left_ids).map(|s| s.to_string()).collect(),
        });
    }
    let n = left.entries.len();
    if n < 2 {
        return Err(Error::invalid("kendall tau needs at least two entries"));
    }

    let right_pos: HashMap<&str, usize> = right
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.bq_id.as_str(), i))
        .collect();
    let positions: Vec<usize> = left
        .entries
        .iter()
        .map(|e| right_pos[e.bq_id.as_str()])
        .collect();

    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            if positions[i] < positions[j] {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok((concordant - discordant) as f64 / pairs)
}
