//! Weight training: coordinate ascent directly on a rank metric.
//!
//! Candidate tuples and their feature vectors are materialized once per
//! query; the optimizer then only re-scores, re-sorts, and re-measures. The
//! training objective is computed with exactly the evaluation module's
//! conventions (depth cutoff, canonical keys, first-occurrence-wins
//! duplicates), so the reported objective is the metric a run file would get.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::{
    average_precision, canonical_tuple_key, ndcg_at, precision_at, Qrels, EVAL_DEPTH,
};
use crate::index::ERIndex;
use crate::query::ERQuery;
use crate::scoring::{tuples_with_features, FeatureWeights, ScoringParams, FEATURE_COUNT};
use crate::{Error, Result};

/// Metric the optimizer climbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMetric {
    Map,
    Ndcg20,
}

/// Optimizer knobs. The defaults are the reference schedule: 3 restarts,
/// 20 probes per coordinate, 1e-4 sweep-improvement convergence, 25 sweeps
/// maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub metric: TrainMetric,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub probes: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            metric: TrainMetric::Map,
            restarts: 3,
            max_sweeps: 25,
            probes: 20,
            epsilon: 1e-4,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParams { reason });
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be at least 1".into());
        }
        if self.probes < 2 {
            return bad(format!("probes must be at least 2, got {}", self.probes));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }
}

/// Disjoint near-equal query-id folds, fixed by the seed: ids are sorted,
/// shuffled once, and chunked with the remainder spread over the first folds.
pub fn make_folds(query_ids: &[String], fold_count: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    let ids: Vec<String> = query_ids
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if fold_count == 0 || fold_count > ids.len() {
        return Err(Error::BadFoldCount {
            folds: fold_count,
            queries: ids.len(),
        });
    }
    let mut shuffled = ids;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::seq::SliceRandom;
    shuffled.shuffle(&mut rng);
    let base = shuffled.len() / fold_count;
    let extra = shuffled.len() % fold_count;
    let mut folds = Vec::with_capacity(fold_count);
    let mut at = 0;
    for i in 0..fold_count {
        let size = base + usize::from(i < extra);
        folds.push(shuffled[at..at + size].to_vec());
        at += size;
    }
    Ok(folds)
}

/// One candidate row of a training query.
#[derive(Debug, Clone)]
struct Row {
    key: String,
    /// Interned canonical-key id within the query, for duplicate collapsing.
    canon: usize,
    relevant: bool,
    features: [f64; FEATURE_COUNT],
}

/// One query's frozen candidate pool.
#[derive(Debug, Clone)]
pub struct TrainingInstance {
    pub query_id: String,
    relevant_total: usize,
    rows: Vec<Row>,
}

impl TrainingInstance {
    pub fn candidate_count(&self) -> usize {
        self.rows.len()
    }

    pub fn has_reachable_relevant(&self) -> bool {
        self.relevant_total > 0 && self.rows.iter().any(|r| r.relevant)
    }
}

/// Frozen candidate pools of a query set.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub instances: Vec<TrainingInstance>,
}

impl TrainingSet {
    /// Join every query's candidates (no result cap) and attach features and
    /// relevance. Queries absent from the qrels are an error, mirroring run
    /// evaluation.
    pub fn prepare(
        index: &ERIndex,
        queries: &[ERQuery],
        qrels: &Qrels,
        params: &ScoringParams,
    ) -> Result<TrainingSet> {
        params.validate()?;
        if let Some(q) = queries.iter().find(|q| !qrels.contains_query(&q.query_id)) {
            return Err(Error::QueryMissingFromQrels {
                query_id: q.query_id.clone(),
            });
        }
        let instances = queries
            .par_iter()
            .map(|query| {
                let mut canon_ids: BTreeMap<String, usize> = BTreeMap::new();
                let rows = tuples_with_features(index, query, params)
                    .into_iter()
                    .map(|(t, f)| {
                        let key = t.key();
                        let canonical = canonical_tuple_key(&key);
                        let relevant = qrels.is_relevant(&query.query_id, &canonical);
                        let next = canon_ids.len();
                        let canon = *canon_ids.entry(canonical).or_insert(next);
                        Row {
                            key,
                            canon,
                            relevant,
                            features: f.0,
                        }
                    })
                    .collect();
                TrainingInstance {
                    query_id: query.query_id.clone(),
                    relevant_total: qrels.relevant_count(&query.query_id),
                    rows,
                }
            })
            .collect();
        Ok(TrainingSet { instances })
    }

    /// The instances whose query ids are in `ids`, in stored order.
    pub fn subset(&self, ids: &BTreeSet<String>) -> TrainingSet {
        TrainingSet {
            instances: self
                .instances
                .iter()
                .filter(|i| ids.contains(&i.query_id))
                .cloned()
                .collect(),
        }
    }

    pub fn query_ids(&self) -> Vec<String> {
        self.instances.iter().map(|i| i.query_id.clone()).collect()
    }
}

/// Metric of one instance under one weight vector, with evaluation-module
/// semantics: rank by score (ties by key), cut at the evaluation depth,
/// count each canonical key once.
fn instance_metric(instance: &TrainingInstance, weights: &[f64], metric: TrainMetric) -> f64 {
    if instance.relevant_total == 0 {
        return 0.0;
    }
    let mut order: Vec<(f64, usize)> = instance
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut s = 0.0;
            for (w, f) in weights.iter().zip(&row.features) {
                s += w * f;
            }
            (s, i)
        })
        .collect();
    order.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| instance.rows[a.1].key.cmp(&instance.rows[b.1].key))
    });
    let mut seen = vec![false; instance.rows.len()];
    let rels: Vec<bool> = order
        .iter()
        .take(EVAL_DEPTH)
        .map(|(_, i)| {
            let row = &instance.rows[*i];
            let first = !seen[row.canon];
            seen[row.canon] = true;
            first && row.relevant
        })
        .collect();
    match metric {
        TrainMetric::Map => average_precision(&rels, instance.relevant_total),
        TrainMetric::Ndcg20 => ndcg_at(&rels, instance.relevant_total, 20),
    }
}

/// Macro-averaged training metric of a query set under one weight vector.
pub fn evaluate_weights(set: &TrainingSet, weights: &FeatureWeights, metric: TrainMetric) -> f64 {
    if set.instances.is_empty() {
        return 0.0;
    }
    let w = weights.as_array();
    let sum: f64 = set
        .instances
        .iter()
        .map(|i| instance_metric(i, &w, metric))
        .sum();
    sum / set.instances.len() as f64
}

/// All four ranked metrics of a set under fixed weights (validation-side
/// reporting; P@10 and MRR are not training objectives but are cheap here).
pub fn set_metrics(set: &TrainingSet, weights: &FeatureWeights) -> (f64, f64, f64, f64) {
    if set.instances.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let w = weights.as_array();
    let mut totals = (0.0, 0.0, 0.0, 0.0);
    for inst in &set.instances {
        if inst.relevant_total == 0 {
            continue;
        }
        let mut order: Vec<(f64, usize)> = inst
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut s = 0.0;
                for (wc, f) in w.iter().zip(&row.features) {
                    s += wc * f;
                }
                (s, i)
            })
            .collect();
        order.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| inst.rows[a.1].key.cmp(&inst.rows[b.1].key))
        });
        let mut seen = vec![false; inst.rows.len()];
        let rels: Vec<bool> = order
            .iter()
            .take(EVAL_DEPTH)
            .map(|(_, i)| {
                let row = &inst.rows[*i];
                let first = !seen[row.canon];
                seen[row.canon] = true;
                first && row.relevant
            })
            .collect();
        totals.0 += average_precision(&rels, inst.relevant_total);
        totals.1 += precision_at(&rels, 10);
        totals.2 += rels
            .iter()
            .position(|r| *r)
            .map(|i| 1.0 / (i + 1) as f64)
            .unwrap_or(0.0);
        totals.3 += ndcg_at(&rels, inst.relevant_total, 20);
    }
    let n = set.instances.len() as f64;
    (totals.0 / n, totals.1 / n, totals.2 / n, totals.3 / n)
}

/// Result of one training call.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: FeatureWeights,
    /// Training-metric value at the returned weights.
    pub objective: f64,
    /// Restart index that produced the winner.
    pub restart: usize,
    /// Sweeps the winning restart ran before converging.
    pub sweeps: usize,
    /// Objective after every accepted coordinate move of the winning restart;
    /// non-decreasing by construction.
    pub accepted_trace: Vec<f64>,
}

/// Move all mass of coordinate `c` to `v` and rescale the rest to keep the
/// sum at 1. When coordinate `c` already holds all the mass the remainder is
/// spread uniformly.
fn reweight(current: &[f64; FEATURE_COUNT], c: usize, v: f64) -> [f64; FEATURE_COUNT] {
    let rest = 1.0 - current[c];
    let mut out = *current;
    out[c] = v;
    if rest > 1e-12 {
        let scale = (1.0 - v) / rest;
        for (i, w) in out.iter_mut().enumerate() {
            if i != c {
                *w = current[i] * scale;
            }
        }
    } else {
        let share = (1.0 - v) / (FEATURE_COUNT - 1) as f64;
        for (i, w) in out.iter_mut().enumerate() {
            if i != c {
                *w = share;
            }
        }
    }
    out
}

/// Uniformly distributed point on the probability simplex (normalized unit
/// exponentials).
fn random_simplex_point(rng: &mut ChaCha8Rng) -> [f64; FEATURE_COUNT] {
    let mut a = [0.0; FEATURE_COUNT];
    let mut sum = 0.0;
    for w in &mut a {
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        *w = -u.ln();
        sum += *w;
    }
    for w in &mut a {
        *w /= sum;
    }
    a
}

struct RestartResult {
    weights: [f64; FEATURE_COUNT],
    objective: f64,
    sweeps: usize,
    accepted_trace: Vec<f64>,
}

fn run_restart(
    set: &TrainingSet,
    config: &TrainConfig,
    start: [f64; FEATURE_COUNT],
) -> RestartResult {
    let objective =
        |w: &[f64; FEATURE_COUNT]| evaluate_weights(set, &FeatureWeights::from_array(*w), config.metric);
    let mut weights = start;
    let mut current = objective(&weights);
    let mut trace = Vec::new();
    let mut sweeps = 0;
    for _ in 0..config.max_sweeps {
        let sweep_start = current;
        sweeps += 1;
        for c in 0..FEATURE_COUNT {
            let mut best_v = None;
            let mut best_obj = current;
            for j in 0..config.probes {
                let v = j as f64 / (config.probes - 1) as f64;
                let candidate = reweight(&weights, c, v);
                let obj = objective(&candidate);
                if obj > best_obj {
                    best_obj = obj;
                    best_v = Some(v);
                }
            }
            if let Some(v) = best_v {
                weights = reweight(&weights, c, v);
                current = best_obj;
                trace.push(current);
            }
        }
        if current - sweep_start < config.epsilon {
            break;
        }
    }
    RestartResult {
        weights,
        objective: current,
        sweeps,
        accepted_trace: trace,
    }
}

/// Learn feature weights by coordinate ascent on the training metric. The
/// first restart starts from uniform weights, later ones from seeded random
/// simplex points; the best restart wins, with the lower restart index
/// breaking exact objective ties.
pub fn coordinate_ascent(set: &TrainingSet, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if !set.instances.iter().any(|i| i.has_reachable_relevant()) {
        return Err(Error::NoRelevantCandidates);
    }
    let starts: Vec<[f64; FEATURE_COUNT]> = (0..config.restarts)
        .map(|r| {
            if r == 0 {
                [1.0 / FEATURE_COUNT as f64; FEATURE_COUNT]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    config
                        .seed
                        .wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                );
                random_simplex_point(&mut rng)
            }
        })
        .collect();
    let results: Vec<RestartResult> = starts
        .into_par_iter()
        .map(|start| run_restart(set, config, start))
        .collect();
    let best = results
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.objective
                .partial_cmp(&b.objective)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| ib.cmp(ia)) // earlier restart wins ties
        })
        .expect("restarts >= 1");
    let (restart, r) = best;
    let weights = FeatureWeights::from_array(r.weights).normalized()?;
    Ok(TrainOutcome {
        weights,
        objective: r.objective,
        restart,
        sweeps: r.sweeps,
        accepted_trace: r.accepted_trace.clone(),
    })
}

/// One fold's held-out report.
#[derive(Debug, Clone)]
pub struct FoldReport {
    pub test_ids: Vec<String>,
    pub weights: FeatureWeights,
    pub train_objective: f64,
    pub test_metric: f64,
}

/// Cross-validated training: per fold, train on the other folds and measure
/// on the held-out one.
pub fn cross_validate(
    set: &TrainingSet,
    folds: &[Vec<String>],
    config: &TrainConfig,
) -> Result<Vec<FoldReport>> {
    let mut reports = Vec::with_capacity(folds.len());
    for fold in folds {
        let test_ids: BTreeSet<String> = fold.iter().cloned().collect();
        let train_ids: BTreeSet<String> = set
            .query_ids()
            .into_iter()
            .filter(|id| !test_ids.contains(id))
            .collect();
        let outcome = coordinate_ascent(&set.subset(&train_ids), config)?;
        let test_metric =
            evaluate_weights(&set.subset(&test_ids), &outcome.weights, config.metric);
        reports.push(FoldReport {
            test_ids: fold.clone(),
            weights: outcome.weights,
            train_objective: outcome.objective,
            test_metric,
        });
    }
    Ok(reports)
}
