//! Rank metrics, relevance judgments, and TREC-format run files.
//!
//! Tuple keys are canonicalized before any relevance lookup: a chain read
//! backwards names the same result, so the canonical form of `a|b|c` is the
//! lexicographic minimum of the sequence and its reverse. Judgments and run
//! output use the same canonicalization, which for pairs is plain unordered
//! matching.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// Results deeper than this never influence any metric.
pub const EVAL_DEPTH: usize = 100;

/// Canonical form of a tuple key: the segment sequence or its reverse,
/// whichever compares smaller.
pub fn canonical_tuple_key(key: &str) -> String {
    let parts: Vec<&str> = key.split('|').collect();
    let mut rev = parts.clone();
    rev.reverse();
    if rev < parts {
        rev.join("|")
    } else {
        key.to_string()
    }
}

/// Relevance judgments: query id -> canonical tuple key -> grade. Grade 0
/// lines are kept (they mark a query as judged even when nothing relevant
/// exists) but only grades > 0 count as relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Qrels::default()
    }

    /// Record one judgment; keys are canonicalized, later grades overwrite.
    pub fn add(&mut self, query_id: &str, tuple_key: &str, grade: u32) {
        self.judgments
            .entry(query_id.to_string())
            .or_default()
            .insert(canonical_tuple_key(tuple_key), grade);
    }

    pub fn contains_query(&self, query_id: &str) -> bool {
        self.judgments.contains_key(query_id)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &String> {
        self.judgments.keys()
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Judgments of one query (canonical keys).
    pub fn query_judgments(&self, query_id: &str) -> Option<&BTreeMap<String, u32>> {
        self.judgments.get(query_id)
    }

    /// Number of relevant (grade > 0) tuples of one query.
    pub fn relevant_count(&self, query_id: &str) -> usize {
        self.judgments
            .get(query_id)
            .map(|m| m.values().filter(|g| **g > 0).count())
            .unwrap_or(0)
    }

    pub fn is_relevant(&self, query_id: &str, canonical_key: &str) -> bool {
        self.judgments
            .get(query_id)
            .and_then(|m| m.get(canonical_key))
            .map(|g| *g > 0)
            .unwrap_or(false)
    }
}

/// Ranked results per query: ordered (tuple key, score) lists.
pub type RunResults = BTreeMap<String, Vec<(String, f64)>>;

/// Parse one whitespace-separated line into exactly `n` fields.
fn fields(line: &str, n: usize) -> Option<Vec<&str>> {
    let f: Vec<&str> = line.split_whitespace().collect();
    (f.len() == n).then_some(f)
}

/// Load judgments from "query_id 0 tuple_key grade" lines.
pub fn load_qrels(path: &Path) -> Result<Qrels> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut qrels = Qrels::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse = || -> Option<(Vec<&str>, u32)> {
            let f = fields(line, 4)?;
            let grade = f[3].parse().ok()?;
            Some((f, grade))
        };
        let Some((f, grade)) = parse() else {
            return Err(Error::MalformedTrecLine {
                what: "qrels",
                path: path.to_path_buf(),
                line: i + 1,
                reason: "expected \"query_id 0 tuple_key grade\"".into(),
            });
        };
        qrels.add(f[0], f[2], grade);
    }
    Ok(qrels)
}

pub fn write_qrels(path: &Path, qrels: &Qrels) -> Result<()> {
    let mut out = String::new();
    for (qid, m) in &qrels.judgments {
        for (key, grade) in m {
            writeln!(out, "{qid} 0 {key} {grade}").expect("string write");
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write results as "query_id Q0 tuple_key rank score tag" lines, ranks from 1.
pub fn write_run(path: &Path, run: &RunResults, tag: &str) -> Result<()> {
    let mut out = String::new();
    for (qid, results) in run {
        for (rank, (key, score)) in results.iter().enumerate() {
            writeln!(out, "{qid} Q0 {key} {} {score:.6} {tag}", rank + 1).expect("string write");
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load a run file; results are ordered by their rank column per query.
pub fn load_run(path: &Path) -> Result<RunResults> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut ranked: BTreeMap<String, Vec<(usize, String, f64)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse = || -> Option<(Vec<&str>, usize, f64)> {
            let f = fields(line, 6)?;
            Some((f.clone(), f[3].parse().ok()?, f[4].parse().ok()?))
        };
        let Some((f, rank, score)) = parse() else {
            return Err(Error::MalformedTrecLine {
                what: "run",
                path: path.to_path_buf(),
                line: i + 1,
                reason: "expected \"query_id Q0 tuple_key rank score tag\"".into(),
            });
        };
        ranked
            .entry(f[0].to_string())
            .or_default()
            .push((rank, f[2].to_string(), score));
    }
    Ok(ranked
        .into_iter()
        .map(|(qid, mut rows)| {
            rows.sort_by_key(|row| row.0);
            (qid, rows.into_iter().map(|(_, k, s)| (k, s)).collect())
        })
        .collect())
}

/// The four per-query metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryMetrics {
    pub map: f64,
    pub p10: f64,
    pub mrr: f64,
    pub ndcg20: f64,
}

impl QueryMetrics {
    pub const ZERO: QueryMetrics = QueryMetrics {
        map: 0.0,
        p10: 0.0,
        mrr: 0.0,
        ndcg20: 0.0,
    };
}

/// Binary relevance of the effective ranking: results truncated to the
/// evaluation depth, keys canonicalized, and repeated canonical keys counted
/// as non-relevant after their first appearance.
fn relevance_vector(results: &[(String, f64)], qrels: &Qrels, query_id: &str) -> Vec<bool> {
    let mut seen = std::collections::BTreeSet::new();
    results
        .iter()
        .take(EVAL_DEPTH)
        .map(|(key, _)| {
            let canonical = canonical_tuple_key(key);
            seen.insert(canonical.clone()) && qrels.is_relevant(query_id, &canonical)
        })
        .collect()
}

/// Average precision with the total relevant count as denominator.
pub fn average_precision(rels: &[bool], relevant_total: usize) -> f64 {
    if relevant_total == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, r) in rels.iter().enumerate() {
        if *r {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / relevant_total as f64
}

pub fn precision_at(rels: &[bool], depth: usize) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    let hits = rels.iter().take(depth).filter(|r| **r).count();
    hits as f64 / depth as f64
}

pub fn reciprocal_rank(rels: &[bool]) -> f64 {
    rels.iter()
        .position(|r| *r)
        .map(|i| 1.0 / (i + 1) as f64)
        .unwrap_or(0.0)
}

/// Binary-gain NDCG with 1/log2(rank+1) discounts; the ideal ranking places
/// min(depth, relevant_total) relevant results first.
pub fn ndcg_at(rels: &[bool], relevant_total: usize, depth: usize) -> f64 {
    if relevant_total == 0 {
        return 0.0;
    }
    let discount = |rank: usize| 1.0 / ((rank + 1) as f64).log2();
    let dcg: f64 = rels
        .iter()
        .take(depth)
        .enumerate()
        .filter(|(_, r)| **r)
        .map(|(i, _)| discount(i + 1))
        .sum();
    let idcg: f64 = (1..=depth.min(relevant_total)).map(discount).sum();
    dcg / idcg
}

/// All four metrics of one query's ranked results.
pub fn query_metrics(results: &[(String, f64)], qrels: &Qrels, query_id: &str) -> QueryMetrics {
    let relevant_total = qrels.relevant_count(query_id);
    if relevant_total == 0 {
        return QueryMetrics::ZERO;
    }
    let rels = relevance_vector(results, qrels, query_id);
    QueryMetrics {
        map: average_precision(&rels, relevant_total),
        p10: precision_at(&rels, 10),
        mrr: reciprocal_rank(&rels),
        ndcg20: ndcg_at(&rels, relevant_total, 20),
    }
}

/// Per-query metrics plus their macro average over all judged queries.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub per_query: BTreeMap<String, QueryMetrics>,
    pub macro_avg: QueryMetrics,
}

/// Evaluate a run against judgments. Every run query must be judged; judged
/// queries absent from the run score 0 and still enter the macro average.
pub fn evaluate_run(run: &RunResults, qrels: &Qrels) -> Result<Evaluation> {
    if let Some(qid) = run.keys().find(|q| !qrels.contains_query(q)) {
        return Err(Error::QueryMissingFromQrels {
            query_id: qid.clone(),
        });
    }
    static EMPTY: Vec<(String, f64)> = Vec::new();
    let per_query: BTreeMap<String, QueryMetrics> = qrels
        .query_ids()
        .map(|qid| {
            let results = run.get(qid).unwrap_or(&EMPTY);
            (qid.clone(), query_metrics(results, qrels, qid))
        })
        .collect();
    let n = per_query.len().max(1) as f64;
    let macro_avg = QueryMetrics {
        map: per_query.values().map(|m| m.map).sum::<f64>() / n,
        p10: per_query.values().map(|m| m.p10).sum::<f64>() / n,
        mrr: per_query.values().map(|m| m.mrr).sum::<f64>() / n,
        ndcg20: per_query.values().map(|m| m.ndcg20).sum::<f64>() / n,
    };
    Ok(Evaluation {
        per_query,
        macro_avg,
    })
}
