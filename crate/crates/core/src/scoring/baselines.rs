//! Flat baselines for entity-pair queries.
//!
//! All three reduce the structured query to plain keyword retrieval with a
//! sequential-dependence score (weighted unigram / ordered-bigram /
//! unordered-window aggregates):
//!
//! - `base_ee`: two entity runs — first entity sub-query + relationship
//!   terms, relationship terms + second entity sub-query — crossed into pairs.
//! - `base_e`: one entity run over all query terms, crossed with itself.
//! - `base_r`: one run over the full-sentence pair index with all query terms.
//!
//! They are defined for pair queries only (one relationship sub-query).

use super::candidates::{sort_scored, ScoredKey};
use super::functions::{subquery_stats, PartRole};
use super::join::{rank_tuples, CandidateTuple};
use super::ScoringParams;
use crate::index::{ERIndex, IndexPart};
use crate::query::ERQuery;
use crate::types::{EntityId, PairKey};
use crate::{Error, Result};

/// Rank meta-documents of `part` by sequential-dependence score: the weighted
/// sum of unigram, adjacent ordered-bigram, and unordered-window aggregates
/// under `params.sdm_weights`. Candidates are meta-documents containing at
/// least one query term.
pub fn sdm_rank(
    part: &IndexPart,
    terms: &[String],
    params: &ScoringParams,
    role: PartRole,
    k: usize,
) -> Vec<ScoredKey> {
    let scorer = params.scorer(part, role);
    let stats = subquery_stats(part, terms, params.window);
    let (w_t, w_o, w_u) = params.sdm_weights;
    let mut scored: Vec<ScoredKey> = part
        .matching_keys(terms)
        .into_iter()
        .map(|key| {
            let doc = part.get(key);
            let unigram = scorer.unigram_sum(doc, terms);
            let (ordered, unordered) = scorer.bigram_sums(doc, &stats, params.window);
            ScoredKey {
                key: key.clone(),
                score: w_t * unigram + w_o * ordered + w_u * unordered,
            }
        })
        .collect();
    sort_scored(&mut scored);
    scored.truncate(k);
    scored
}

/// Each run is cut to this prefix before pair formation, bounding the cross
/// product at 65536 scored pairs. Any pair in the global top 100 must use
/// entities ranked within the top 101 of their runs (101 better-ranked
/// alternatives would otherwise outscore it), so with a 100-result cap the
/// prefix only affects tie clusters spanning the boundary.
const CROSS_PREFIX: usize = 256;

fn require_pair_query(query: &ERQuery, model: &str) -> Result<()> {
    if query.relationship_count() != 1 {
        return Err(Error::ModelArity {
            model: model.to_string(),
            arity: query.arity(),
        });
    }
    Ok(())
}

fn pair_tuple(e1: &str, s1: f64, e2: &str, s2: f64) -> CandidateTuple {
    CandidateTuple {
        entities: vec![EntityId(e1.into()), EntityId(e2.into())],
        pairs: Vec::new(),
        per_subquery_scores: vec![s1, s2],
        joint_score: s1 + s2,
    }
}

/// Cross product of two entity runs: entity terms + relationship terms for
/// the first slot, relationship terms + entity terms for the second.
pub fn base_ee(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
) -> Result<Vec<CandidateTuple>> {
    require_pair_query(query, "base-ee")?;
    let entities = query.entity_subqueries();
    let relation = &query.relationship_subqueries()[0];
    let mut left_terms = entities[0].tokens();
    left_terms.extend(relation.tokens());
    let mut right_terms = relation.tokens();
    right_terms.extend(entities[1].tokens());

    let left = sdm_rank(
        &index.entities,
        &left_terms,
        params,
        PartRole::Entity,
        CROSS_PREFIX,
    );
    let right = sdm_rank(
        &index.entities,
        &right_terms,
        params,
        PartRole::Entity,
        CROSS_PREFIX,
    );
    let mut tuples = Vec::new();
    for l in &left {
        for r in &right {
            if l.key != r.key {
                tuples.push(pair_tuple(&l.key, l.score, &r.key, r.score));
            }
        }
    }
    rank_tuples(&mut tuples, params.result_cap);
    Ok(tuples)
}

/// Cross product of a single entity run (all query terms) with itself,
/// excluding self-pairs.
pub fn base_e(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
) -> Result<Vec<CandidateTuple>> {
    require_pair_query(query, "base-e")?;
    let run = sdm_rank(
        &index.entities,
        &query.all_tokens(),
        params,
        PartRole::Entity,
        CROSS_PREFIX,
    );
    let mut tuples = Vec::new();
    for l in &run {
        for r in &run {
            if l.key != r.key {
                tuples.push(pair_tuple(&l.key, l.score, &r.key, r.score));
            }
        }
    }
    rank_tuples(&mut tuples, params.result_cap);
    Ok(tuples)
}

/// One run over the full-sentence pair index with the whole query.
pub fn base_r(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
) -> Result<Vec<CandidateTuple>> {
    require_pair_query(query, "base-r")?;
    let run = sdm_rank(
        &index.pair_sentences,
        &query.all_tokens(),
        params,
        PartRole::Relationship,
        params.candidate_k,
    );
    let mut tuples = Vec::new();
    for hit in &run {
        let pair = PairKey::parse(&hit.key).expect("pair index key is a pair label");
        tuples.push(CandidateTuple {
            entities: vec![pair.first().clone(), pair.second().clone()],
            per_subquery_scores: vec![hit.score],
            joint_score: hit.score,
            pairs: vec![pair],
        });
    }
    rank_tuples(&mut tuples, params.result_cap);
    Ok(tuples)
}
