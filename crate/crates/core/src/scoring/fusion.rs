//! Late fusion: rank raw documents per sub-query and aggregate document
//! scores onto the entities and entity pairs associated with them.
//!
//! Association is binary: an entity is associated with every document that
//! mentions it; a pair is associated with every document that mentions both
//! members. Aggregated scores feed the same chain join used by the
//! meta-document models. When an entity qualifies for more than one entity
//! sub-query, orientations are deduplicated keeping the assignment that
//! maximizes the final tuple score.

use std::collections::BTreeMap;

use super::candidates::{rank_part, sort_scored, CandidateLists, ScoredKey};
use super::functions::PartRole;
use super::join::{enumerate_joined, rank_tuples, CandidateTuple};
use super::ScoringParams;
use crate::index::ERIndex;
use crate::query::{ERQuery, SubQuery};
use crate::types::PairKey;

/// Aggregate one sub-query's top-k document run onto entities.
fn aggregate_entities(index: &ERIndex, run: &[ScoredKey]) -> Vec<ScoredKey> {
    let mut acc: BTreeMap<String, f64> = BTreeMap::new();
    for doc in run {
        let Some(entities) = index.doc_entities.get(&doc.key) else {
            continue;
        };
        for e in entities {
            *acc.entry(e.0.clone()).or_insert(0.0) += doc.score;
        }
    }
    let mut out: Vec<ScoredKey> = acc
        .into_iter()
        .map(|(key, score)| ScoredKey { key, score })
        .collect();
    sort_scored(&mut out);
    out
}

/// Aggregate one sub-query's top-k document run onto entity pairs: every
/// unordered pair of entities co-mentioned in a document is a candidate.
fn aggregate_pairs(index: &ERIndex, run: &[ScoredKey]) -> Vec<ScoredKey> {
    let mut acc: BTreeMap<String, f64> = BTreeMap::new();
    for doc in run {
        let Some(entities) = index.doc_entities.get(&doc.key) else {
            continue;
        };
        let list: Vec<_> = entities.iter().collect();
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                // BTreeSet iteration is sorted, so (i, j) is already canonical
                let label = PairKey::new(list[i].clone(), list[j].clone())
                    .expect("distinct set members")
                    .label();
                *acc.entry(label).or_insert(0.0) += doc.score;
            }
        }
    }
    let mut out: Vec<ScoredKey> = acc
        .into_iter()
        .map(|(key, score)| ScoredKey { key, score })
        .collect();
    sort_scored(&mut out);
    out
}

/// Entity and pair candidate lists built by document-score aggregation.
pub fn late_fusion_candidates(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
) -> CandidateLists {
    let run = |sq: &SubQuery| {
        rank_part(
            &index.documents,
            &sq.tokens(),
            params,
            PartRole::Document,
            params.candidate_k,
        )
    };
    let entity = query
        .entity_subqueries()
        .iter()
        .map(|sq| aggregate_entities(index, &run(sq)))
        .collect();
    let relationship = query
        .relationship_subqueries()
        .iter()
        .map(|sq| aggregate_pairs(index, &run(sq)))
        .collect();
    CandidateLists {
        entity,
        relationship,
    }
}

/// Canonical identity of a tuple's entity sequence: a chain read backwards
/// names the same result.
fn canonical_key(t: &CandidateTuple) -> String {
    let forward = t.key();
    let mut rev = t.entities.clone();
    rev.reverse();
    let backward = crate::types::tuple_key(&rev);
    forward.min(backward)
}

/// Rank tuples by late fusion. Orientations of the same entity set are
/// collapsed to the best-scoring one before the cap is applied.
pub fn late_fusion_score(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
) -> Vec<CandidateTuple> {
    let lists = late_fusion_candidates(index, query, params);
    let mut tuples = enumerate_joined(&lists);
    rank_tuples(&mut tuples, usize::MAX);
    let mut seen = std::collections::BTreeSet::new();
    tuples.retain(|t| seen.insert(canonical_key(t)));
    tuples.truncate(params.result_cap);
    tuples
}
