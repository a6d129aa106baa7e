//! First-pass candidate generation.
//!
//! Each sub-query retrieves from its own index part: entity sub-queries from
//! the entity part, relationship sub-queries from the relationship part. Only
//! meta-documents containing at least one query term are scored (standard
//! first-pass retrieval semantics); the survivors are ranked by the unigram
//! score of the configured family and truncated to the top `candidate_k`.

use super::functions::PartRole;
use super::ScoringParams;
use crate::index::{ERIndex, IndexPart};
use crate::query::{ERQuery, SubQuery, SubQueryKind};

/// One scored meta-document key from a first-pass run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredKey {
    pub key: String,
    pub score: f64,
}

/// Sort by score descending, breaking ties by key ascending. Used everywhere
/// a ranked list is produced so that runs are deterministic.
pub fn sort_scored(items: &mut [ScoredKey]) {
    items.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.key.cmp(&b.key))
    });
}

/// Run one sub-query against one index part and keep the top `k` keys.
pub fn rank_part(
    part: &IndexPart,
    terms: &[String],
    params: &ScoringParams,
    role: PartRole,
    k: usize,
) -> Vec<ScoredKey> {
    let scorer = params.scorer(part, role);
    let mut scored: Vec<ScoredKey> = part
        .matching_keys(terms)
        .into_iter()
        .map(|key| ScoredKey {
            score: scorer.unigram_sum(part.get(key), terms),
            key: key.clone(),
        })
        .collect();
    sort_scored(&mut scored);
    scored.truncate(k);
    scored
}

/// Per-sub-query candidate lists, in query order.
#[derive(Debug)]
pub struct CandidateLists {
    /// One list per entity sub-query (sub-query positions 0, 2, 4, ...).
    pub entity: Vec<Vec<ScoredKey>>,
    /// One list per relationship sub-query (positions 1, 3, ...).
    pub relationship: Vec<Vec<ScoredKey>>,
}

/// Generate candidates for every sub-query of `query`.
pub fn generate_candidates(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
) -> CandidateLists {
    let run = |sq: &SubQuery| -> Vec<ScoredKey> {
        match sq.kind {
            SubQueryKind::Entity => rank_part(
                &index.entities,
                &sq.tokens(),
                params,
                PartRole::Entity,
                params.candidate_k,
            ),
            SubQueryKind::Relationship => rank_part(
                &index.relationships,
                &sq.tokens(),
                params,
                PartRole::Relationship,
                params.candidate_k,
            ),
        }
    };
    let entity = query.entity_subqueries().iter().map(|sq| run(sq)).collect();
    let relationship = query
        .relationship_subqueries()
        .iter()
        .map(|sq| run(sq))
        .collect();
    CandidateLists {
        entity,
        relationship,
    }
}
