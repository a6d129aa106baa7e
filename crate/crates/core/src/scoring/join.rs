//! Chain join of per-sub-query candidate lists into entity tuples.
//!
//! A result tuple assigns one entity per entity sub-query and one pair per
//! relationship sub-query such that each pair contains its two adjacent
//! entities and consecutive pairs overlap in exactly the bridging entity.
//! Relationship candidates drive the join; an orientation survives only when
//! both of its entities were retrieved by their own sub-queries.

use std::collections::BTreeMap;

use super::candidates::CandidateLists;
use super::features::{FeatureVector, FeatureWeights, QueryFeaturizer};
use super::ScoringParams;
use crate::index::ERIndex;
use crate::query::ERQuery;
use crate::types::{tuple_key, EntityId, PairKey};

/// One joined result: entities in sub-query order plus the pairs that link
/// them, with the first-pass score of every sub-query slot.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTuple {
    pub entities: Vec<EntityId>,
    pub pairs: Vec<PairKey>,
    /// First-pass scores in query order (entity, relationship, entity, ...).
    pub per_subquery_scores: Vec<f64>,
    pub joint_score: f64,
}

impl CandidateTuple {
    /// Run-file key: entity ids joined by '|' in sub-query order.
    pub fn key(&self) -> String {
        tuple_key(&self.entities)
    }
}

/// Scores of one candidate list, keyed for O(log n) membership checks.
fn score_map(list: &[super::candidates::ScoredKey]) -> BTreeMap<&str, f64> {
    list.iter().map(|s| (s.key.as_str(), s.score)).collect()
}

/// Relationship candidates of one slot, grouped by member entity so the chain
/// extension only scans pairs containing the bridge.
struct PairSlot {
    /// (pair, score) in candidate-list order.
    pairs: Vec<(PairKey, f64)>,
    /// entity id -> indices into `pairs`, preserving candidate-list order.
    by_member: BTreeMap<String, Vec<usize>>,
}

impl PairSlot {
    fn new(list: &[super::candidates::ScoredKey]) -> PairSlot {
        let mut pairs = Vec::with_capacity(list.len());
        let mut by_member: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for s in list {
            // candidate keys come from the relationship index, whose keys are
            // canonical pair labels by construction
            let pair = PairKey::parse(&s.key).expect("relationship index key is a pair label");
            let i = pairs.len();
            by_member
                .entry(pair.first().0.clone())
                .or_default()
                .push(i);
            by_member
                .entry(pair.second().0.clone())
                .or_default()
                .push(i);
            pairs.push((pair, s.score));
        }
        PairSlot { pairs, by_member }
    }
}

/// Enumerate every tuple satisfying the join constraints, scored as the plain
/// sum of its sub-query scores (the early-fusion joint score). No truncation
/// is applied; callers rank and cap.
pub fn enumerate_joined(lists: &CandidateLists) -> Vec<CandidateTuple> {
    let entity_maps: Vec<BTreeMap<&str, f64>> = lists.entity.iter().map(|l| score_map(l)).collect();
    if lists.relationship.is_empty() {
        // single-entity query: every retrieved entity is its own tuple
        debug_assert_eq!(lists.entity.len(), 1);
        return lists.entity[0]
            .iter()
            .map(|s| CandidateTuple {
                entities: vec![EntityId(s.key.clone())],
                pairs: Vec::new(),
                per_subquery_scores: vec![s.score],
                joint_score: s.score,
            })
            .collect();
    }

    let slots: Vec<PairSlot> = lists.relationship.iter().map(|l| PairSlot::new(l)).collect();
    let mut out = Vec::new();
    // seed the chain with every orientation of every first-slot pair
    for (pair, pair_score) in &slots[0].pairs {
        for (left, right) in [
            (pair.first(), pair.second()),
            (pair.second(), pair.first()),
        ] {
            let (Some(&ls), Some(&rs)) = (
                entity_maps[0].get(left.as_str()),
                entity_maps[1].get(right.as_str()),
            ) else {
                continue;
            };
            let chain = Chain {
                entities: vec![left.clone(), right.clone()],
                pairs: vec![pair.clone()],
                scores: vec![ls, *pair_score, rs],
            };
            extend_chain(chain, 1, &slots, &entity_maps, &mut out);
        }
    }
    out
}

struct Chain {
    entities: Vec<EntityId>,
    pairs: Vec<PairKey>,
    scores: Vec<f64>,
}

fn extend_chain(
    chain: Chain,
    slot: usize,
    slots: &[PairSlot],
    entity_maps: &[BTreeMap<&str, f64>],
    out: &mut Vec<CandidateTuple>,
) {
    if slot == slots.len() {
        // Entity slots first, then relationship slots, matching the
        // accumulation order of the tuple feature aggregates: tuples whose
        // unigram aggregates tie bitwise then tie here too, and every ranking
        // breaks the tie on the key.
        let entity_sum: f64 = chain.scores.iter().step_by(2).sum();
        let relationship_sum: f64 = chain.scores.iter().skip(1).step_by(2).sum();
        let joint = entity_sum + relationship_sum;
        out.push(CandidateTuple {
            entities: chain.entities,
            pairs: chain.pairs,
            per_subquery_scores: chain.scores,
            joint_score: joint,
        });
        return;
    }
    let bridge = chain.entities.last().expect("chain starts with two entities");
    let prev_pair = chain.pairs.last().expect("chain starts with one pair");
    let Some(indices) = slots[slot].by_member.get(bridge.as_str()) else {
        return;
    };
    for &i in indices {
        let (pair, pair_score) = &slots[slot].pairs[i];
        // consecutive pairs must differ; sharing the bridge then forces them
        // to overlap in exactly that one entity
        if pair == prev_pair {
            continue;
        }
        let next = pair.other(bridge).expect("indexed by member");
        let Some(&next_score) = entity_maps[slot + 1].get(next.as_str()) else {
            continue;
        };
        let mut entities = chain.entities.clone();
        let mut pairs = chain.pairs.clone();
        let mut scores = chain.scores.clone();
        entities.push(next.clone());
        pairs.push(pair.clone());
        // query order: ..., E_i, R_i, E_{i+1}
        scores.push(*pair_score);
        scores.push(next_score);
        extend_chain(
            Chain {
                entities,
                pairs,
                scores,
            },
            slot + 1,
            slots,
            entity_maps,
            out,
        );
    }
}

/// Sort by joint score descending, tuple key ascending, and truncate.
pub fn rank_tuples(tuples: &mut Vec<CandidateTuple>, cap: usize) {
    tuples.sort_by(|a, b| {
        b.joint_score
            .partial_cmp(&a.joint_score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.key().cmp(&b.key()))
    });
    tuples.truncate(cap);
}

/// Replace every tuple's joint score with the weighted feature score.
pub fn rescore_with_features(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
    weights: &FeatureWeights,
    tuples: &mut [CandidateTuple],
) {
    let featurizer = QueryFeaturizer::new(index, query, params);
    for t in tuples {
        let f = featurizer.features(&t.entities, &t.pairs);
        t.joint_score = weights.dot(&f);
    }
}

/// Joined tuples with their feature vectors, uncapped — the raw material for
/// weight training.
pub fn tuples_with_features(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
) -> Vec<(CandidateTuple, FeatureVector)> {
    let lists = super::candidates::generate_candidates(index, query, params);
    let featurizer = QueryFeaturizer::new(index, query, params);
    enumerate_joined(&lists)
        .into_iter()
        .map(|t| {
            let f = featurizer.features(&t.entities, &t.pairs);
            (t, f)
        })
        .collect()
}
