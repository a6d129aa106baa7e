//! Tuple-level ranking features and their weights.
//!
//! A candidate tuple is described by eight aggregate features: unigram /
//! ordered-bigram / unordered-window scores summed over the entity sub-queries
//! and over the relationship sub-queries, plus two compatibility aggregates
//! (entity-pair membership and shared-bridge). The ranking score is the dot
//! product with a weight vector constrained to the probability simplex
//! (non-negative, summing to 1).

use serde::{Deserialize, Serialize};

use super::functions::{
    bridge_compat, entity_pair_compat, subquery_stats, PartRole, PartScorer, SubqueryStats,
};
use super::ScoringParams;
use crate::index::ERIndex;
use crate::query::ERQuery;
use crate::types::{EntityId, PairKey};
use crate::{Error, Result};

pub const FEATURE_COUNT: usize = 8;

/// Feature slots, in the canonical array order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    EntityUnigram = 0,
    EntityOrdered = 1,
    EntityUnordered = 2,
    RelationshipUnigram = 3,
    RelationshipOrdered = 4,
    RelationshipUnordered = 5,
    EntityPair = 6,
    Bridge = 7,
}

/// Aggregate feature values of one candidate tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn get(&self, f: Feature) -> f64 {
        self.0[f as usize]
    }
}

/// Weights over the eight features, kept on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureWeights {
    pub entity_unigram: f64,
    pub entity_ordered: f64,
    pub entity_unordered: f64,
    pub relationship_unigram: f64,
    pub relationship_ordered: f64,
    pub relationship_unordered: f64,
    pub entity_pair: f64,
    pub bridge: f64,
}

impl FeatureWeights {
    pub fn uniform() -> Self {
        FeatureWeights::from_array([1.0 / FEATURE_COUNT as f64; FEATURE_COUNT])
    }

    /// Equal weight on the two unigram features, zero elsewhere. With this
    /// setting the model ranks exactly like plain early fusion (the score is
    /// half the sum of the two unigram aggregates).
    pub fn unigram_only() -> Self {
        let mut a = [0.0; FEATURE_COUNT];
        a[Feature::EntityUnigram as usize] = 0.5;
        a[Feature::RelationshipUnigram as usize] = 0.5;
        FeatureWeights::from_array(a)
    }

    pub fn as_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.entity_unigram,
            self.entity_ordered,
            self.entity_unordered,
            self.relationship_unigram,
            self.relationship_ordered,
            self.relationship_unordered,
            self.entity_pair,
            self.bridge,
        ]
    }

    pub fn from_array(a: [f64; FEATURE_COUNT]) -> Self {
        FeatureWeights {
            entity_unigram: a[0],
            entity_ordered: a[1],
            entity_unordered: a[2],
            relationship_unigram: a[3],
            relationship_ordered: a[4],
            relationship_unordered: a[5],
            entity_pair: a[6],
            bridge: a[7],
        }
    }

    /// Check simplex membership: non-negative entries summing to 1 (within a
    /// small tolerance for accumulated float error).
    pub fn validate(&self) -> Result<()> {
        let a = self.as_array();
        if a.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidWeights {
                reason: "non-finite weight".into(),
            });
        }
        if let Some(w) = a.iter().find(|w| **w < -1e-9) {
            return Err(Error::InvalidWeights {
                reason: format!("negative weight {w}"),
            });
        }
        let sum: f64 = a.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidWeights {
                reason: format!("weights sum to {sum}, expected 1"),
            });
        }
        Ok(())
    }

    /// Rescale onto the simplex. Errors when the mass is zero or negative.
    pub fn normalized(&self) -> Result<Self> {
        let a = self.as_array();
        let sum: f64 = a.iter().sum();
        if !sum.is_finite() || sum <= 0.0 || a.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidWeights {
                reason: format!("cannot normalize weights with sum {sum}"),
            });
        }
        let mut out = a;
        for w in &mut out {
            *w /= sum;
        }
        Ok(FeatureWeights::from_array(out))
    }

    /// Weighted sum, accumulated in feature-array order. The fold order is
    /// part of the scoring contract: downstream tie behavior depends on
    /// bitwise-reproducible sums.
    pub fn dot(&self, f: &FeatureVector) -> f64 {
        self.as_array()
            .iter()
            .zip(&f.0)
            .fold(0.0, |s, (w, x)| s + w * x)
    }
}

/// Per-query feature computer: resolves scorers and collection statistics
/// once, then evaluates the eight aggregates per candidate tuple.
pub struct QueryFeaturizer<'a> {
    index: &'a ERIndex,
    window: usize,
    alpha: f64,
    entity_scorer: PartScorer<'a>,
    relationship_scorer: PartScorer<'a>,
    entity_slots: Vec<SubqueryStats>,
    relationship_slots: Vec<SubqueryStats>,
}

impl<'a> QueryFeaturizer<'a> {
    pub fn new(index: &'a ERIndex, query: &ERQuery, params: &ScoringParams) -> Self {
        let entity_scorer = params.scorer(&index.entities, PartRole::Entity);
        let relationship_scorer = params.scorer(&index.relationships, PartRole::Relationship);
        let entity_slots = query
            .entity_subqueries()
            .iter()
            .map(|sq| subquery_stats(&index.entities, &sq.tokens(), params.window))
            .collect();
        let relationship_slots = query
            .relationship_subqueries()
            .iter()
            .map(|sq| subquery_stats(&index.relationships, &sq.tokens(), params.window))
            .collect();
        QueryFeaturizer {
            index,
            window: params.window,
            alpha: params.alpha,
            entity_scorer,
            relationship_scorer,
            entity_slots,
            relationship_slots,
        }
    }

    /// Aggregate features of one tuple. `entities` must have one entry per
    /// entity sub-query and `pairs` one per relationship sub-query.
    pub fn features(&self, entities: &[EntityId], pairs: &[PairKey]) -> FeatureVector {
        debug_assert_eq!(entities.len(), self.entity_slots.len());
        debug_assert_eq!(pairs.len(), self.relationship_slots.len());

        let mut f = [0.0; FEATURE_COUNT];
        for (e, stats) in entities.iter().zip(&self.entity_slots) {
            let doc = self.index.entities.get(e.as_str());
            f[Feature::EntityUnigram as usize] +=
                self.entity_scorer.unigram_sum(doc, &stats.terms);
            let (ordered, unordered) = self.entity_scorer.bigram_sums(doc, stats, self.window);
            f[Feature::EntityOrdered as usize] += ordered;
            f[Feature::EntityUnordered as usize] += unordered;
        }
        for (p, stats) in pairs.iter().zip(&self.relationship_slots) {
            let doc = self.index.relationships.get(&p.label());
            f[Feature::RelationshipUnigram as usize] +=
                self.relationship_scorer.unigram_sum(doc, &stats.terms);
            let (ordered, unordered) =
                self.relationship_scorer.bigram_sums(doc, stats, self.window);
            f[Feature::RelationshipOrdered as usize] += ordered;
            f[Feature::RelationshipUnordered as usize] += unordered;
        }
        // entity/pair compatibility: each relationship slot couples with its
        // two adjacent entity slots
        let total_pairs = self.index.total_pairs();
        for (i, p) in pairs.iter().enumerate() {
            for e in [&entities[i], &entities[i + 1]] {
                f[Feature::EntityPair as usize] += entity_pair_compat(
                    e,
                    p,
                    self.index.membership_count(e),
                    total_pairs,
                    self.alpha,
                );
            }
        }
        // bridge compatibility: each interior entity couples with the pairs on
        // both sides
        for i in 1..entities.len().saturating_sub(1) {
            f[Feature::Bridge as usize] += bridge_compat(&entities[i], &pairs[i - 1], &pairs[i]);
        }
        FeatureVector(f)
    }
}
