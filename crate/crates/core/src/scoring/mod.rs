//! Ranking models over the entity/relationship indexes.
//!
//! Shared pipeline: per-sub-query candidate generation, chain join into
//! entity tuples, then model-specific scoring — plain sub-query score sums
//! (early fusion), weighted feature aggregates (the dependence model), raw
//! document score aggregation (late fusion), or one of the flat pair
//! baselines.

pub mod baselines;
pub mod candidates;
pub mod features;
pub mod functions;
pub mod fusion;
pub mod join;

pub use baselines::{base_e, base_ee, base_r, sdm_rank};
pub use candidates::{generate_candidates, rank_part, sort_scored, CandidateLists, ScoredKey};
pub use features::{Feature, FeatureVector, FeatureWeights, QueryFeaturizer, FEATURE_COUNT};
pub use functions::{
    bm25_score, bridge_compat, entity_pair_compat, lm_score, subquery_stats, BigramStats,
    PartRole, PartScorer, ScorerFamily, SubqueryStats, UNSEEN_SCORE,
};
pub use fusion::{late_fusion_candidates, late_fusion_score};
pub use join::{
    enumerate_joined, rank_tuples, rescore_with_features, tuples_with_features, CandidateTuple,
};

use serde::{Deserialize, Serialize};

use crate::index::{ERIndex, IndexPart};
use crate::query::ERQuery;
use crate::{Error, Result};

/// All scoring knobs. Defaults reproduce the standard configuration:
/// language-model scoring with per-part average-length smoothing, BM25
/// constants 1.2/0.75, window width 8, 20000 candidates per sub-query, 100
/// results per query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringParams {
    pub family: ScorerFamily,
    /// Smoothing mass for entity meta-documents; collection average when unset.
    pub mu_entity: Option<f64>,
    /// Smoothing mass for relationship meta-documents; collection average when unset.
    pub mu_relationship: Option<f64>,
    /// Smoothing mass for raw documents (late fusion); collection average when unset.
    pub mu_document: Option<f64>,
    pub k1: f64,
    pub b: f64,
    /// Membership-smoothing weight of the entity/pair compatibility feature.
    pub alpha: f64,
    /// Unordered co-occurrence window width, in tokens.
    pub window: usize,
    /// First-pass depth per sub-query.
    pub candidate_k: usize,
    /// Final ranked-list depth per query.
    pub result_cap: usize,
    /// (unigram, ordered, unordered) weights of the baselines' scorer.
    pub sdm_weights: (f64, f64, f64),
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            family: ScorerFamily::LanguageModel,
            mu_entity: None,
            mu_relationship: None,
            mu_document: None,
            k1: 1.2,
            b: 0.75,
            alpha: 0.1,
            window: 8,
            candidate_k: 20_000,
            result_cap: 100,
            sdm_weights: (0.85, 0.10, 0.05),
        }
    }
}

impl ScoringParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParams { reason });
        for (name, mu) in [
            ("mu_entity", self.mu_entity),
            ("mu_relationship", self.mu_relationship),
            ("mu_document", self.mu_document),
        ] {
            if let Some(m) = mu {
                if !m.is_finite() || m <= 0.0 {
                    return bad(format!("{name} must be positive, got {m}"));
                }
            }
        }
        if !self.k1.is_finite() || self.k1 <= 0.0 {
            return bad(format!("k1 must be positive, got {}", self.k1));
        }
        if !self.b.is_finite() || !(0.0..=1.0).contains(&self.b) {
            return bad(format!("b must lie in [0,1], got {}", self.b));
        }
        if !self.alpha.is_finite() || !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0,1], got {}", self.alpha));
        }
        if self.window < 2 {
            return bad(format!("window must be at least 2, got {}", self.window));
        }
        if self.candidate_k == 0 {
            return bad("candidate_k must be at least 1".into());
        }
        if self.result_cap == 0 {
            return bad("result_cap must be at least 1".into());
        }
        let (t, o, u) = self.sdm_weights;
        if [t, o, u].iter().any(|w| !w.is_finite() || *w < 0.0) || t + o + u <= 0.0 {
            return bad(format!(
                "sdm_weights must be non-negative with positive sum, got ({t}, {o}, {u})"
            ));
        }
        Ok(())
    }

    /// Bind a scorer to one index part, resolving the smoothing override for
    /// its role.
    pub fn scorer<'a>(&self, part: &'a IndexPart, role: PartRole) -> PartScorer<'a> {
        let mu_override = match role {
            PartRole::Entity => self.mu_entity,
            PartRole::Relationship => self.mu_relationship,
            PartRole::Document => self.mu_document,
        };
        PartScorer {
            part,
            family: self.family,
            mu: mu_override.unwrap_or(part.stats.mu),
            k1: self.k1,
            b: self.b,
        }
    }
}

/// Ranking model selector.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// Sum of per-sub-query meta-document scores.
    EarlyFusion,
    /// Weighted feature aggregates over the joined tuples.
    Erdm(FeatureWeights),
    /// Raw-document score aggregation.
    LateFusion,
    /// Cross product of two half-query entity runs.
    BaseEE,
    /// Cross product of one full-query entity run with itself.
    BaseE,
    /// Full-sentence pair index, concatenated query.
    BaseR,
}

/// Rank one query under one model. The output is sorted by score descending
/// (ties by tuple key) and capped at `params.result_cap`.
pub fn search(
    index: &ERIndex,
    query: &ERQuery,
    params: &ScoringParams,
    model: &Model,
) -> Result<Vec<CandidateTuple>> {
    params.validate()?;
    match model {
        Model::EarlyFusion => {
            let lists = generate_candidates(index, query, params);
            let mut tuples = enumerate_joined(&lists);
            rank_tuples(&mut tuples, params.result_cap);
            Ok(tuples)
        }
        Model::Erdm(weights) => {
            weights.validate()?;
            let lists = generate_candidates(index, query, params);
            let mut tuples = enumerate_joined(&lists);
            rescore_with_features(index, query, params, weights, &mut tuples);
            rank_tuples(&mut tuples, params.result_cap);
            Ok(tuples)
        }
        Model::LateFusion => Ok(late_fusion_score(index, query, params)),
        Model::BaseEE => base_ee(index, query, params),
        Model::BaseE => base_e(index, query, params),
        Model::BaseR => base_r(index, query, params),
    }
}
