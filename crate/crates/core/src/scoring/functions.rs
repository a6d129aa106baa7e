//! Per-term feature functions and per-part scorers.
//!
//! All log-based quantities use base-10 logarithms; the golden fixtures only
//! reproduce under base 10, so this is a load-bearing choice, not a style one.

use serde::{Deserialize, Serialize};

use crate::index::{IndexPart, MetaDocument};
use crate::types::{EntityId, PairKey};

/// Score assigned to a term that does not occur anywhere in the collection
/// (cf = 0), where the smoothed language model would be log(0). A large finite
/// penalty keeps scores totally ordered and arithmetic NaN-free.
pub const UNSEEN_SCORE: f64 = -1e9;

/// Dirichlet-smoothed query-likelihood score of a single term:
/// log10((tf + mu * cf / |C|) / (|D| + mu)).
pub fn lm_score(tf: u64, cf: u64, doc_len: u64, total_terms: u64, mu: f64) -> f64 {
    if cf == 0 || total_terms == 0 {
        return UNSEEN_SCORE;
    }
    let background = mu * cf as f64 / total_terms as f64;
    ((tf as f64 + background) / (doc_len as f64 + mu)).log10()
}

/// BM25 score of a single term: log10((N - n + 0.5) / (n + 0.5)) *
/// tf * (k1 + 1) / (tf + k1 * (1 - b + b * |D| / avg)). The idf factor is not
/// clamped, so terms occurring in more than half the collection contribute
/// negatively. A term absent from the document scores 0.
pub fn bm25_score(
    tf: u64,
    df: u64,
    doc_count: u64,
    doc_len: u64,
    avg_len: f64,
    k1: f64,
    b: f64,
) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    let n = df as f64;
    let idf = ((doc_count as f64 - n + 0.5) / (n + 0.5)).log10();
    let len_ratio = if avg_len > 0.0 {
        doc_len as f64 / avg_len
    } else {
        0.0
    };
    let tf = tf as f64;
    idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * len_ratio))
}

/// Entity/relationship compatibility: a smoothed membership indicator,
/// (1 - alpha) * 1{entity in pair} + alpha * n(entity) / N, where n(entity) is
/// the number of pairs the entity participates in and N is the total number
/// of indexed pairs.
pub fn entity_pair_compat(
    entity: &EntityId,
    pair: &PairKey,
    membership: u64,
    total_pairs: u64,
    alpha: f64,
) -> f64 {
    let indicator = if pair.contains(entity) { 1.0 } else { 0.0 };
    let popularity = if total_pairs == 0 {
        0.0
    } else {
        membership as f64 / total_pairs as f64
    };
    (1.0 - alpha) * indicator + alpha * popularity
}

/// Bridge compatibility of consecutive relationships: 1 when the entity is a
/// member of both pairs, else 0.
pub fn bridge_compat(entity: &EntityId, left: &PairKey, right: &PairKey) -> f64 {
    if left.contains(entity) && right.contains(entity) {
        1.0
    } else {
        0.0
    }
}

/// Scorer family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerFamily {
    LanguageModel,
    Bm25,
}

/// Which index part a sub-query is scored against; selects the smoothing
/// override.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartRole {
    Entity,
    Relationship,
    Document,
}

/// Collection-level statistics of one query bigram against one index part,
/// computed once per query and reused across candidates.
#[derive(Debug, Clone)]
pub struct BigramStats {
    pub t1: String,
    pub t2: String,
    pub ordered_cf: u64,
    pub ordered_df: u64,
    pub unordered_cf: u64,
    pub unordered_df: u64,
}

/// Unigram terms and adjacent-bigram statistics of one sub-query against one
/// index part.
#[derive(Debug, Clone)]
pub struct SubqueryStats {
    pub terms: Vec<String>,
    pub bigrams: Vec<BigramStats>,
}

/// Precompute collection statistics for a token list against an index part.
pub fn subquery_stats(part: &IndexPart, terms: &[String], window: usize) -> SubqueryStats {
    let bigrams = terms
        .windows(2)
        .map(|w| {
            let (ordered_cf, ordered_df) = part.collection_ordered_bigram(&w[0], &w[1]);
            let (unordered_cf, unordered_df) =
                part.collection_unordered_window(&w[0], &w[1], window);
            BigramStats {
                t1: w[0].clone(),
                t2: w[1].clone(),
                ordered_cf,
                ordered_df,
                unordered_cf,
                unordered_df,
            }
        })
        .collect();
    SubqueryStats {
        terms: terms.to_vec(),
        bigrams,
    }
}

/// A scorer bound to one index part with its resolved smoothing mass.
#[derive(Debug, Clone, Copy)]
pub struct PartScorer<'a> {
    pub part: &'a IndexPart,
    pub family: ScorerFamily,
    pub mu: f64,
    pub k1: f64,
    pub b: f64,
}

impl PartScorer<'_> {
    fn doc_len(doc: Option<&MetaDocument>) -> u64 {
        doc.map(|d| d.length).unwrap_or(0)
    }

    /// Single-term score of a (possibly absent) meta-document.
    pub fn unigram(&self, doc: Option<&MetaDocument>, term: &str) -> f64 {
        let tf = doc.map(|d| d.tf(term)).unwrap_or(0);
        match self.family {
            ScorerFamily::LanguageModel => lm_score(
                tf,
                self.part.stats.cf(term),
                Self::doc_len(doc),
                self.part.stats.total_terms,
                self.mu,
            ),
            ScorerFamily::Bm25 => bm25_score(
                tf,
                self.part.stats.df(term),
                self.part.stats.doc_count,
                Self::doc_len(doc),
                self.part.stats.avg_doc_len,
                self.k1,
                self.b,
            ),
        }
    }

    /// Sum of single-term scores over a token list.
    pub fn unigram_sum(&self, doc: Option<&MetaDocument>, terms: &[String]) -> f64 {
        terms.iter().map(|t| self.unigram(doc, t)).sum()
    }

    /// Ordered-bigram score using precomputed collection statistics.
    pub fn ordered_bigram(&self, doc: Option<&MetaDocument>, bg: &BigramStats) -> f64 {
        let tf = doc.map(|d| d.ordered_bigram_tf(&bg.t1, &bg.t2)).unwrap_or(0);
        match self.family {
            ScorerFamily::LanguageModel => lm_score(
                tf,
                bg.ordered_cf,
                Self::doc_len(doc),
                self.part.stats.total_terms,
                self.mu,
            ),
            ScorerFamily::Bm25 => bm25_score(
                tf,
                bg.ordered_df,
                self.part.stats.doc_count,
                Self::doc_len(doc),
                self.part.stats.avg_doc_len,
                self.k1,
                self.b,
            ),
        }
    }

    /// Unordered-window score using precomputed collection statistics.
    pub fn unordered_window(
        &self,
        doc: Option<&MetaDocument>,
        bg: &BigramStats,
        window: usize,
    ) -> f64 {
        let tf = doc
            .map(|d| d.unordered_window_tf(&bg.t1, &bg.t2, window))
            .unwrap_or(0);
        match self.family {
            ScorerFamily::LanguageModel => lm_score(
                tf,
                bg.unordered_cf,
                Self::doc_len(doc),
                self.part.stats.total_terms,
                self.mu,
            ),
            ScorerFamily::Bm25 => bm25_score(
                tf,
                bg.unordered_df,
                self.part.stats.doc_count,
                Self::doc_len(doc),
                self.part.stats.avg_doc_len,
                self.k1,
                self.b,
            ),
        }
    }

    /// Sums of the ordered and unordered bigram scores over a sub-query.
    pub fn bigram_sums(
        &self,
        doc: Option<&MetaDocument>,
        stats: &SubqueryStats,
        window: usize,
    ) -> (f64, f64) {
        let mut ordered = 0.0;
        let mut unordered = 0.0;
        for bg in &stats.bigrams {
            ordered += self.ordered_bigram(doc, bg);
            unordered += self.unordered_window(doc, bg, window);
        }
        (ordered, unordered)
    }
}
