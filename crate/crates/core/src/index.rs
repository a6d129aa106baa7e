//! Meta-document indexes and collection statistics.
//!
//! Each index part (entities, separating-string relationships, full-sentence
//! relationships, raw documents) maps a key to a [`MetaDocument`]: the bag of
//! terms accumulated over all of the key's extracted contexts, plus the
//! contexts themselves in positional form. Positional contexts are kept
//! because ordered-bigram and unordered-window statistics must never count a
//! pair of terms that straddles an extraction boundary.
//!
//! Determinism: all maps are ordered, contexts are accumulated in
//! `(doc_id, sentence_index)` order over a sorted view of the corpus, so the
//! same document set produces the identical index regardless of input order.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{segment_sentences, Corpus};
use crate::extraction::{
    extract_entity_contexts, extract_pair_sentence_contexts, extract_relationship_contexts,
};
use crate::types::{DocId, EntityId, PairKey};
use crate::{Error, Result};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Bag-of-terms view of one indexed key, with its contexts kept positionally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDocument {
    pub key: String,
    pub term_freqs: BTreeMap<String, u64>,
    /// One token list per extracted context, in accumulation order.
    pub positional_contexts: Vec<Vec<String>>,
    /// Total number of tokens across all contexts.
    pub length: u64,
}

impl MetaDocument {
    fn from_contexts(key: String, contexts: Vec<Vec<String>>) -> Self {
        let mut term_freqs: BTreeMap<String, u64> = BTreeMap::new();
        let mut length = 0u64;
        for ctx in &contexts {
            length += ctx.len() as u64;
            for t in ctx {
                *term_freqs.entry(t.clone()).or_insert(0) += 1;
            }
        }
        MetaDocument {
            key,
            term_freqs,
            positional_contexts: contexts,
            length,
        }
    }

    pub fn tf(&self, term: &str) -> u64 {
        self.term_freqs.get(term).copied().unwrap_or(0)
    }

    /// Occurrences of the ordered bigram `t1 t2` (adjacent, in this order),
    /// counted within each context separately; overlapping matches count.
    pub fn ordered_bigram_tf(&self, t1: &str, t2: &str) -> u64 {
        self.positional_contexts
            .iter()
            .map(|ctx| count_ordered_bigram(ctx, t1, t2))
            .sum()
    }

    /// Co-occurrences of `t1` and `t2` within a token window of size `window`,
    /// counted within each context separately. See [`count_unordered_window`].
    pub fn unordered_window_tf(&self, t1: &str, t2: &str, window: usize) -> u64 {
        self.positional_contexts
            .iter()
            .map(|ctx| count_unordered_window(ctx, t1, t2, window))
            .sum()
    }
}

/// Ordered bigram count in a single context: positions i with
/// `ctx[i] == t1 && ctx[i+1] == t2`. Overlaps allowed: ["a","a","a"] contains
/// ("a","a") twice.
pub fn count_ordered_bigram(ctx: &[String], t1: &str, t2: &str) -> u64 {
    if ctx.len() < 2 {
        return 0;
    }
    let mut n = 0;
    for i in 0..ctx.len() - 1 {
        if ctx[i] == t1 && ctx[i + 1] == t2 {
            n += 1;
        }
    }
    n
}

/// Unordered-window count in a single context: the number of disjoint
/// occurrence pairs (one of `t1`, one of `t2`) within distance `window - 1`,
/// matched greedily left-to-right (equivalently: the maximum matching, at most
/// `min(occ(t1), occ(t2))`). When `t1 == t2`, consecutive unused occurrences
/// are paired instead.
pub fn count_unordered_window(ctx: &[String], t1: &str, t2: &str, window: usize) -> u64 {
    debug_assert!(window >= 2);
    let max_dist = window - 1;
    if t1 == t2 {
        let pos: Vec<usize> = ctx
            .iter()
            .enumerate()
            .filter_map(|(i, t)| (t == t1).then_some(i))
            .collect();
        let mut n = 0;
        let mut i = 0;
        while i + 1 < pos.len() {
            if pos[i + 1] - pos[i] <= max_dist {
                n += 1;
                i += 2;
            } else {
                i += 1;
            }
        }
        return n;
    }
    let p1: Vec<usize> = ctx
        .iter()
        .enumerate()
        .filter_map(|(i, t)| (t == t1).then_some(i))
        .collect();
    let p2: Vec<usize> = ctx
        .iter()
        .enumerate()
        .filter_map(|(i, t)| (t == t2).then_some(i))
        .collect();
    let mut n = 0;
    let (mut i, mut j) = (0, 0);
    while i < p1.len() && j < p2.len() {
        let d = p1[i].abs_diff(p2[j]);
        if d <= max_dist {
            n += 1;
            i += 1;
            j += 1;
        } else if p1[i] < p2[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    n
}

/// Collection-level statistics of one index part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionStats {
    /// Number of meta-documents.
    pub doc_count: u64,
    /// Total token count over all meta-documents.
    pub total_terms: u64,
    /// Average meta-document length (0.0 for an empty part).
    pub avg_doc_len: f64,
    /// Default smoothing mass: the average meta-document length. Scoring
    /// parameters may override it per part.
    pub mu: f64,
    /// Collection frequency per term.
    pub cf: BTreeMap<String, u64>,
    /// Document frequency per term (number of meta-documents containing it).
    pub df: BTreeMap<String, u64>,
}

impl CollectionStats {
    pub fn cf(&self, term: &str) -> u64 {
        self.cf.get(term).copied().unwrap_or(0)
    }

    pub fn df(&self, term: &str) -> u64 {
        self.df.get(term).copied().unwrap_or(0)
    }
}

/// One meta-document index: keyed documents, statistics, and a term->keys
/// postings map for candidate generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPart {
    pub docs: BTreeMap<String, MetaDocument>,
    pub stats: CollectionStats,
    /// term -> sorted keys of meta-documents containing it. Rebuilt on load,
    /// not serialized.
    #[serde(skip)]
    postings: BTreeMap<String, Vec<String>>,
}

impl IndexPart {
    pub fn from_grouped_contexts(groups: BTreeMap<String, Vec<Vec<String>>>) -> Self {
        let docs: BTreeMap<String, MetaDocument> = groups
            .into_iter()
            .map(|(key, contexts)| {
                let md = MetaDocument::from_contexts(key.clone(), contexts);
                (key, md)
            })
            .collect();
        let mut part = IndexPart {
            stats: compute_stats(&docs),
            docs,
            postings: BTreeMap::new(),
        };
        part.rebuild_postings();
        part
    }

    pub fn empty() -> Self {
        IndexPart::from_grouped_contexts(BTreeMap::new())
    }

    fn rebuild_postings(&mut self) {
        let mut postings: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (key, md) in &self.docs {
            for term in md.term_freqs.keys() {
                postings.entry(term.clone()).or_default().push(key.clone());
            }
        }
        // keys arrive in BTreeMap order, so each postings list is sorted
        self.postings = postings;
    }

    pub fn get(&self, key: &str) -> Option<&MetaDocument> {
        self.docs.get(key)
    }

    /// Sorted, deduplicated keys of meta-documents containing at least one of
    /// the given terms.
    pub fn matching_keys(&self, terms: &[String]) -> Vec<&String> {
        let mut keys: Vec<&String> = Vec::new();
        for t in terms {
            if let Some(list) = self.postings.get(t) {
                keys.extend(list.iter());
            }
        }
        keys.sort();
        keys.dedup();
        keys
    }

    /// Keys of meta-documents containing both `t1` and `t2` (sorted).
    fn keys_with_both(&self, t1: &str, t2: &str) -> Vec<&String> {
        let Some(l1) = self.postings.get(t1) else {
            return Vec::new();
        };
        if t1 == t2 {
            return l1.iter().collect();
        }
        let Some(l2) = self.postings.get(t2) else {
            return Vec::new();
        };
        // both lists are sorted; merge-intersect
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < l1.len() && j < l2.len() {
            match l1[i].cmp(&l2[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(&l1[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    /// Collection frequency and document frequency of the ordered bigram
    /// `t1 t2` over the whole part.
    pub fn collection_ordered_bigram(&self, t1: &str, t2: &str) -> (u64, u64) {
        let mut cf = 0;
        let mut df = 0;
        for key in self.keys_with_both(t1, t2) {
            let n = self.docs[key].ordered_bigram_tf(t1, t2);
            if n > 0 {
                cf += n;
                df += 1;
            }
        }
        (cf, df)
    }

    /// Collection frequency and document frequency of the unordered window
    /// co-occurrence of `t1`, `t2`.
    pub fn collection_unordered_window(&self, t1: &str, t2: &str, window: usize) -> (u64, u64) {
        let mut cf = 0;
        let mut df = 0;
        for key in self.keys_with_both(t1, t2) {
            let n = self.docs[key].unordered_window_tf(t1, t2, window);
            if n > 0 {
                cf += n;
                df += 1;
            }
        }
        (cf, df)
    }
}

fn compute_stats(docs: &BTreeMap<String, MetaDocument>) -> CollectionStats {
    let doc_count = docs.len() as u64;
    let mut total_terms = 0u64;
    let mut cf: BTreeMap<String, u64> = BTreeMap::new();
    let mut df: BTreeMap<String, u64> = BTreeMap::new();
    for md in docs.values() {
        total_terms += md.length;
        for (t, &n) in &md.term_freqs {
            *cf.entry(t.clone()).or_insert(0) += n;
            *df.entry(t.clone()).or_insert(0) += 1;
        }
    }
    let avg_doc_len = if doc_count == 0 {
        0.0
    } else {
        total_terms as f64 / doc_count as f64
    };
    CollectionStats {
        doc_count,
        total_terms,
        avg_doc_len,
        mu: avg_doc_len,
        cf,
        df,
    }
}

/// Options controlling index construction.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Keep at most this many contexts per key (in canonical corpus order);
    /// `None` keeps everything.
    pub extraction_cap: Option<usize>,
}

/// The full set of indexes built from one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ERIndex {
    /// Entity meta-documents: full-sentence contexts.
    pub entities: IndexPart,
    /// Relationship meta-documents: separating-string contexts per pair.
    pub relationships: IndexPart,
    /// Relationship meta-documents with full-sentence contexts per pair
    /// (used by the flat sentence-level relationship baseline).
    pub pair_sentences: IndexPart,
    /// Raw documents (contexts are the document's sentences).
    pub documents: IndexPart,
    /// entity id -> labels of the pairs it participates in.
    pub membership: BTreeMap<String, BTreeSet<String>>,
    /// doc id -> entity ids mentioned in the document.
    pub doc_entities: BTreeMap<String, BTreeSet<EntityId>>,
}

impl ERIndex {
    /// Number of distinct pairs an entity participates in.
    pub fn membership_count(&self, entity: &EntityId) -> u64 {
        self.membership
            .get(entity.as_str())
            .map(|s| s.len() as u64)
            .unwrap_or(0)
    }

    /// Total number of distinct pairs in the relationship index.
    pub fn total_pairs(&self) -> u64 {
        self.relationships.stats.doc_count
    }
}

/// Build all index parts from a corpus.
///
/// Documents are processed in `doc_id` order whatever the stored order, so
/// the result is independent of corpus permutation.
pub fn build_index(corpus: &Corpus, opts: &IndexOptions) -> Result<ERIndex> {
    let mut order: Vec<usize> = (0..corpus.docs().len()).collect();
    order.sort_by(|&a, &b| corpus.docs()[a].doc_id.cmp(&corpus.docs()[b].doc_id));

    // Per-document extraction is independent; parallelize and then fold in
    // sorted order so accumulation stays deterministic.
    struct DocExtraction {
        doc_id: DocId,
        entity_contexts: Vec<(EntityId, Vec<String>)>,
        rel_contexts: Vec<(PairKey, Vec<String>)>,
        pair_sentence_contexts: Vec<(PairKey, Vec<String>)>,
        doc_contexts: Vec<Vec<String>>,
        entities: BTreeSet<EntityId>,
    }

    let extracted: Vec<Result<DocExtraction>> = order
        .par_iter()
        .map(|&i| {
            let doc = &corpus.docs()[i];
            let sentences = segment_sentences(doc);
            let ents = extract_entity_contexts(&sentences);
            let rels = extract_relationship_contexts(&sentences)?;
            let pair_sents = extract_pair_sentence_contexts(&sentences)?;
            Ok(DocExtraction {
                doc_id: doc.doc_id.clone(),
                entities: ents.iter().map(|e| e.entity_id.clone()).collect(),
                entity_contexts: ents
                    .into_iter()
                    .map(|e| (e.entity_id, e.context_terms))
                    .collect(),
                rel_contexts: rels
                    .into_iter()
                    .map(|r| (r.pair, r.context_terms))
                    .collect(),
                pair_sentence_contexts: pair_sents
                    .into_iter()
                    .map(|r| (r.pair, r.context_terms))
                    .collect(),
                doc_contexts: sentences
                    .into_iter()
                    .map(|s| s.tokens.into_iter().map(|t| t.text).collect())
                    .collect(),
            })
        })
        .collect();

    let mut entity_groups: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut rel_groups: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut pair_sentence_groups: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut doc_groups: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut membership: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut doc_entities: BTreeMap<String, BTreeSet<EntityId>> = BTreeMap::new();

    for ex in extracted {
        let ex = ex?;
        for (e, ctx) in ex.entity_contexts {
            entity_groups.entry(e.0).or_default().push(ctx);
        }
        for (p, ctx) in ex.rel_contexts {
            membership
                .entry(p.first().as_str().to_string())
                .or_default()
                .insert(p.label());
            membership
                .entry(p.second().as_str().to_string())
                .or_default()
                .insert(p.label());
            rel_groups.entry(p.label()).or_default().push(ctx);
        }
        for (p, ctx) in ex.pair_sentence_contexts {
            pair_sentence_groups.entry(p.label()).or_default().push(ctx);
        }
        doc_groups.insert(ex.doc_id.as_str().to_string(), ex.doc_contexts);
        if !ex.entities.is_empty() {
            doc_entities.insert(ex.doc_id.as_str().to_string(), ex.entities);
        }
    }

    if let Some(cap) = opts.extraction_cap {
        for groups in [
            &mut entity_groups,
            &mut rel_groups,
            &mut pair_sentence_groups,
        ] {
            for contexts in groups.values_mut() {
                contexts.truncate(cap);
            }
        }
    }

    Ok(ERIndex {
        entities: IndexPart::from_grouped_contexts(entity_groups),
        relationships: IndexPart::from_grouped_contexts(rel_groups),
        pair_sentences: IndexPart::from_grouped_contexts(pair_sentence_groups),
        documents: IndexPart::from_grouped_contexts(doc_groups),
        membership,
        doc_entities,
    })
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format_version: u32,
    index: ERIndex,
}

/// Persist the index as a single self-describing JSON snapshot.
pub fn save_index(path: impl AsRef<Path>, index: &ERIndex) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let w = BufWriter::new(file);
    let snap = Snapshot {
        format_version: SNAPSHOT_VERSION,
        index: index.clone(),
    };
    serde_json::to_writer(w, &snap).map_err(|e| Error::MalformedJson {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Load a snapshot, verify its version, and rebuild derived structures.
pub fn load_index(path: impl AsRef<Path>) -> Result<ERIndex> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let r = BufReader::new(file);
    let snap: Snapshot = serde_json::from_reader(r).map_err(|e| Error::MalformedJson {
        path: path.to_path_buf(),
        source: e,
    })?;
    if snap.format_version != SNAPSHOT_VERSION {
        return Err(Error::SnapshotVersion {
            found: snap.format_version,
            expected: SNAPSHOT_VERSION,
        });
    }
    let mut index = snap.index;
    index.entities.rebuild_postings();
    index.relationships.rebuild_postings();
    index.pair_sentences.rebuild_postings();
    index.documents.rebuild_postings();
    Ok(index)
}
