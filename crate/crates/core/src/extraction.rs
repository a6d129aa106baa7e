//! Context extraction: turn sentences into the raw material of the two
//! meta-document indexes.
//!
//! * An **entity context** is the full token list of a sentence in which the
//!   entity is mentioned (one context per sentence, however many times the
//!   entity is mentioned in it).
//! * A **relationship context** is the token span strictly between the first
//!   mentions of two distinct entities in the same sentence (the "separating
//!   string"). Pairs are unordered and stored under a canonical key.
//! * A **pair-sentence context** is the full sentence for a co-occurring pair;
//!   it feeds the sentence-level relationship index used by the flat
//!   relationship baseline.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::types::{DocId, EntityId, PairKey};
use crate::{Error, Result};

/// One entity context occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityExtraction {
    pub entity_id: EntityId,
    pub doc_id: DocId,
    pub sentence_index: usize,
    pub context_terms: Vec<String>,
}

/// One relationship context occurrence for an unordered entity pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipExtraction {
    pub pair: PairKey,
    pub doc_id: DocId,
    pub sentence_index: usize,
    pub context_terms: Vec<String>,
}

/// Entities of a sentence in first-mention order, with the char span of each
/// entity's first mention.
fn first_mentions(sentence: &Sentence) -> Vec<(EntityId, usize, usize)> {
    let mut seen: Vec<(EntityId, usize, usize)> = Vec::new();
    for m in &sentence.mentions {
        if !seen.iter().any(|(e, _, _)| e == &m.entity_id) {
            seen.push((m.entity_id.clone(), m.start, m.end));
        }
    }
    // sentence.mentions is ordered by start, so `seen` is in first-mention order
    seen
}

/// Emit one entity context per (sentence, distinct entity).
pub fn extract_entity_contexts(sentences: &[Sentence]) -> Vec<EntityExtraction> {
    let mut out = Vec::new();
    for s in sentences {
        let terms: Vec<String> = s.tokens.iter().map(|t| t.text.clone()).collect();
        for (entity_id, _, _) in first_mentions(s) {
            out.push(EntityExtraction {
                entity_id,
                doc_id: s.doc_id.clone(),
                sentence_index: s.index,
                context_terms: terms.clone(),
            });
        }
    }
    out
}

/// Emit one separating-string context per (sentence, unordered pair of
/// distinct entities). The separating string consists of the tokens lying
/// entirely between the end of the earlier first mention and the start of the
/// later one; it may be empty.
pub fn extract_relationship_contexts(sentences: &[Sentence]) -> Result<Vec<RelationshipExtraction>> {
    let mut out = Vec::new();
    for s in sentences {
        let ents = first_mentions(s);
        for i in 0..ents.len() {
            for j in (i + 1)..ents.len() {
                // ents is ordered by first-mention start, so i is the earlier one
                let (ref e1, _, end1) = ents[i];
                let (ref e2, start2, _) = ents[j];
                let terms: Vec<String> = s
                    .tokens
                    .iter()
                    .filter(|t| t.start >= end1 && t.end <= start2)
                    .map(|t| t.text.clone())
                    .collect();
                out.push(RelationshipExtraction {
                    pair: PairKey::new(e1.clone(), e2.clone())?,
                    doc_id: s.doc_id.clone(),
                    sentence_index: s.index,
                    context_terms: terms,
                });
            }
        }
    }
    Ok(out)
}

/// Emit one full-sentence context per (sentence, unordered pair): same pair
/// enumeration as [`extract_relationship_contexts`] but with the whole
/// sentence as the context.
pub fn extract_pair_sentence_contexts(
    sentences: &[Sentence],
) -> Result<Vec<RelationshipExtraction>> {
    let mut out = Vec::new();
    for s in sentences {
        let ents = first_mentions(s);
        let terms: Vec<String> = s.tokens.iter().map(|t| t.text.clone()).collect();
        for i in 0..ents.len() {
            for j in (i + 1)..ents.len() {
                out.push(RelationshipExtraction {
                    pair: PairKey::new(ents[i].0.clone(), ents[j].0.clone())?,
                    doc_id: s.doc_id.clone(),
                    sentence_index: s.index,
                    context_terms: terms.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Tagged record for the extraction dump format.
#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ExtractionRecord<'a> {
    Entity {
        entity_id: &'a EntityId,
        doc_id: &'a DocId,
        sentence_index: usize,
        context_terms: &'a [String],
    },
    Relationship {
        pair: &'a PairKey,
        doc_id: &'a DocId,
        sentence_index: usize,
        context_terms: &'a [String],
    },
}

/// Dump extractions as JSON Lines (entity records first, then relationships),
/// for inspection or external processing.
pub fn write_extractions_jsonl(
    path: impl AsRef<Path>,
    entities: &[EntityExtraction],
    relationships: &[RelationshipExtraction],
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in entities {
        let rec = ExtractionRecord::Entity {
            entity_id: &e.entity_id,
            doc_id: &e.doc_id,
            sentence_index: e.sentence_index,
            context_terms: &e.context_terms,
        };
        writeln!(w, "{}", serde_json::to_string(&rec).expect("serializes"))
            .map_err(|e| Error::io(path, e))?;
    }
    for r in relationships {
        let rec = ExtractionRecord::Relationship {
            pair: &r.pair,
            doc_id: &r.doc_id,
            sentence_index: r.sentence_index,
            context_terms: &r.context_terms,
        };
        writeln!(w, "{}", serde_json::to_string(&rec).expect("serializes"))
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
