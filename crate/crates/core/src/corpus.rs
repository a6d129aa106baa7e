//! Annotated corpus model: documents, entity mentions, and sentences.
//!
//! Corpus files are JSON Lines, one document per line:
//!
//! ```text
//! {"doc_id": "d1", "text": "...", "mentions": [{"entity_id": "e", "start": 0, "end": 3, "surface": "Tom"}]}
//! ```
//!
//! Mention offsets are character offsets into `text` (end-exclusive), and the
//! surface string must match the annotated span exactly. Validation is strict:
//! a corpus that loads is safe for every downstream stage.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text::{sentence_spans, tokenize_char_range, Token};
use crate::types::{DocId, EntityId};
use crate::{Error, Result};

/// A single entity mention inside a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub entity_id: EntityId,
    /// Character offset of the first character of the mention (inclusive).
    pub start: usize,
    /// Character offset one past the last character (exclusive).
    pub end: usize,
    /// The mention text as it appears in the document.
    pub surface: String,
}

/// A document with its entity annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: DocId,
    pub text: String,
    #[serde(default)]
    pub mentions: Vec<Mention>,
}

/// A validated collection of annotated documents with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<AnnotatedDocument>,
}

/// One sentence of a document, carrying its tokens and the mentions whose
/// spans start inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub doc_id: DocId,
    /// Position of the sentence within its document, starting at 0.
    pub index: usize,
    /// Character span of the sentence (end-exclusive).
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<Token>,
    /// Mentions assigned to this sentence, ordered by start offset.
    pub mentions: Vec<Mention>,
}

impl Corpus {
    /// Validate every document and reject duplicate ids.
    pub fn new(docs: Vec<AnnotatedDocument>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for doc in &docs {
            if !seen.insert(doc.doc_id.clone()) {
                return Err(Error::DuplicateDocId {
                    doc_id: doc.doc_id.to_string(),
                });
            }
            validate_document(doc)?;
        }
        Ok(Corpus { docs })
    }

    pub fn docs(&self) -> &[AnnotatedDocument] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Check mention offsets, surfaces, overlap, and entity id well-formedness.
pub fn validate_document(doc: &AnnotatedDocument) -> Result<()> {
    let chars: Vec<char> = doc.text.chars().collect();
    let len = chars.len();
    for m in &doc.mentions {
        if let Err(reason) = m.entity_id.check_well_formed() {
            return Err(Error::InvalidEntityId {
                doc_id: doc.doc_id.to_string(),
                entity_id: m.entity_id.to_string(),
                reason,
            });
        }
        if m.start >= m.end || m.end > len {
            return Err(Error::MentionOutOfBounds {
                doc_id: doc.doc_id.to_string(),
                start: m.start,
                end: m.end,
                len,
            });
        }
        let span: String = chars[m.start..m.end].iter().collect();
        if span != m.surface {
            return Err(Error::SurfaceMismatch {
                doc_id: doc.doc_id.to_string(),
                surface: m.surface.clone(),
                span,
            });
        }
    }
    // overlap check over mentions sorted by start
    let mut order: Vec<usize> = (0..doc.mentions.len()).collect();
    order.sort_by_key(|&i| (doc.mentions[i].start, doc.mentions[i].end));
    for w in order.windows(2) {
        let a = &doc.mentions[w[0]];
        let b = &doc.mentions[w[1]];
        if b.start < a.end {
            return Err(Error::OverlappingMentions {
                doc_id: doc.doc_id.to_string(),
                a_start: a.start,
                a_end: a.end,
                b_start: b.start,
                b_end: b.end,
            });
        }
    }
    Ok(())
}

/// Split a document into sentences, assigning each mention to the sentence
/// that contains its start offset (mentions crossing a boundary stay with the
/// sentence they start in).
pub fn segment_sentences(doc: &AnnotatedDocument) -> Vec<Sentence> {
    let chars: Vec<char> = doc.text.chars().collect();
    let spans = sentence_spans(&doc.text);
    let mut sentences: Vec<Sentence> = spans
        .iter()
        .enumerate()
        .map(|(index, &(start, end))| Sentence {
            doc_id: doc.doc_id.clone(),
            index,
            start,
            end,
            tokens: tokenize_char_range(&chars, start, end),
            mentions: Vec::new(),
        })
        .collect();
    let mut ms: Vec<Mention> = doc.mentions.clone();
    ms.sort_by_key(|m| (m.start, m.end));
    for m in ms {
        // spans partition [0, len), so this always finds exactly one sentence
        if let Some(s) = sentences
            .iter_mut()
            .find(|s| s.start <= m.start && m.start < s.end)
        {
            s.mentions.push(m);
        }
    }
    sentences
}

/// Load and validate a JSONL corpus. Errors carry the 1-based line number.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: AnnotatedDocument =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: i + 1,
                source: e,
            })?;
        docs.push(doc);
    }
    Corpus::new(docs)
}

/// Write a corpus as JSONL, one document per line, in stored order.
pub fn write_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for doc in corpus.docs() {
        let line = serde_json::to_string(doc).expect("document serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
