//! Entity-relationship retrieval over annotated text corpora.
//!
//! The pipeline: annotated documents are segmented into sentences, per-sentence
//! entity and entity-pair contexts are extracted and folded into meta-document
//! indexes, and structured queries (alternating entity / relationship sub-queries)
//! are answered by scoring meta-documents and joining them into entity tuples.
//! On top of that sit a feature-based ranking model trained by coordinate ascent,
//! standard rank metrics, and a builder that turns entity-linked web tables into
//! test collections (query skeletons + relevance judgments).

pub mod collection;
pub mod corpus;
pub mod eval;
pub mod extraction;
pub mod index;
pub mod ltr;
pub mod query;
pub mod scoring;
pub mod text;
pub mod types;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path} at line {line}: {source}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    MalformedJson {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("duplicate doc_id {doc_id:?}")]
    DuplicateDocId { doc_id: String },

    #[error("doc {doc_id:?}: mention [{start}, {end}) out of bounds (text has {len} chars)")]
    MentionOutOfBounds {
        doc_id: String,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("doc {doc_id:?}: mention surface {surface:?} does not match text span {span:?}")]
    SurfaceMismatch {
        doc_id: String,
        surface: String,
        span: String,
    },

    #[error("doc {doc_id:?}: mentions [{a_start}, {a_end}) and [{b_start}, {b_end}) overlap")]
    OverlappingMentions {
        doc_id: String,
        a_start: usize,
        a_end: usize,
        b_start: usize,
        b_end: usize,
    },

    #[error("doc {doc_id:?}: invalid entity id {entity_id:?} ({reason})")]
    InvalidEntityId {
        doc_id: String,
        entity_id: String,
        reason: &'static str,
    },

    #[error("a relationship pair needs two distinct entities, got {entity:?} twice")]
    SelfPair { entity: String },

    #[error("invalid query {query_id:?}: {reason}")]
    InvalidQuery { query_id: String, reason: String },

    #[error("duplicate query id {query_id:?}")]
    DuplicateQueryId { query_id: String },

    #[error("index snapshot version mismatch: found {found}, expected {expected}")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error("invalid scoring parameters: {reason}")]
    InvalidParams { reason: String },

    #[error("model {model} only supports entity-pair queries (3 sub-queries), got {arity}")]
    ModelArity { model: String, arity: usize },

    #[error("invalid feature weights: {reason}")]
    InvalidWeights { reason: String },

    #[error("fold count {folds} invalid for {queries} queries")]
    BadFoldCount { folds: usize, queries: usize },

    #[error(
        "no relevant tuple is reachable from the candidate pools of any training query; \
         widen candidate generation (larger k) or check the relevance judgments"
    )]
    NoRelevantCandidates,

    #[error("run contains query {query_id:?} which is absent from the qrels")]
    QueryMissingFromQrels { query_id: String },

    #[error("malformed {what} line {line} in {path}: {reason}")]
    MalformedTrecLine {
        what: &'static str,
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("table {table_id:?}: {reason}")]
    InvalidTable { table_id: String, reason: String },

    #[error("query skeleton {query_id:?}: {reason}")]
    InvalidSkeleton { query_id: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Attach a path to an io error (the bare io::Error rarely says which file).
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
