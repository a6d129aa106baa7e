//! Structured query model: an odd-length alternation of entity and
//! relationship sub-queries.
//!
//! A query with 2n+1 sub-queries asks for tuples of n+1 entities chained by n
//! relationships: sub-query 0 describes the first entity, sub-query 1 the
//! relationship between entities 1 and 2, and so on. Query files are JSON
//! arrays of objects:
//!
//! ```text
//! [{"query_id": "q1",
//!   "natural_language": "soccer players who dated top models",
//!   "subqueries": [
//!     {"kind": "entity", "terms": "soccer players"},
//!     {"kind": "relationship", "terms": "dated"},
//!     {"kind": "entity", "terms": "top model"}]}]
//! ```

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text::tokenize;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubQueryKind {
    Entity,
    Relationship,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubQuery {
    pub kind: SubQueryKind,
    /// Raw query text; tokenized with the corpus tokenizer for scoring.
    pub terms: String,
}

impl SubQuery {
    pub fn entity(terms: impl Into<String>) -> Self {
        SubQuery {
            kind: SubQueryKind::Entity,
            terms: terms.into(),
        }
    }

    pub fn relationship(terms: impl Into<String>) -> Self {
        SubQuery {
            kind: SubQueryKind::Relationship,
            terms: terms.into(),
        }
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.terms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ERQuery {
    pub query_id: String,
    pub subqueries: Vec<SubQuery>,
    /// Free-text form of the information need; carried as opaque metadata.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub natural_language: Option<String>,
}

impl ERQuery {
    pub fn new(query_id: impl Into<String>, subqueries: Vec<SubQuery>) -> Result<Self> {
        let q = ERQuery {
            query_id: query_id.into(),
            subqueries,
            natural_language: None,
        };
        q.validate()?;
        Ok(q)
    }

    /// Check the alternation invariant: odd count, entity sub-queries at even
    /// positions, relationship sub-queries at odd positions, and every
    /// sub-query tokenizing to at least one term.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidQuery {
                query_id: self.query_id.clone(),
                reason,
            })
        };
        if self.query_id.is_empty() {
            return Err(Error::InvalidQuery {
                query_id: String::new(),
                reason: "empty query_id".into(),
            });
        }
        if self.query_id.chars().any(|c| c.is_whitespace()) {
            return fail("query_id contains whitespace".into());
        }
        if self.subqueries.is_empty() {
            return fail("no sub-queries".into());
        }
        if self.subqueries.len().is_multiple_of(2) {
            return fail(format!(
                "even number of sub-queries ({}): a query must interleave n+1 entity \
                 sub-queries with n relationship sub-queries",
                self.subqueries.len()
            ));
        }
        for (i, sq) in self.subqueries.iter().enumerate() {
            let expected = if i % 2 == 0 {
                SubQueryKind::Entity
            } else {
                SubQueryKind::Relationship
            };
            if sq.kind != expected {
                return fail(format!(
                    "sub-query {i} must be {expected:?} to keep the entity/relationship alternation"
                ));
            }
            if sq.tokens().is_empty() {
                return fail(format!("sub-query {i} has no tokens"));
            }
        }
        Ok(())
    }

    /// Number of sub-queries.
    pub fn arity(&self) -> usize {
        self.subqueries.len()
    }

    /// Number of entities in an answer tuple: (|Q| + 1) / 2.
    pub fn entity_count(&self) -> usize {
        self.subqueries.len().div_ceil(2)
    }

    /// Number of relationships in an answer tuple: (|Q| - 1) / 2.
    pub fn relationship_count(&self) -> usize {
        self.subqueries.len() / 2
    }

    /// Entity sub-queries in slot order.
    pub fn entity_subqueries(&self) -> Vec<&SubQuery> {
        self.subqueries.iter().step_by(2).collect()
    }

    /// Relationship sub-queries in slot order.
    pub fn relationship_subqueries(&self) -> Vec<&SubQuery> {
        self.subqueries.iter().skip(1).step_by(2).collect()
    }

    /// All tokens of all sub-queries, in sub-query order.
    pub fn all_tokens(&self) -> Vec<String> {
        self.subqueries.iter().flat_map(|sq| sq.tokens()).collect()
    }
}

/// Load a JSON array of queries; every query is validated and ids must be
/// unique.
pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<ERQuery>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let queries: Vec<ERQuery> =
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::MalformedJson {
            path: path.to_path_buf(),
            source: e,
        })?;
    let mut seen = BTreeSet::new();
    for q in &queries {
        q.validate()?;
        if !seen.insert(q.query_id.clone()) {
            return Err(Error::DuplicateQueryId {
                query_id: q.query_id.clone(),
            });
        }
    }
    Ok(queries)
}

pub fn write_queries(path: impl AsRef<Path>, queries: &[ERQuery]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let w = BufWriter::new(file);
    serde_json::to_writer_pretty(w, queries).map_err(|e| Error::MalformedJson {
        path: path.to_path_buf(),
        source: e,
    })
}
