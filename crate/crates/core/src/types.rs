//! Identifier newtypes shared across the crate.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::{Error, Result};

/// Identifier of a linked entity (knowledge-base id or canonical name).
///
/// Entity ids appear verbatim inside whitespace-delimited run/qrels lines and
/// inside `|`-joined tuple keys, so they may not contain whitespace or `|`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Check the constraints that keep tuple keys and TREC lines parseable.
    pub fn check_well_formed(&self) -> std::result::Result<(), &'static str> {
        if self.0.is_empty() {
            return Err("empty");
        }
        if self.0.chars().any(|c| c.is_whitespace()) {
            return Err("contains whitespace");
        }
        if self.0.contains('|') {
            return Err("contains '|'");
        }
        Ok(())
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId(s.to_string())
    }
}

/// Identifier of a source document.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocId(pub String);

impl DocId {
    pub fn new(id: impl Into<String>) -> Self {
        DocId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DocId {
    fn from(s: &str) -> Self {
        DocId(s.to_string())
    }
}

/// Unordered pair of distinct entities, stored in lexicographic order so that
/// the same co-occurrence always maps to the same meta-document key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(EntityId, EntityId)", into = "(EntityId, EntityId)")]
pub struct PairKey {
    a: EntityId,
    b: EntityId,
}

impl PairKey {
    pub fn new(x: EntityId, y: EntityId) -> Result<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Ok(PairKey { a: x, b: y }),
            std::cmp::Ordering::Greater => Ok(PairKey { a: y, b: x }),
            std::cmp::Ordering::Equal => Err(Error::SelfPair { entity: x.0 }),
        }
    }

    /// Lexicographically smaller member.
    pub fn first(&self) -> &EntityId {
        &self.a
    }

    /// Lexicographically larger member.
    pub fn second(&self) -> &EntityId {
        &self.b
    }

    pub fn contains(&self, e: &EntityId) -> bool {
        &self.a == e || &self.b == e
    }

    /// The member that is not `e`, if `e` is a member at all.
    pub fn other(&self, e: &EntityId) -> Option<&EntityId> {
        if &self.a == e {
            Some(&self.b)
        } else if &self.b == e {
            Some(&self.a)
        } else {
            None
        }
    }

    /// Meta-document key: the two ids joined by `|` (same shape as tuple keys).
    pub fn label(&self) -> String {
        format!("{}|{}", self.a, self.b)
    }

    /// Parse a `a|b` label back into a pair.
    pub fn parse(label: &str) -> Result<Self> {
        let mut parts = label.splitn(2, '|');
        let a = parts.next().unwrap_or_default();
        let b = parts.next().unwrap_or_default();
        PairKey::new(EntityId::new(a), EntityId::new(b))
    }
}

impl TryFrom<(EntityId, EntityId)> for PairKey {
    type Error = Error;

    fn try_from((x, y): (EntityId, EntityId)) -> Result<Self> {
        PairKey::new(x, y)
    }
}

impl From<PairKey> for (EntityId, EntityId) {
    fn from(p: PairKey) -> Self {
        (p.a, p.b)
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.a, self.b)
    }
}

/// Join entity ids into the textual tuple key used by run files and qrels.
pub fn tuple_key(entities: &[EntityId]) -> String {
    let parts: Vec<&str> = entities.iter().map(|e| e.as_str()).collect();
    parts.join("|")
}
