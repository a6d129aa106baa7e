//! Building query collections from relational tables.
//!
//! A table with a detectable key column yields one query skeleton: the key
//! column paired with the best entity-linked companion column, every fully
//! linked row becoming one relevant tuple. Editors fill in the query text
//! afterwards; the skeleton round-trips through JSON so filled files can be
//! validated into runnable queries.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eval::Qrels;
use crate::query::{ERQuery, SubQuery};
use crate::types::{tuple_key, EntityId};
use crate::{Error, Result};

/// One table cell: display text plus the entity it links to, when known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCell {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_id: Option<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableColumn {
    pub header: String,
    pub cells: Vec<TableCell>,
}

/// A normalized relational table with its page context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceTable {
    pub table_id: String,
    pub page_title: String,
    #[serde(default)]
    pub table_title: String,
    #[serde(default)]
    pub context_paragraph: String,
    pub columns: Vec<TableColumn>,
}

impl SourceTable {
    pub fn row_count(&self) -> usize {
        self.columns.first().map(|c| c.cells.len()).unwrap_or(0)
    }

    /// Rectangular, at least two columns, at least one row.
    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| {
            Err(Error::InvalidTable {
                table_id: self.table_id.clone(),
                reason,
            })
        };
        if self.table_id.trim().is_empty() {
            return invalid("empty table_id".into());
        }
        if self.columns.len() < 2 {
            return invalid(format!("{} column(s), need at least 2", self.columns.len()));
        }
        let rows = self.row_count();
        if rows == 0 {
            return invalid("no rows".into());
        }
        for col in &self.columns {
            if col.cells.len() != rows {
                return invalid(format!(
                    "column {:?} has {} cells, expected {rows}",
                    col.header,
                    col.cells.len()
                ));
            }
        }
        Ok(())
    }
}

/// Fraction of distinct cell texts in one column.
fn uniqueness_ratio(col: &TableColumn) -> f64 {
    let distinct: BTreeSet<&str> = col.cells.iter().map(|c| c.text.as_str()).collect();
    distinct.len() as f64 / col.cells.len() as f64
}

fn avg_text_len(col: &TableColumn) -> f64 {
    let total: usize = col.cells.iter().map(|c| c.text.chars().count()).sum();
    total as f64 / col.cells.len() as f64
}

/// The column holding the table's main entity: highest uniqueness ratio,
/// ties broken by shorter average cell text, then by lower index. `None`
/// when even the best column repeats more than 20% of its cells.
pub fn detect_key_column(table: &SourceTable) -> Option<usize> {
    const MIN_UNIQUENESS: f64 = 0.8;
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, col) in table.columns.iter().enumerate() {
        let ratio = uniqueness_ratio(col);
        let len = avg_text_len(col);
        let better = match best {
            None => true,
            Some((_, r, l)) => ratio > r || (ratio == r && len < l),
        };
        if better {
            best = Some((i, ratio, len));
        }
    }
    best.and_then(|(i, ratio, _)| (ratio >= MIN_UNIQUENESS).then_some(i))
}

/// Entity pairs from rows where both the key and companion cells are linked.
/// Rows with a missing link, or linking both cells to the same entity, are
/// skipped; duplicates keep their first position.
pub fn extract_tuples(
    table: &SourceTable,
    key_col: usize,
    other_col: usize,
) -> Vec<[EntityId; 2]> {
    let key = &table.columns[key_col];
    let other = &table.columns[other_col];
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (k, o) in key.cells.iter().zip(&other.cells) {
        let (Some(ke), Some(oe)) = (&k.entity_id, &o.entity_id) else {
            continue;
        };
        if ke == oe {
            continue;
        }
        if seen.insert((ke.clone(), oe.clone())) {
            out.push([ke.clone(), oe.clone()]);
        }
    }
    out
}

/// Words shared across list-page titles that carry no topical signal.
const TITLE_STOPWORDS: [&str; 11] = [
    "a", "an", "and", "by", "for", "in", "of", "on", "or", "the", "to",
];

/// Lowercased whitespace tokens with edge punctuation stripped and stopwords
/// removed.
fn title_tokens(title: &str) -> BTreeSet<String> {
    title
        .split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty() && !TITLE_STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Token-level Jaccard similarity of two page titles.
pub fn title_jaccard(a: &str, b: &str) -> f64 {
    let ta = title_tokens(a);
    let tb = title_tokens(b);
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    let inter = ta.intersection(&tb).count();
    let union = ta.union(&tb).count();
    inter as f64 / union as f64
}

/// Greedy near-duplicate filtering on page titles: a table is admitted iff
/// its title's Jaccard similarity to every previously admitted title is at
/// most `threshold`. Returns admitted indices in admission order. With a
/// seed, the pass runs over a deterministic shuffle of the input instead of
/// input order (for sampling large crawls); without one, input order is kept.
pub fn sample_tables(tables: &[SourceTable], threshold: f64, seed: Option<u64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tables.len()).collect();
    if let Some(s) = seed {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
        order.shuffle(&mut rng);
    }
    let mut admitted: Vec<usize> = Vec::new();
    for i in order {
        let title = &tables[i].page_title;
        if admitted
            .iter()
            .all(|&j| title_jaccard(title, &tables[j].page_title) <= threshold)
        {
            admitted.push(i);
        }
    }
    admitted
}

/// A query under construction: machine-derived table context and tuples,
/// editor-filled query text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySkeleton {
    pub query_id: String,
    pub table_id: String,
    pub page_title: String,
    pub table_title: String,
    pub context_paragraph: String,
    pub key_column: usize,
    pub other_column: usize,
    pub key_header: String,
    pub other_header: String,
    /// Relevant entity pairs, key-column entity first.
    pub tuples: Vec<Vec<EntityId>>,
    /// Editor-filled natural-language information need; empty until filled.
    #[serde(default)]
    pub nl_query: String,
    /// Editor-filled sub-queries; empty until filled.
    #[serde(default)]
    pub subqueries: Vec<SubQuery>,
}

impl QuerySkeleton {
    /// Turn a filled skeleton into a runnable query.
    pub fn to_query(&self) -> Result<ERQuery> {
        if self.subqueries.is_empty() {
            return Err(Error::InvalidSkeleton {
                query_id: self.query_id.clone(),
                reason: "subqueries not filled in".into(),
            });
        }
        let mut query = ERQuery::new(&self.query_id, self.subqueries.clone())?;
        if !self.nl_query.trim().is_empty() {
            query.natural_language = Some(self.nl_query.clone());
        }
        Ok(query)
    }
}

/// Build skeletons and judgments from a table crawl: near-duplicate pages are
/// filtered, each surviving table needs a detectable key column and a
/// companion column sharing at least one fully linked row.
pub fn build_skeletons(
    tables: &[SourceTable],
    threshold: f64,
    seed: Option<u64>,
) -> Result<(Vec<QuerySkeleton>, Qrels)> {
    for t in tables {
        t.validate()?;
    }
    let mut skeletons = Vec::new();
    let mut qrels = Qrels::new();
    for &i in &sample_tables(tables, threshold, seed) {
        let table = &tables[i];
        let Some(key_col) = detect_key_column(table) else {
            continue;
        };
        // companion column: most fully linked rows, ties to the lower index
        let best_other = (0..table.columns.len())
            .filter(|&c| c != key_col)
            .map(|c| (c, extract_tuples(table, key_col, c)))
            .filter(|(_, tuples)| !tuples.is_empty())
            .max_by(|(ca, ta), (cb, tb)| ta.len().cmp(&tb.len()).then(cb.cmp(ca)));
        let Some((other_col, tuples)) = best_other else {
            continue;
        };
        let query_id = format!("{}_c{key_col}_c{other_col}", table.table_id);
        for t in &tuples {
            qrels.add(&query_id, &tuple_key(t), 1);
        }
        skeletons.push(QuerySkeleton {
            query_id,
            table_id: table.table_id.clone(),
            page_title: table.page_title.clone(),
            table_title: table.table_title.clone(),
            context_paragraph: table.context_paragraph.clone(),
            key_column: key_col,
            other_column: other_col,
            key_header: table.columns[key_col].header.clone(),
            other_header: table.columns[other_col].header.clone(),
            tuples: tuples.into_iter().map(|t| t.to_vec()).collect(),
            nl_query: String::new(),
            subqueries: Vec::new(),
        });
    }
    Ok((skeletons, qrels))
}

pub fn load_tables(path: &Path) -> Result<Vec<SourceTable>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let tables: Vec<SourceTable> = serde_json::from_str(&text).map_err(|e| Error::MalformedJson {
        path: path.to_path_buf(),
        source: e,
    })?;
    for t in &tables {
        t.validate()?;
    }
    Ok(tables)
}

pub fn write_skeletons(path: &Path, skeletons: &[QuerySkeleton]) -> Result<()> {
    let json = serde_json::to_string_pretty(skeletons).expect("skeletons serialize");
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_skeletons(path: &Path) -> Result<Vec<QuerySkeleton>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedJson {
        path: path.to_path_buf(),
        source: e,
    })
}
