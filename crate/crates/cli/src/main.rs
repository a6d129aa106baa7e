//! Batch command-line surface for entity-relationship retrieval experiments.
//!
//! The pipeline, one subcommand per stage:
//!
//! ```bash
//! tuplerank ingest --docs raw.jsonl --out corpus.jsonl
//! tuplerank build-index --corpus corpus.jsonl --out index.json
//! tuplerank search --index index.json --queries queries.json --query-id q1
//! tuplerank batch-search --config run.conf --queries queries.json --out ef.run
//! tuplerank train --config run.conf --queries queries.json --qrels g.qrels --out weights.json
//! tuplerank evaluate --run ef.run --qrels g.qrels
//! tuplerank build-collection --tables tables.json --skeletons-out s.json --qrels-out g.qrels
//! ```
//!
//! Ranking commands read an optional `key = value` manifest (`--config`);
//! explicit flags override it. All randomness (cross-validation folds,
//! optimizer restarts) flows from the single `seed` value, so identical
//! inputs and configuration reproduce outputs byte for byte.

mod config;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use tuplerank::collection::{build_skeletons, load_skeletons, load_tables, write_skeletons};
use tuplerank::corpus::{load_corpus, write_corpus};
use tuplerank::eval::{evaluate_run, load_qrels, load_run, write_qrels, write_run, RunResults};
use tuplerank::index::{build_index, load_index, save_index, ERIndex, IndexOptions};
use tuplerank::ltr::{
    coordinate_ascent, cross_validate, make_folds, TrainConfig, TrainMetric, TrainingSet,
};
use tuplerank::query::{load_queries, write_queries, ERQuery};
use tuplerank::scoring::search;

use config::RankingFlags;

#[derive(Parser)]
#[command(name = "tuplerank")]
#[command(about = "Entity-relationship retrieval over annotated corpora", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an annotated corpus and write its normalized form.
    Ingest {
        /// Documents as JSON lines (doc_id, text, mentions).
        #[arg(long)]
        docs: PathBuf,
        /// Normalized corpus output.
        #[arg(long)]
        out: PathBuf,
    },

    /// Build the entity / relationship / document indexes from a corpus.
    BuildIndex {
        #[arg(long)]
        corpus: PathBuf,
        /// Index snapshot output.
        #[arg(long)]
        out: PathBuf,
        /// Keep at most this many contexts per meta-document.
        #[arg(long)]
        extraction_cap: Option<usize>,
    },

    /// Rank tuples for one query (or all of them) and print the results.
    Search {
        #[command(flatten)]
        ranking: RankingFlags,
        /// Query file as written by build-collection or by hand.
        #[arg(long)]
        queries: PathBuf,
        /// Restrict to a single query id.
        #[arg(long)]
        query_id: Option<String>,
    },

    /// Rank tuples for every query and write a run file.
    BatchSearch {
        #[command(flatten)]
        ranking: RankingFlags,
        #[arg(long)]
        queries: PathBuf,
        /// Run file output.
        #[arg(long)]
        out: PathBuf,
        /// Tag recorded in the run file's last column (manifest key `tag`).
        #[arg(long)]
        tag: Option<String>,
    },

    /// Learn feature weights by coordinate ascent, optionally with
    /// cross-validated held-out reports.
    Train {
        #[command(flatten)]
        ranking: RankingFlags,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        /// Weights report output (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Number of cross-validation folds; omit to train on all queries only.
        #[arg(long)]
        folds: Option<usize>,
        /// Metric to climb: map | ndcg20.
        #[arg(long, default_value = "map")]
        metric: String,
    },

    /// Score a run file against relevance judgments.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        /// Print the full evaluation as JSON instead of the TSV table.
        #[arg(long)]
        json: bool,
    },

    /// Build query skeletons and judgments from entity-linked tables, or turn
    /// editor-filled skeletons into a runnable query file.
    BuildCollection {
        /// Entity-linked tables (JSON array).
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Skeleton output for the table mode.
        #[arg(long)]
        skeletons_out: Option<PathBuf>,
        /// Judgments output for the table mode.
        #[arg(long)]
        qrels_out: Option<PathBuf>,
        /// Editor-filled skeletons to validate into queries.
        #[arg(long)]
        skeletons_in: Option<PathBuf>,
        /// Query file output for the validation mode.
        #[arg(long)]
        queries_out: Option<PathBuf>,
        /// Page-title Jaccard similarity ceiling for near-duplicate filtering.
        #[arg(long, default_value_t = 0.7)]
        threshold: f64,
        /// Shuffle tables with this seed before the sampling pass.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest { docs, out } => ingest(&docs, &out),
        Command::BuildIndex {
            corpus,
            out,
            extraction_cap,
        } => cmd_build_index(&corpus, &out, extraction_cap),
        Command::Search {
            ranking,
            queries,
            query_id,
        } => cmd_search(&ranking, &queries, query_id.as_deref()),
        Command::BatchSearch {
            ranking,
            queries,
            out,
            tag,
        } => batch_search(&ranking, &queries, &out, tag),
        Command::Train {
            ranking,
            queries,
            qrels,
            out,
            folds,
            metric,
        } => train(&ranking, &queries, &qrels, &out, folds, &metric),
        Command::Evaluate { run, qrels, json } => evaluate(&run, &qrels, json),
        Command::BuildCollection {
            tables,
            skeletons_out,
            qrels_out,
            skeletons_in,
            queries_out,
            threshold,
            seed,
        } => build_collection(
            tables.as_deref(),
            skeletons_out.as_deref(),
            qrels_out.as_deref(),
            skeletons_in.as_deref(),
            queries_out.as_deref(),
            threshold,
            seed,
        ),
    }
}

fn ingest(docs: &Path, out: &Path) -> Result<()> {
    let corpus =
        load_corpus(docs).with_context(|| format!("ingesting documents from {}", docs.display()))?;
    write_corpus(out, &corpus)?;
    println!("{}", serde_json::json!({ "documents": corpus.len() }));
    Ok(())
}

fn cmd_build_index(corpus_path: &Path, out: &Path, extraction_cap: Option<usize>) -> Result<()> {
    let corpus = load_corpus(corpus_path)
        .with_context(|| format!("loading corpus from {}", corpus_path.display()))?;
    let index = build_index(&corpus, &IndexOptions { extraction_cap })?;
    save_index(out, &index)?;
    println!(
        "{}",
        serde_json::json!({
            "entities": index.entities.stats,
            "relationships": index.relationships.stats,
            "pair_sentences": index.pair_sentences.stats,
            "documents": index.documents.stats,
        })
    );
    Ok(())
}

fn load_ranking_inputs(ranking: &RankingFlags, queries: &Path) -> Result<(config::Resolved, ERIndex, Vec<ERQuery>)> {
    let resolved = ranking.resolve()?;
    let index = load_index(&resolved.index_path)
        .with_context(|| format!("loading index {}", resolved.index_path.display()))?;
    let queries =
        load_queries(queries).with_context(|| format!("loading queries from {}", queries.display()))?;
    Ok((resolved, index, queries))
}

fn run_queries(
    index: &ERIndex,
    queries: &[ERQuery],
    resolved: &config::Resolved,
) -> Result<RunResults> {
    queries
        .iter()
        .map(|q| {
            let tuples = search(index, q, &resolved.params, &resolved.model)
                .with_context(|| format!("query {}", q.query_id))?;
            Ok((
                q.query_id.clone(),
                tuples
                    .iter()
                    .map(|t| (t.key(), t.joint_score))
                    .collect::<Vec<_>>(),
            ))
        })
        .collect()
}

fn cmd_search(ranking: &RankingFlags, queries: &Path, query_id: Option<&str>) -> Result<()> {
    let (resolved, index, mut queries) = load_ranking_inputs(ranking, queries)?;
    if let Some(id) = query_id {
        queries.retain(|q| q.query_id == id);
        if queries.is_empty() {
            bail!("query id {id:?} not present in the query file");
        }
    }
    let run = run_queries(&index, &queries, &resolved)?;
    for (qid, results) in &run {
        println!("# {qid}");
        for (rank, (key, score)) in results.iter().enumerate() {
            println!("{}\t{key}\t{score:.6}", rank + 1);
        }
    }
    Ok(())
}

fn batch_search(
    ranking: &RankingFlags,
    queries: &Path,
    out: &Path,
    tag: Option<String>,
) -> Result<()> {
    let tag = match tag {
        Some(tag) => tag,
        None => ranking
            .manifest_tag()?
            .unwrap_or_else(|| "tuplerank".to_string()),
    };
    let (resolved, index, queries) = load_ranking_inputs(ranking, queries)?;
    let run = run_queries(&index, &queries, &resolved)?;
    write_run(out, &run, &tag)?;
    let results: usize = run.values().map(Vec::len).sum();
    println!(
        "{}",
        serde_json::json!({ "queries": run.len(), "results": results })
    );
    Ok(())
}

fn train(
    ranking: &RankingFlags,
    queries: &Path,
    qrels_path: &Path,
    out: &Path,
    folds: Option<usize>,
    metric: &str,
) -> Result<()> {
    let metric = match metric {
        "map" => TrainMetric::Map,
        "ndcg20" => TrainMetric::Ndcg20,
        other => bail!("unknown training metric {other:?} (expected map or ndcg20)"),
    };
    let (resolved, index, queries) = load_ranking_inputs(ranking, queries)?;
    let qrels = load_qrels(qrels_path)?;
    let set = TrainingSet::prepare(&index, &queries, &qrels, &resolved.params)?;
    let train_config = TrainConfig {
        metric,
        seed: resolved.seed,
        ..TrainConfig::default()
    };

    let fold_reports = match folds {
        None => Vec::new(),
        Some(n) => {
            let folds = make_folds(&set.query_ids(), n, resolved.seed)?;
            cross_validate(&set, &folds, &train_config)?
        }
    };
    let outcome = coordinate_ascent(&set, &train_config)?;

    let report = serde_json::json!({
        "metric": metric,
        "objective": outcome.objective,
        "restart": outcome.restart,
        "sweeps": outcome.sweeps,
        "weights": outcome.weights,
        "folds": fold_reports
            .iter()
            .map(|f| {
                serde_json::json!({
                    "test_ids": f.test_ids,
                    "weights": f.weights,
                    "train_objective": f.train_objective,
                    "test_metric": f.test_metric,
                })
            })
            .collect::<Vec<_>>(),
    });
    std::fs::write(out, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing weights to {}", out.display()))?;
    println!(
        "{}",
        serde_json::json!({ "objective": outcome.objective, "weights": out })
    );
    Ok(())
}

fn evaluate(run_path: &Path, qrels_path: &Path, json: bool) -> Result<()> {
    let run = load_run(run_path)?;
    let qrels = load_qrels(qrels_path)?;
    let eval = evaluate_run(&run, &qrels)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&eval)?);
        return Ok(());
    }
    println!("query_id\tmap\tp10\tmrr\tndcg20");
    for (qid, m) in &eval.per_query {
        println!(
            "{qid}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            m.map, m.p10, m.mrr, m.ndcg20
        );
    }
    let m = eval.macro_avg;
    println!(
        "macro\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
        m.map, m.p10, m.mrr, m.ndcg20
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn build_collection(
    tables: Option<&Path>,
    skeletons_out: Option<&Path>,
    qrels_out: Option<&Path>,
    skeletons_in: Option<&Path>,
    queries_out: Option<&Path>,
    threshold: f64,
    seed: Option<u64>,
) -> Result<()> {
    match (tables, skeletons_in) {
        (Some(tables), None) => {
            let (Some(skeletons_out), Some(qrels_out)) = (skeletons_out, qrels_out) else {
                bail!("table mode needs both --skeletons-out and --qrels-out");
            };
            if !(0.0..=1.0).contains(&threshold) {
                bail!("threshold must lie in [0,1], got {threshold}");
            }
            let tables = load_tables(tables)?;
            let (skeletons, qrels) = build_skeletons(&tables, threshold, seed)?;
            write_skeletons(skeletons_out, &skeletons)?;
            write_qrels(qrels_out, &qrels)?;
            let tuples: usize = skeletons.iter().map(|s| s.tuples.len()).sum();
            println!(
                "{}",
                serde_json::json!({
                    "tables": tables.len(),
                    "skeletons": skeletons.len(),
                    "tuples": tuples,
                })
            );
            Ok(())
        }
        (None, Some(skeletons_in)) => {
            let Some(queries_out) = queries_out else {
                bail!("skeleton mode needs --queries-out");
            };
            let skeletons = load_skeletons(skeletons_in)?;
            let queries: Vec<ERQuery> = skeletons
                .iter()
                .map(|s| s.to_query().map_err(anyhow::Error::from))
                .collect::<Result<_>>()?;
            let ids: BTreeSet<&str> = queries.iter().map(|q| q.query_id.as_str()).collect();
            if ids.len() != queries.len() {
                bail!("skeletons contain duplicate query ids");
            }
            write_queries(queries_out, &queries)?;
            println!("{}", serde_json::json!({ "queries": queries.len() }));
            Ok(())
        }
        _ => bail!("give either --tables (with outputs) or --skeletons-in (with --queries-out)"),
    }
}
