//! Fixture inputs and process helpers for driving the binary end to end.
//!
//! The fixture is a miniature three-chapter corpus: chapter `q` has a hero
//! and a mate with distinctive solo sentences, one sentence pairing them, and
//! a mention-free noise document sharing their vocabulary. Query `q` asks for
//! the chapter's couple, so every query retrieves all three joined tuples and
//! the judged one is separable through its chapter-specific terms.

// Each integration-test binary links this module and uses its own subset.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tuplerank::corpus::{write_corpus, AnnotatedDocument, Corpus, Mention};
use tuplerank::eval::{write_qrels, Qrels};
use tuplerank::query::{write_queries, ERQuery, SubQuery};
use tuplerank::types::{DocId, EntityId};

pub const CHAPTERS: usize = 3;

/// Assembles an ASCII document word by word, recording mention spans.
/// Character offsets equal byte offsets because the text is ASCII only.
struct DocBuilder {
    doc_id: String,
    text: String,
    mentions: Vec<Mention>,
}

impl DocBuilder {
    fn new(doc_id: &str) -> Self {
        DocBuilder {
            doc_id: doc_id.to_string(),
            text: String::new(),
            mentions: Vec::new(),
        }
    }

    fn push_word(&mut self, w: &str) -> (usize, usize) {
        if !self.text.is_empty() {
            self.text.push(' ');
        }
        let start = self.text.len();
        self.text.push_str(w);
        (start, self.text.len())
    }

    fn words(mut self, ws: &str) -> Self {
        for w in ws.split_whitespace() {
            self.push_word(w);
        }
        self
    }

    fn mention(mut self, entity: &str, surface: &str) -> Self {
        let (start, end) = self.push_word(surface);
        self.mentions.push(Mention {
            entity_id: EntityId::new(entity),
            start,
            end,
            surface: surface.to_string(),
        });
        self
    }

    fn stop(mut self) -> Self {
        self.text.push('.');
        self
    }

    fn build(self) -> AnnotatedDocument {
        assert!(self.text.is_ascii());
        AnnotatedDocument {
            doc_id: DocId::new(self.doc_id),
            text: self.text,
            mentions: self.mentions,
        }
    }
}

pub fn fixture_corpus() -> Corpus {
    let mut docs = Vec::new();
    for q in 0..CHAPTERS {
        docs.push(
            DocBuilder::new(&format!("hero-doc{q}"))
                .mention(&format!("hero{q}"), &format!("Hero{q}"))
                .words(&format!("is a daring ranger beacon{q}"))
                .stop()
                .build(),
        );
        docs.push(
            DocBuilder::new(&format!("mate-doc{q}"))
                .mention(&format!("mate{q}"), &format!("Mate{q}"))
                .words(&format!("is a wary scout lantern{q}"))
                .stop()
                .build(),
        );
        // The connector text between the two mentions is what the
        // relationship index sees, so it carries the relationship terms.
        docs.push(
            DocBuilder::new(&format!("pair-doc{q}"))
                .mention(&format!("hero{q}"), &format!("Hero{q}"))
                .words("bravely rescued young")
                .mention(&format!("mate{q}"), &format!("Mate{q}"))
                .words("beside the lighthouse")
                .stop()
                .build(),
        );
        docs.push(
            DocBuilder::new(&format!("noise-doc{q}"))
                .words(&format!("ranger scout lighthouse chatter chatter{q}"))
                .stop()
                .build(),
        );
    }
    Corpus::new(docs).expect("fixture corpus validates")
}

pub fn fixture_queries() -> Vec<ERQuery> {
    (0..CHAPTERS)
        .map(|q| {
            ERQuery::new(
                format!("q{q}"),
                vec![
                    SubQuery::entity(format!("daring ranger beacon{q}")),
                    SubQuery::relationship("bravely rescued"),
                    SubQuery::entity(format!("wary scout lantern{q}")),
                ],
            )
            .expect("fixture query validates")
        })
        .collect()
}

/// One relevant couple per query, plus a judged non-relevant cross-chapter
/// pair so grade-0 lines flow through the pipeline too.
pub fn fixture_qrels() -> Qrels {
    let mut qrels = Qrels::new();
    for q in 0..CHAPTERS {
        qrels.add(
            &format!("q{q}"),
            &format!("hero{q}|mate{q}"),
            1,
        );
        qrels.add(
            &format!("q{q}"),
            &format!("hero{q}|mate{}", (q + 1) % CHAPTERS),
            0,
        );
    }
    qrels
}

/// Write the fixture inputs into `dir` under fixed relative names.
pub fn write_fixture_inputs(dir: &Path) {
    write_corpus(dir.join("docs.jsonl"), &fixture_corpus()).unwrap();
    write_queries(dir.join("queries.json"), &fixture_queries()).unwrap();
    write_qrels(&dir.join("qrels.txt"), &fixture_qrels()).unwrap();
}

/// A command invocation of the compiled binary, rooted in `dir` so fixture
/// files can be named relatively.
pub fn tuplerank(dir: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tuplerank"));
    cmd.current_dir(dir);
    cmd
}

/// Run to completion, asserting success; returns captured output.
pub fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawning the binary");
    assert!(
        out.status.success(),
        "command {:?} failed\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Run to completion, asserting failure; returns the stderr text.
pub fn run_err(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawning the binary");
    assert!(
        !out.status.success(),
        "command {:?} unexpectedly succeeded\nstdout: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

pub fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
