//! Shared fixtures and independent oracles for the integration suites.
//!
//! Fixtures are built through the public corpus -> index pipeline rather than
//! by poking index internals, so they exercise extraction and indexing on the
//! way to whatever they actually test. The oracles recompute expected values
//! with deliberately naive algorithms (exhaustive enumeration, quadratic
//! scans, closed-form arithmetic) so that production results are checked
//! against an independent code path.

// Each integration-test binary links this module and uses its own subset.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tuplerank::collection::{SourceTable, TableCell, TableColumn};
use tuplerank::corpus::{AnnotatedDocument, Corpus, Mention};
use tuplerank::eval::Qrels;
use tuplerank::index::{build_index, ERIndex, IndexOptions, IndexPart};
use tuplerank::query::{ERQuery, SubQuery};
use tuplerank::scoring::{ScoringParams, UNSEEN_SCORE};
use tuplerank::types::{DocId, EntityId, PairKey};

// ---------------------------------------------------------------------------
// Document builder
// ---------------------------------------------------------------------------

/// Assembles an annotated document token by token, tracking the character
/// spans of entity mentions. Text is ASCII by construction, so the recorded
/// character offsets equal byte offsets.
pub struct DocBuilder {
    doc_id: String,
    text: String,
    mentions: Vec<Mention>,
}

impl DocBuilder {
    pub fn new(doc_id: &str) -> Self {
        DocBuilder {
            doc_id: doc_id.to_string(),
            text: String::new(),
            mentions: Vec::new(),
        }
    }

    fn push_word(&mut self, w: &str) -> (usize, usize) {
        assert!(
            !w.is_empty() && w.chars().all(|c| c.is_ascii_alphanumeric()),
            "builder words must be single ASCII tokens, got {w:?}"
        );
        if !self.text.is_empty() {
            self.text.push(' ');
        }
        let start = self.text.len();
        self.text.push_str(w);
        (start, self.text.len())
    }

    /// Append one plain token.
    pub fn word(mut self, w: &str) -> Self {
        self.push_word(w);
        self
    }

    /// Append `n` copies of a token.
    pub fn words(mut self, w: &str, n: u64) -> Self {
        for _ in 0..n {
            self.push_word(w);
        }
        self
    }

    /// Append a mention of `entity`, rendered as the single token `surface`.
    pub fn mention(mut self, entity: &str, surface: &str) -> Self {
        let (start, end) = self.push_word(surface);
        self.mentions.push(Mention {
            entity_id: EntityId::new(entity),
            start,
            end,
            surface: surface.to_string(),
        });
        self
    }

    /// Close the current sentence with a period.
    pub fn stop(mut self) -> Self {
        self.text.push('.');
        self
    }

    pub fn build(self) -> AnnotatedDocument {
        debug_assert!(self.text.is_ascii());
        AnnotatedDocument {
            doc_id: DocId::new(self.doc_id),
            text: self.text,
            mentions: self.mentions,
        }
    }
}

/// One-sentence document: a mention followed by term repetitions and padding.
pub fn solo_doc(
    doc_id: &str,
    entity: &str,
    surface: &str,
    terms: &[(&str, u64)],
    pads: u64,
) -> AnnotatedDocument {
    let mut b = DocBuilder::new(doc_id).mention(entity, surface);
    for &(t, n) in terms {
        b = b.words(t, n);
    }
    b.words("pad", pads).stop().build()
}

/// One-sentence document with two mentions and a controlled separating string.
pub fn pair_doc(
    doc_id: &str,
    first: (&str, &str),
    between: &[(&str, u64)],
    second: (&str, &str),
) -> AnnotatedDocument {
    let mut b = DocBuilder::new(doc_id).mention(first.0, first.1);
    for &(t, n) in between {
        b = b.words(t, n);
    }
    b.mention(second.0, second.1).stop().build()
}

// ---------------------------------------------------------------------------
// Golden fixture
// ---------------------------------------------------------------------------

/// The reconstructed toy collection behind the golden-value checks: seven
/// people (four soccer players, three models) in three "dated" couples, plus
/// filler entities and a filler couple that absorb the remaining collection
/// mass so every pinned statistic comes out exactly.
pub struct Golden {
    pub index: ERIndex,
    pub params: ScoringParams,
    pub query: ERQuery,
}

/// Entity-side statistics the golden scores depend on:
/// (entity, term-a, tf-a, term-b, tf-b, meta-document length).
pub const GOLDEN_ENTITY_STATS: [(&str, &str, u64, &str, u64, u64); 11] = [
    ("brady", "soccer", 0, "player", 600, 3000),
    ("ronaldo", "soccer", 800, "player", 800, 5000),
    ("messi", "soccer", 700, "player", 700, 4000),
    ("figo", "soccer", 200, "player", 200, 800),
    ("gisele", "top", 400, "model", 400, 3000),
    ("irina", "top", 300, "model", 300, 2000),
    ("helen", "top", 150, "model", 150, 600),
    ("filler1", "soccer", 1300, "player", 0, 9000),
    ("filler2", "soccer", 0, "player", 5700, 13000),
    ("filler3", "top", 7150, "model", 0, 13150),
    ("filler4", "top", 0, "model", 3150, 9646),
];

/// Relationship-side statistics: (pair label, tf of "dated", meta length).
pub const GOLDEN_PAIR_STATS: [(&str, u64, u64); 4] = [
    ("brady|gisele", 500, 800),
    ("irina|ronaldo", 300, 600),
    ("figo|helen", 100, 200),
    ("fpa|fpb", 4100, 18400),
];

pub fn golden_fixture() -> Golden {
    // Solo documents carry each entity's own term mass; couple documents add
    // the shared sentence (which counts towards both partners' meta-documents)
    // and provide the separating string that becomes the pair meta-document.
    let docs = vec![
        solo_doc(
            "doc_messi",
            "messi",
            "Messi",
            &[("soccer", 700), ("player", 700)],
            2599,
        ),
        solo_doc(
            "doc_ronaldo",
            "ronaldo",
            "Ronaldo",
            &[("soccer", 800), ("player", 800)],
            2797,
        ),
        solo_doc(
            "doc_figo",
            "figo",
            "Figo",
            &[("soccer", 200), ("player", 200)],
            197,
        ),
        solo_doc("doc_brady", "brady", "Brady", &[("player", 600)], 1597),
        solo_doc(
            "doc_gisele",
            "gisele",
            "Gisele",
            &[("top", 400), ("model", 400)],
            1397,
        ),
        solo_doc(
            "doc_irina",
            "irina",
            "Irina",
            &[("top", 300), ("model", 300)],
            797,
        ),
        solo_doc(
            "doc_helen",
            "helen",
            "Helen",
            &[("top", 150), ("model", 150)],
            97,
        ),
        solo_doc("doc_filler1", "filler1", "Filler1", &[("soccer", 1300)], 7699),
        solo_doc("doc_filler2", "filler2", "Filler2", &[("player", 5700)], 7299),
        solo_doc("doc_filler3", "filler3", "Filler3", &[("top", 7150)], 5999),
        solo_doc("doc_filler4", "filler4", "Filler4", &[("model", 3150)], 6495),
        pair_doc(
            "doc_pair_gb",
            ("gisele", "Gisele"),
            &[("dated", 500), ("pad", 300)],
            ("brady", "Brady"),
        ),
        pair_doc(
            "doc_pair_ir",
            ("irina", "Irina"),
            &[("dated", 300), ("pad", 300)],
            ("ronaldo", "Ronaldo"),
        ),
        pair_doc(
            "doc_pair_hf",
            ("helen", "Helen"),
            &[("dated", 100), ("pad", 100)],
            ("figo", "Figo"),
        ),
        pair_doc(
            "doc_pair_ff",
            ("fpa", "Fpa"),
            &[("dated", 4100), ("pad", 14300)],
            ("fpb", "Fpb"),
        ),
    ];
    let corpus = Corpus::new(docs).expect("golden corpus is well-formed");
    let index = build_index(&corpus, &IndexOptions::default()).expect("golden corpus indexes");

    // Check every statistic the golden scores depend on, so a failure points
    // at the fixture rather than at the scorer.
    let ent = &index.entities;
    assert_eq!(ent.stats.doc_count, 13, "entity meta-document count");
    assert_eq!(ent.stats.total_terms, 100_000, "entity collection size");
    for (key, ta, tfa, tb, tfb, len) in GOLDEN_ENTITY_STATS {
        let md = ent.get(key).unwrap_or_else(|| panic!("missing {key}"));
        assert_eq!(md.tf(ta), tfa, "tf({ta}) of {key}");
        assert_eq!(md.tf(tb), tfb, "tf({tb}) of {key}");
        assert_eq!(md.length, len, "meta length of {key}");
    }
    for (term, cf) in [
        ("soccer", 3000),
        ("player", 8000),
        ("top", 8000),
        ("model", 4000),
    ] {
        assert_eq!(ent.stats.cf(term), cf, "entity cf({term})");
    }

    let rel = &index.relationships;
    assert_eq!(rel.stats.doc_count, 4, "pair meta-document count");
    assert_eq!(rel.stats.total_terms, 20_000, "relationship collection size");
    assert_eq!(rel.stats.cf("dated"), 5000, "relationship cf(dated)");
    for (label, tf, len) in GOLDEN_PAIR_STATS {
        let md = rel.get(label).unwrap_or_else(|| panic!("missing {label}"));
        assert_eq!(md.tf("dated"), tf, "tf(dated) of {label}");
        assert_eq!(md.length, len, "meta length of {label}");
    }

    let params = ScoringParams {
        mu_entity: Some(1500.0),
        mu_relationship: Some(500.0),
        ..ScoringParams::default()
    };
    let query = ERQuery::new(
        "golden",
        vec![
            SubQuery::entity("soccer player"),
            SubQuery::relationship("dated"),
            SubQuery::entity("top model"),
        ],
    )
    .expect("golden query is valid");

    Golden {
        index,
        params,
        query,
    }
}

// ---------------------------------------------------------------------------
// Synthetic 200-document world
// ---------------------------------------------------------------------------

/// A 200-document corpus with 20 structurally identical query worlds, the
/// source tables whose linked rows plant the relevant tuples, and the queries
/// and judgments derived from those tables through the collection builder.
///
/// Each world has its own six-term vocabulary and contains:
///   * four relevant couples whose shared sentence holds all six query terms
///     with the relationship bigram adjacent, plus a per-couple length jitter
///     that keeps scores distinct;
///   * one "scatter" couple whose separating string carries heavy relation
///     unigrams spread wider than the co-occurrence window — it outscores the
///     relevant couples on unigrams alone but loses once bigram or window
///     evidence carries weight;
///   * solo "veteran"/"mock" distractor entities that dominate the two
///     half-query runs yet never co-occur with anyone, so models that rely on
///     crossing independent entity runs drown in pairs of them.
pub struct World {
    pub index: ERIndex,
    pub queries: Vec<ERQuery>,
    pub qrels: Qrels,
    pub skeletons: Vec<tuplerank::collection::QuerySkeleton>,
    pub tables: Vec<SourceTable>,
    pub params: ScoringParams,
}

pub const WORLD_QUERIES: usize = 20;

/// Per-world vocabulary: entity-type terms for both slots and relation terms.
pub struct WorldVocab {
    pub a1: String,
    pub a2: String,
    pub r1: String,
    pub r2: String,
    pub b1: String,
    pub b2: String,
}

pub fn world_vocab(q: usize) -> WorldVocab {
    WorldVocab {
        a1: format!("guild{q}"),
        a2: format!("warden{q}"),
        r1: format!("escort{q}"),
        r2: format!("convoy{q}"),
        b1: format!("harbor{q}"),
        b2: format!("lantern{q}"),
    }
}

pub fn world_subqueries(q: usize) -> Vec<SubQuery> {
    let v = world_vocab(q);
    vec![
        SubQuery::entity(format!("{} {}", v.a1, v.a2)),
        SubQuery::relationship(format!("{} {}", v.r1, v.r2)),
        SubQuery::entity(format!("{} {}", v.b1, v.b2)),
    ]
}

fn world_docs() -> Vec<AnnotatedDocument> {
    let mut docs = Vec::new();
    for q in 0..WORLD_QUERIES {
        let v = world_vocab(q);
        let hero = |i: usize| format!("hero{q}x{i}");
        let haven = |i: usize| format!("haven{q}x{i}");
        let cap = |s: &str| {
            let mut c = s.to_string();
            c.replace_range(0..1, &s[0..1].to_uppercase());
            c
        };

        // Relevant couples: one sentence holding every query term, relation
        // bigram adjacent, with i trailing filler tokens to keep the four
        // couples' scores distinct.
        for i in 0..4 {
            let (h, v_) = (hero(i), haven(i));
            docs.push(
                DocBuilder::new(&format!("w{q}_true{i}"))
                    .mention(&h, &cap(&h))
                    .word(&v.a1)
                    .word(&v.a2)
                    .word(&v.r1)
                    .word(&v.r2)
                    .word(&v.b1)
                    .word(&v.b2)
                    .words(&format!("mist{q}"), i as u64)
                    .mention(&v_, &cap(&v_))
                    .stop()
                    .build(),
            );
        }

        // Scatter couple: relation terms frequent but never adjacent and
        // always further apart than the window. Its tuple key sorts before
        // every planted couple, so a scorer that gives all tuples one
        // constant value (all weight on a compatibility feature, say) puts
        // this non-relevant pair at rank 1 instead of getting ties broken in
        // its favor.
        let (sa, sb) = (format!("brume{q}a"), format!("brume{q}b"));
        docs.push(
            DocBuilder::new(&format!("w{q}_scatter"))
                .mention(&sa, &cap(&sa))
                .words(&v.r1, 5)
                .words(&format!("mist{q}"), 7)
                .words(&v.r2, 5)
                .mention(&sb, &cap(&sb))
                .stop()
                .build(),
        );
        docs.push(
            DocBuilder::new(&format!("w{q}_scatter_types"))
                .mention(&sa, &cap(&sa))
                .words(&v.a1, 2)
                .words(&v.a2, 2)
                .stop()
                .mention(&sb, &cap(&sb))
                .words(&v.b1, 2)
                .words(&v.b2, 2)
                .stop()
                .build(),
        );

        // Solo distractors: hammer one half-query each, co-occur with nobody.
        let mut vets = DocBuilder::new(&format!("w{q}_vets"));
        for i in 0..3 {
            let e = format!("vet{q}x{i}");
            vets = vets
                .mention(&e, &cap(&e))
                .words(&v.a1, 3)
                .words(&v.a2, 3)
                .words(&v.r1, 3)
                .words(&v.r2, 3)
                .stop();
        }
        docs.push(vets.build());
        let mut mocks = DocBuilder::new(&format!("w{q}_mocks"));
        for i in 0..3 {
            let e = format!("mock{q}x{i}");
            mocks = mocks
                .mention(&e, &cap(&e))
                .words(&v.r1, 3)
                .words(&v.r2, 3)
                .words(&v.b1, 3)
                .words(&v.b2, 3)
                .stop();
        }
        docs.push(mocks.build());
    }

    // Background chatter documents, one mention each, no shared vocabulary.
    for k in 0..40 {
        let e = format!("noise{k}");
        docs.push(
            DocBuilder::new(&format!("bg{k:02}"))
                .mention(&e, &format!("Noise{k}"))
                .word(&format!("rumor{k}"))
                .word(&format!("gossip{k}"))
                .word(&format!("tale{k}"))
                .stop()
                .build(),
        );
    }
    docs
}

/// The source tables whose linked rows define the relevant tuples. Row
/// layout per table: four fully linked couples, one row with a missing link,
/// one row linking both cells to the same entity, plus a repetitive unlinked
/// season column — only the four couples may survive tuple extraction.
pub fn world_tables() -> Vec<SourceTable> {
    (0..WORLD_QUERIES)
        .map(|q| {
            let cell = |text: String, entity: Option<String>| TableCell {
                text,
                entity_id: entity.map(EntityId::new),
            };
            let mut key_cells: Vec<TableCell> = (0..4)
                .map(|i| cell(format!("Hero{q}x{i}"), Some(format!("hero{q}x{i}"))))
                .collect();
            key_cells.push(cell("Mystery".into(), None));
            key_cells.push(cell("Twin".into(), Some(format!("hero{q}x0"))));
            let mut other_cells: Vec<TableCell> = (0..4)
                .map(|i| {
                    cell(
                        format!("Haven {q}x{i} hall"),
                        Some(format!("haven{q}x{i}")),
                    )
                })
                .collect();
            other_cells.push(cell("Somewhere unknown".into(), Some(format!("haven{q}x0"))));
            other_cells.push(cell("Twin residence".into(), Some(format!("hero{q}x0"))));
            let season_cells: Vec<TableCell> = (0..6)
                .map(|i| cell(format!("Season {}", i % 2), None))
                .collect();
            SourceTable {
                table_id: format!("tbl{q:02}"),
                page_title: format!("List of guild{q} harbor{q} escorts"),
                table_title: format!("Escorted couples {q}"),
                context_paragraph: format!(
                    "Couples escorted between guild{q} and harbor{q}."
                ),
                columns: vec![
                    TableColumn {
                        header: "Escort".into(),
                        cells: key_cells,
                    },
                    TableColumn {
                        header: "Destination".into(),
                        cells: other_cells,
                    },
                    TableColumn {
                        header: "Season".into(),
                        cells: season_cells,
                    },
                ],
            }
        })
        .collect()
}

pub fn world() -> World {
    let corpus = Corpus::new(world_docs()).expect("world corpus is well-formed");
    assert_eq!(corpus.docs().len(), 200, "world corpus size");
    let index = build_index(&corpus, &IndexOptions::default()).expect("world corpus indexes");

    let tables = world_tables();
    let (mut skeletons, qrels) =
        tuplerank::collection::build_skeletons(&tables, 0.7, None).expect("tables are valid");
    assert_eq!(skeletons.len(), WORLD_QUERIES, "one skeleton per table");

    // Fill each skeleton the way an editor would, then promote to queries.
    let queries: Vec<ERQuery> = skeletons
        .iter_mut()
        .map(|sk| {
            let q: usize = sk.table_id[3..].parse().expect("table id suffix");
            let v = world_vocab(q);
            sk.nl_query = format!(
                "which {} {} was escorted in {} to which {} {}",
                v.a1, v.a2, v.r2, v.b1, v.b2
            );
            sk.subqueries = world_subqueries(q);
            sk.to_query().expect("filled skeleton becomes a query")
        })
        .collect();

    World {
        index,
        queries,
        qrels,
        skeletons,
        tables,
        params: ScoringParams::default(),
    }
}

// ---------------------------------------------------------------------------
// Randomized mini-instances
// ---------------------------------------------------------------------------

const MINI_VOCAB: [&str; 12] = [
    "red", "blue", "green", "gold", "iron", "wolf", "bear", "lake", "hill", "moon", "star",
    "reef",
];

/// A small random corpus plus a random well-formed query with `entity_slots`
/// entity sub-queries (so |Q| = 2 * entity_slots - 1). Documents hold one to
/// three sentences, each opening with a mention so sentence segmentation
/// stays predictable, with one or two more mentions and vocabulary words
/// scattered in between.
pub fn random_instance(seed: u64, entity_slots: usize) -> (ERIndex, ERQuery) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_entities = rng.gen_range(6..=10);
    let n_docs = rng.gen_range(8..=15);

    let docs: Vec<AnnotatedDocument> = (0..n_docs)
        .map(|d| {
            let mut b = DocBuilder::new(&format!("doc{d:02}"));
            for _ in 0..rng.gen_range(1..=3usize) {
                let mentions = rng.gen_range(1..=3usize);
                for m in 0..mentions {
                    let e = format!("ent{}", rng.gen_range(0..n_entities));
                    let surface = format!("Ent{}", &e[3..]);
                    b = b.mention(&e, &surface);
                    let words = if m + 1 == mentions {
                        rng.gen_range(0..=3usize)
                    } else {
                        rng.gen_range(1..=5usize)
                    };
                    for _ in 0..words {
                        b = b.word(MINI_VOCAB[rng.gen_range(0..MINI_VOCAB.len())]);
                    }
                }
                b = b.stop();
            }
            b.build()
        })
        .collect();

    let corpus = Corpus::new(docs).expect("random corpus is well-formed");
    let index = build_index(&corpus, &IndexOptions::default()).expect("random corpus indexes");

    let pick_terms = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(1..=2usize);
        (0..n)
            .map(|_| MINI_VOCAB[rng.gen_range(0..MINI_VOCAB.len())])
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut subqueries = Vec::new();
    for slot in 0..entity_slots {
        if slot > 0 {
            subqueries.push(SubQuery::relationship(pick_terms(&mut rng)));
        }
        subqueries.push(SubQuery::entity(pick_terms(&mut rng)));
    }
    let query = ERQuery::new(format!("rand{seed}"), subqueries).expect("random query is valid");
    (index, query)
}

// ---------------------------------------------------------------------------
// Brute-force join oracle
// ---------------------------------------------------------------------------

/// Dirichlet-smoothed language-model score, recomputed from first principles
/// (base-10 log, unseen-term sentinel) without touching the scoring module.
pub fn oracle_lm(tf: u64, cf: u64, doc_len: u64, total_terms: u64, mu: f64) -> f64 {
    if cf == 0 || total_terms == 0 {
        return UNSEEN_SCORE;
    }
    ((tf as f64 + mu * cf as f64 / total_terms as f64) / (doc_len as f64 + mu)).log10()
}

fn oracle_part_score(part: &IndexPart, key: &str, terms: &[String], mu: f64) -> f64 {
    let md = part.get(key).expect("oracle scores existing keys");
    terms
        .iter()
        .map(|t| oracle_lm(md.tf(t), part.stats.cf(t), md.length, part.stats.total_terms, mu))
        .sum()
}

fn oracle_matches(part: &IndexPart, key: &str, terms: &[String]) -> bool {
    let md = part.get(key).expect("oracle checks existing keys");
    terms.iter().any(|t| md.tf(t) > 0)
}

/// Exhaustive early-fusion ranking: enumerate every ordered entity tuple over
/// the whole entity index, keep the ones satisfying the join constraints
/// (every entity matches its slot, every consecutive pair exists, matches its
/// slot, and differs from its predecessor), score each as the plain sum of
/// slot scores, and sort (score descending, key ascending). No cap is
/// applied, so callers can both measure the join space and compare ranking
/// prefixes. Assumes `candidate_k` exceeds every candidate list.
pub fn oracle_join(index: &ERIndex, query: &ERQuery, params: &ScoringParams) -> Vec<(String, f64)> {
    let mu_e = params.mu_entity.unwrap_or(index.entities.stats.mu);
    let mu_r = params.mu_relationship.unwrap_or(index.relationships.stats.mu);
    let ent_terms: Vec<Vec<String>> = query
        .entity_subqueries()
        .iter()
        .map(|s| s.tokens())
        .collect();
    let rel_terms: Vec<Vec<String>> = query
        .relationship_subqueries()
        .iter()
        .map(|s| s.tokens())
        .collect();

    // Match-filtered slot candidates over the full index.
    let slot_entities: Vec<Vec<String>> = ent_terms
        .iter()
        .map(|terms| {
            index
                .entities
                .docs
                .keys()
                .filter(|k| oracle_matches(&index.entities, k, terms))
                .cloned()
                .collect()
        })
        .collect();

    fn pair_label(a: &str, b: &str) -> String {
        PairKey::new(EntityId::new(a), EntityId::new(b))
            .expect("pair of distinct entities")
            .label()
    }

    struct Search<'a> {
        index: &'a ERIndex,
        slot_entities: &'a [Vec<String>],
        ent_terms: &'a [Vec<String>],
        rel_terms: &'a [Vec<String>],
        mu_e: f64,
        mu_r: f64,
        results: Vec<(String, f64)>,
    }

    impl Search<'_> {
        fn extend(&mut self, chain: &mut Vec<String>) {
            let depth = chain.len();
            if depth == self.slot_entities.len() {
                // Score the complete tuple: entity slots plus pair slots.
                let mut score = 0.0;
                for (i, e) in chain.iter().enumerate() {
                    score += oracle_part_score(&self.index.entities, e, &self.ent_terms[i], self.mu_e);
                }
                for (i, w) in chain.windows(2).enumerate() {
                    let label = pair_label(&w[0], &w[1]);
                    score += oracle_part_score(
                        &self.index.relationships,
                        &label,
                        &self.rel_terms[i],
                        self.mu_r,
                    );
                }
                self.results.push((chain.join("|"), score));
                return;
            }
            for e in &self.slot_entities[depth] {
                if depth > 0 {
                    let prev = &chain[depth - 1];
                    if prev == e {
                        continue; // a pair needs two distinct entities
                    }
                    let label = pair_label(prev, e);
                    // The connecting pair must exist and match its sub-query.
                    if self.index.relationships.get(&label).is_none()
                        || !oracle_matches(&self.index.relationships, &label, &self.rel_terms[depth - 1])
                    {
                        continue;
                    }
                    // Consecutive pairs must differ.
                    if depth > 1 && pair_label(&chain[depth - 2], prev) == label {
                        continue;
                    }
                }
                chain.push(e.clone());
                self.extend(chain);
                chain.pop();
            }
        }
    }

    let mut search = Search {
        index,
        slot_entities: &slot_entities,
        ent_terms: &ent_terms,
        rel_terms: &rel_terms,
        mu_e,
        mu_r,
        results: Vec::new(),
    };
    search.extend(&mut Vec::new());
    let mut results = search.results;

    results.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    results
}

// ---------------------------------------------------------------------------
// Naive counting oracles
// ---------------------------------------------------------------------------

/// Naive ordered-bigram count over one context.
pub fn oracle_ordered_bigram(ctx: &[String], t1: &str, t2: &str) -> u64 {
    ctx.windows(2).filter(|w| w[0] == t1 && w[1] == t2).count() as u64
}

/// Naive unordered-window count over one context: greedy nearest-unused
/// matching via explicit used-flags, the slow mirror of the two-pointer scan.
pub fn oracle_unordered_window(ctx: &[String], t1: &str, t2: &str, window: usize) -> u64 {
    let d = window - 1;
    let positions = |t: &str| -> Vec<usize> {
        ctx.iter()
            .enumerate()
            .filter_map(|(i, w)| (w == t).then_some(i))
            .collect()
    };
    if t1 == t2 {
        let pos = positions(t1);
        let mut used = vec![false; pos.len()];
        let mut n = 0;
        for i in 0..pos.len() {
            if used[i] {
                continue;
            }
            if let Some(j) = (i + 1..pos.len()).find(|&j| !used[j]) {
                if pos[j] - pos[i] <= d {
                    used[i] = true;
                    used[j] = true;
                    n += 1;
                }
            }
        }
        n
    } else {
        let p1 = positions(t1);
        let p2 = positions(t2);
        let mut used = vec![false; p2.len()];
        let mut n = 0;
        for &a in &p1 {
            if let Some(j) = (0..p2.len()).find(|&j| !used[j] && p2[j].abs_diff(a) <= d) {
                used[j] = true;
                n += 1;
            }
        }
        n
    }
}

/// Naive unigram recount of one meta-document.
pub fn oracle_term_freqs(contexts: &[Vec<String>]) -> BTreeMap<String, u64> {
    let mut freqs = BTreeMap::new();
    for ctx in contexts {
        for t in ctx {
            *freqs.entry(t.clone()).or_insert(0) += 1;
        }
    }
    freqs
}

// ---------------------------------------------------------------------------
// Late-fusion aggregation oracle
// ---------------------------------------------------------------------------

/// Naive late-fusion aggregates for one sub-query: score every matching raw
/// document with the closed-form language model, then fold document scores
/// onto associated entities (or co-mentioned pairs). Returns sorted lists in
/// production order (score descending, key ascending). Assumes `candidate_k`
/// exceeds the number of matching documents.
pub fn oracle_lf_list(
    index: &ERIndex,
    terms: &[String],
    params: &ScoringParams,
    pairs: bool,
) -> Vec<(String, f64)> {
    let part = &index.documents;
    let mu = params.mu_document.unwrap_or(part.stats.mu);
    let mut acc: BTreeMap<String, f64> = BTreeMap::new();
    for (doc_id, _) in part.docs.iter().filter(|(k, _)| oracle_matches(part, k, terms)) {
        let score = oracle_part_score(part, doc_id, terms, mu);
        let Some(entities) = index.doc_entities.get(doc_id) else {
            continue;
        };
        if pairs {
            let list: Vec<_> = entities.iter().collect();
            for i in 0..list.len() {
                for j in i + 1..list.len() {
                    let label = PairKey::new(list[i].clone(), list[j].clone())
                        .expect("distinct set members")
                        .label();
                    *acc.entry(label).or_insert(0.0) += score;
                }
            }
        } else {
            for e in entities {
                *acc.entry(e.0.clone()).or_insert(0.0) += score;
            }
        }
    }
    let mut out: Vec<(String, f64)> = acc.into_iter().collect();
    out.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    out
}

// ---------------------------------------------------------------------------
// Simplex grid-search oracle
// ---------------------------------------------------------------------------

/// Best training MAP over the step-0.05 weight simplex. For pair queries the
/// bridge feature is identically zero (a two-entity tuple has no interior
/// entity), and putting grid mass on an all-zero feature only rescales every
/// tuple score by the same positive factor, so restricting the grid to the
/// other seven coordinates loses no orderings while shrinking the point count
/// from C(27,7) to C(26,6).
pub fn oracle_grid_best_map(set: &tuplerank::ltr::TrainingSet) -> f64 {
    use rayon::prelude::*;
    use tuplerank::ltr::{evaluate_weights, TrainMetric};
    use tuplerank::scoring::{FeatureWeights, FEATURE_COUNT};

    const STEPS: u32 = 20; // 1 / 0.05
    const ACTIVE: usize = 7;
    let mut points: Vec<[f64; FEATURE_COUNT]> = Vec::new();
    let mut units = [0u32; ACTIVE];
    fn fill(
        remaining: u32,
        dim: usize,
        units: &mut [u32; ACTIVE],
        points: &mut Vec<[f64; FEATURE_COUNT]>,
    ) {
        if dim == ACTIVE - 1 {
            units[dim] = remaining;
            let mut w = [0.0; FEATURE_COUNT];
            for (i, &u) in units.iter().enumerate() {
                w[i] = u as f64 / STEPS as f64;
            }
            points.push(w);
            return;
        }
        for v in 0..=remaining {
            units[dim] = v;
            fill(remaining - v, dim + 1, units, points);
        }
    }
    fill(STEPS, 0, &mut units, &mut points);

    points
        .par_iter()
        .map(|w| evaluate_weights(set, &FeatureWeights::from_array(*w), TrainMetric::Map))
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

// ---------------------------------------------------------------------------
// Title-sampling oracle
// ---------------------------------------------------------------------------

/// Independent reimplementation of the near-duplicate title filter: quadratic
/// greedy pass in input order, sets built with a local tokenizer.
pub fn oracle_title_sample(titles: &[&str], threshold: f64) -> Vec<usize> {
    const STOPWORDS: [&str; 11] = [
        "a", "an", "and", "by", "for", "in", "of", "on", "or", "the", "to",
    ];
    let tokens = |title: &str| -> std::collections::BTreeSet<String> {
        title
            .split_whitespace()
            .map(|w| {
                w.trim_matches(|c: char| !c.is_alphanumeric())
                    .to_lowercase()
            })
            .filter(|w| !w.is_empty() && !STOPWORDS.contains(&w.as_str()))
            .collect()
    };
    let jaccard = |a: &str, b: &str| -> f64 {
        let (ta, tb) = (tokens(a), tokens(b));
        if ta.is_empty() && tb.is_empty() {
            return 1.0;
        }
        ta.intersection(&tb).count() as f64 / ta.union(&tb).count() as f64
    };
    let mut admitted: Vec<usize> = Vec::new();
    for (i, title) in titles.iter().enumerate() {
        if admitted
            .iter()
            .all(|&j| jaccard(title, titles[j]) <= threshold)
        {
            admitted.push(i);
        }
    }
    admitted
}
