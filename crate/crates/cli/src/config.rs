//! Experiment manifests: a plain `key = value` file merged with command-line
//! flags, flags winning. Keeping the whole configuration in one committed
//! file makes a run reproducible from its manifest alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

use tuplerank::scoring::{FeatureWeights, Model, ScorerFamily, ScoringParams};

/// Keys a manifest may define. Anything else is a typo worth failing on.
const CONFIG_KEYS: [&str; 15] = [
    "index",
    "family",
    "model",
    "k",
    "result_cap",
    "mu_entity",
    "mu_relationship",
    "mu_document",
    "alpha",
    "k1",
    "b",
    "window",
    "weights",
    "seed",
    "tag",
];

/// Parsed manifest contents.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "config {} line {}: expected `key = value`, got {raw:?}",
                    path.display(),
                    i + 1
                );
            };
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if !CONFIG_KEYS.contains(&key.as_str()) {
                bail!(
                    "config {} line {}: unknown key {key:?} (known: {})",
                    path.display(),
                    i + 1,
                    CONFIG_KEYS.join(", ")
                );
            }
            if entries.insert(key.clone(), value).is_some() {
                bail!(
                    "config {} line {}: duplicate key {key:?}",
                    path.display(),
                    i + 1
                );
            }
        }
        Ok(ConfigFile { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config key {key}: invalid value {raw:?} ({e})")),
        }
    }
}

/// Ranking configuration flags shared by the query-running commands. Every
/// flag can also come from the manifest named by `--config`; a flag given on
/// the command line wins.
#[derive(Debug, Default, Args)]
pub struct RankingFlags {
    /// Experiment manifest (`key = value` lines, `#` comments).
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Index snapshot produced by build-index.
    #[arg(long)]
    pub index: Option<PathBuf>,

    /// Ranking model: ef | lf | erdm | base-ee | base-e | base-r.
    #[arg(long)]
    pub model: Option<String>,

    /// Scorer family: lm | bm25.
    #[arg(long)]
    pub family: Option<String>,

    /// First-pass candidate depth per sub-query.
    #[arg(long)]
    pub k: Option<usize>,

    /// Ranked-list depth per query.
    #[arg(long)]
    pub result_cap: Option<usize>,

    /// Smoothing mass for entity meta-documents (collection average when unset).
    #[arg(long)]
    pub mu_entity: Option<f64>,

    /// Smoothing mass for relationship meta-documents.
    #[arg(long)]
    pub mu_relationship: Option<f64>,

    /// Smoothing mass for raw documents (late fusion).
    #[arg(long)]
    pub mu_document: Option<f64>,

    /// Entity/pair compatibility smoothing weight.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// BM25 k1.
    #[arg(long)]
    pub k1: Option<f64>,

    /// BM25 b.
    #[arg(long)]
    pub b: Option<f64>,

    /// Unordered co-occurrence window width.
    #[arg(long)]
    pub window: Option<usize>,

    /// Feature-weights JSON, as written by train (required by model erdm).
    #[arg(long)]
    pub weights: Option<PathBuf>,

    /// Seed for folds and restarts.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// A fully resolved ranking setup.
#[derive(Debug)]
pub struct Resolved {
    pub index_path: PathBuf,
    pub model: Model,
    pub params: ScoringParams,
    pub seed: u64,
}

/// Flag value if present, else manifest value, else `None`.
fn pick<T: FromStr + Clone>(flag: &Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag.clone());
    }
    file.parse(key)
}

impl RankingFlags {
    pub fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };

        let index_path = pick(&self.index, &file, "index")?
            .ok_or_else(|| anyhow!("no index given (flag --index or config key `index`)"))?;

        let defaults = ScoringParams::default();
        let family = match pick(&self.family, &file, "family")?.as_deref() {
            None => defaults.family,
            Some("lm") => ScorerFamily::LanguageModel,
            Some("bm25") => ScorerFamily::Bm25,
            Some(other) => bail!("unknown scorer family {other:?} (expected lm or bm25)"),
        };
        let params = ScoringParams {
            family,
            mu_entity: pick(&self.mu_entity, &file, "mu_entity")?,
            mu_relationship: pick(&self.mu_relationship, &file, "mu_relationship")?,
            mu_document: pick(&self.mu_document, &file, "mu_document")?,
            k1: pick(&self.k1, &file, "k1")?.unwrap_or(defaults.k1),
            b: pick(&self.b, &file, "b")?.unwrap_or(defaults.b),
            alpha: pick(&self.alpha, &file, "alpha")?.unwrap_or(defaults.alpha),
            window: pick(&self.window, &file, "window")?.unwrap_or(defaults.window),
            candidate_k: pick(&self.k, &file, "k")?.unwrap_or(defaults.candidate_k),
            result_cap: pick(&self.result_cap, &file, "result_cap")?
                .unwrap_or(defaults.result_cap),
            sdm_weights: defaults.sdm_weights,
        };
        params.validate()?;

        let weights_path = pick(&self.weights, &file, "weights")?;
        let model = match pick(&self.model, &file, "model")?.as_deref() {
            None | Some("ef") => Model::EarlyFusion,
            Some("lf") => Model::LateFusion,
            Some("erdm") => {
                let path: PathBuf = weights_path.ok_or_else(|| {
                    anyhow!("model erdm needs a weights file (flag --weights or config key `weights`)")
                })?;
                Model::Erdm(load_weights(&path)?)
            }
            Some("base-ee") => Model::BaseEE,
            Some("base-e") => Model::BaseE,
            Some("base-r") => Model::BaseR,
            Some(other) => bail!(
                "unknown model {other:?} (expected ef, lf, erdm, base-ee, base-e or base-r)"
            ),
        };

        let seed = pick(&self.seed, &file, "seed")?.unwrap_or(42);
        Ok(Resolved {
            index_path,
            model,
            params,
            seed,
        })
    }

    /// The manifest's `tag` entry, if a manifest was named and defines one.
    pub fn manifest_tag(&self) -> Result<Option<String>> {
        match &self.config {
            Some(path) => Ok(ConfigFile::load(path)?.get("tag").map(str::to_string)),
            None => Ok(None),
        }
    }
}

/// Load feature weights from train's output (either the bare weight object or
/// the full report containing one under "weights").
pub fn load_weights(path: &Path) -> Result<FeatureWeights> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading weights {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing weights {}", path.display()))?;
    let weights_value = value.get("weights").unwrap_or(&value);
    let weights: FeatureWeights = serde_json::from_value(weights_value.clone())
        .with_context(|| format!("parsing weights {}", path.display()))?;
    weights.validate()?;
    Ok(weights)
}
