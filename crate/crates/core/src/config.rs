//! Flat `key = value` pipeline configuration.
//!
//! ```text
//! # resources (relative paths resolve against the config file)
//! matrix_path = fashion.matrix
//! wordnet_dir = ../data/wordnet-3.0
//! quote_index_path = quotes/
//! adjective_lexicon_path = adjectives.tsv
//! gazetteer_path = gazetteer.tsv
//! parser_adapter = {"kind": "command", "command": ["udpipe-wrapper"], "timeout_ms": 10000}
//! similarity_method = tfidf
//! top_k = 3
//! direction_policy = input_modified
//! min_similarity = 0
//! max_insertions = 2
//! seed = 0
//! sentiment = on
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapter::ParserAdapterConfig;
use crate::retrieval::{SimilarityConfig, SimilarityMethod};
use crate::sentiment::DEFAULT_MAX_INSERTIONS;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error("config: {key} path {} does not exist", path.display())]
    MissingPath { key: &'static str, path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionPolicy {
    #[default]
    InputModified,
    QuoteModified,
    BestOfBoth,
}

impl std::str::FromStr for DirectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "input_modified" => Ok(DirectionPolicy::InputModified),
            "quote_modified" => Ok(DirectionPolicy::QuoteModified),
            "best_of_both" => Ok(DirectionPolicy::BestOfBoth),
            other => Err(format!(
                "unknown direction `{other}` (expected input_modified, quote_modified or best_of_both)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub matrix_path: PathBuf,
    pub wordnet_dir: PathBuf,
    pub quote_index_path: PathBuf,
    pub adjective_lexicon_path: PathBuf,
    pub gazetteer_path: PathBuf,
    pub embeddings_path: Option<PathBuf>,
    pub parser_adapter: Option<ParserAdapterConfig>,
    pub similarity: SimilarityConfig,
    pub direction_policy: DirectionPolicy,
    pub min_similarity: f64,
    pub max_insertions: usize,
    pub seed: u64,
    pub sentiment: bool,
}

impl PipelineConfig {
    pub fn new(
        matrix_path: impl Into<PathBuf>,
        wordnet_dir: impl Into<PathBuf>,
        quote_index_path: impl Into<PathBuf>,
        adjective_lexicon_path: impl Into<PathBuf>,
        gazetteer_path: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            matrix_path: matrix_path.into(),
            wordnet_dir: wordnet_dir.into(),
            quote_index_path: quote_index_path.into(),
            adjective_lexicon_path: adjective_lexicon_path.into(),
            gazetteer_path: gazetteer_path.into(),
            embeddings_path: None,
            parser_adapter: None,
            similarity: SimilarityConfig::default(),
            direction_policy: DirectionPolicy::default(),
            min_similarity: 0.0,
            max_insertions: DEFAULT_MAX_INSERTIONS,
            seed: 0,
            sentiment: true,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut matrix = None;
        let mut wordnet = None;
        let mut quotes = None;
        let mut adjectives = None;
        let mut gazetteer = None;
        let mut cfg = PipelineConfig::new("", "", "", "", "");

        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| ConfigError::Syntax { line: lineno, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let path = || base.join(value);
            match key {
                "matrix_path" => matrix = Some(path()),
                "wordnet_dir" => wordnet = Some(path()),
                "quote_index_path" => quotes = Some(path()),
                "adjective_lexicon_path" => adjectives = Some(path()),
                "gazetteer_path" => gazetteer = Some(path()),
                "embeddings_path" => cfg.embeddings_path = Some(path()),
                "parser_adapter" => {
                    let mut adapter: ParserAdapterConfig =
                        serde_json::from_str(value).map_err(|e| syntax(format!("parser_adapter: {e}")))?;
                    adapter.resolve_paths(base);
                    cfg.parser_adapter = Some(adapter);
                }
                "similarity_method" => cfg.similarity.method = value.parse::<SimilarityMethod>().map_err(syntax)?,
                "top_k" => cfg.similarity.k = parse_num(value).map_err(syntax)?,
                "direction_policy" => cfg.direction_policy = value.parse().map_err(syntax)?,
                "min_similarity" => cfg.min_similarity = parse_num(value).map_err(syntax)?,
                "max_insertions" => cfg.max_insertions = parse_num(value).map_err(syntax)?,
                "seed" => cfg.seed = parse_num(value).map_err(syntax)?,
                "sentiment" => {
                    cfg.sentiment = match value {
                        "on" | "true" => true,
                        "off" | "false" => false,
                        other => return Err(syntax(format!("sentiment must be on or off, found `{other}`"))),
                    }
                }
                other => return Err(syntax(format!("unknown key `{other}`"))),
            }
        }

        let required = |v: Option<PathBuf>, key: &str| {
            v.ok_or_else(|| ConfigError::Invalid(format!("missing required key `{key}`")))
        };
        cfg.matrix_path = required(matrix, "matrix_path")?;
        cfg.wordnet_dir = required(wordnet, "wordnet_dir")?;
        cfg.quote_index_path = required(quotes, "quote_index_path")?;
        cfg.adjective_lexicon_path = required(adjectives, "adjective_lexicon_path")?;
        cfg.gazetteer_path = required(gazetteer, "gazetteer_path")?;
        Ok(cfg)
    }

    /// Checks numeric bounds and that every referenced path exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.similarity.k == 0 {
            return Err(ConfigError::Invalid("top_k must be positive".into()));
        }
        if self.max_insertions == 0 {
            return Err(ConfigError::Invalid("max_insertions must be positive".into()));
        }
        // Values above 1 are allowed and disable transformation entirely.
        if !(self.min_similarity >= 0.0) || !self.min_similarity.is_finite() {
            return Err(ConfigError::Invalid("min_similarity must be a nonnegative number".into()));
        }
        let mut paths: Vec<(&'static str, &PathBuf)> = vec![
            ("matrix_path", &self.matrix_path),
            ("wordnet_dir", &self.wordnet_dir),
            ("quote_index_path", &self.quote_index_path),
            ("adjective_lexicon_path", &self.adjective_lexicon_path),
            ("gazetteer_path", &self.gazetteer_path),
        ];
        if let Some(p) = &self.embeddings_path {
            paths.push(("embeddings_path", p));
        }
        for (key, path) in paths {
            if !path.exists() {
                return Err(ConfigError::MissingPath { key, path: path.clone() });
            }
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad number `{value}`"))
}
