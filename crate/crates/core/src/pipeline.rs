//! End-to-end transformation: parse, retrieve an expression, substitute,
//! add sentiment, and record every decision in a [`TransformTrace`].

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::adapter::ParserAdapter;
use crate::config::{ConfigError, DirectionPolicy, PipelineConfig};
use crate::conllu::{ParsedSentence, Token};
use crate::matrix::RelationCounts;
use crate::retrieval::{top_match, Embeddings, QuoteIndex};
use crate::sentiment::{insert_adjectives, AdjectiveLexicon, Insertion, NounGazetteer};
use crate::substitution::{transform_with_quote, CandidatePair, Direction, SubstitutionResult};
use crate::wordnet::Lexicon;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Resources,
    Parse,
    Retrieve,
    Substitute,
    Sentiment,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Resources => "resources",
            Stage::Parse => "parse",
            Stage::Retrieve => "retrieve",
            Stage::Substitute => "substitute",
            Stage::Sentiment => "sentiment",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Missing or malformed resource or configuration.
    Resource,
    /// The external parser failed.
    Adapter,
}

#[derive(Clone, Debug, Error, Serialize)]
#[error("{stage} stage: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    fn resource(stage: Stage, e: impl std::fmt::Display) -> Self {
        PipelineError {
            stage,
            kind: ErrorKind::Resource,
            message: e.to_string(),
        }
    }

    fn adapter(stage: Stage, e: impl std::fmt::Display) -> Self {
        PipelineError {
            stage,
            kind: ErrorKind::Adapter,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        PipelineError::resource(Stage::Config, e)
    }
}

/// Everything a transformation reads. Immutable once loaded, so one set is
/// shared by all batch workers.
#[derive(Debug)]
pub struct Resources {
    pub matrix: RelationCounts,
    pub lexicon: Lexicon,
    pub quotes: QuoteIndex,
    pub adjectives: AdjectiveLexicon,
    pub gazetteer: NounGazetteer,
    pub parser: Option<ParserAdapter>,
}

impl Resources {
    pub fn load(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let res = |e: &dyn std::fmt::Display| PipelineError::resource(Stage::Resources, e);
        let (lexicon, rest) = rayon::join(
            || Lexicon::load(&cfg.wordnet_dir),
            || -> Result<_, PipelineError> {
                let matrix = RelationCounts::load_from_path(&cfg.matrix_path).map_err(|e| {
                    PipelineError::resource(Stage::Resources, format!("{}: {e}", cfg.matrix_path.display()))
                })?;
                let mut quotes = QuoteIndex::load(&cfg.quote_index_path).map_err(|e| res(&e))?;
                if let Some(path) = &cfg.embeddings_path {
                    quotes = quotes.with_embeddings(Embeddings::load(path).map_err(|e| res(&e))?);
                }
                quotes.check_config(&cfg.similarity).map_err(|e| res(&e))?;
                let adjectives = AdjectiveLexicon::load(&cfg.adjective_lexicon_path).map_err(|e| res(&e))?;
                let gazetteer = NounGazetteer::load(&cfg.gazetteer_path).map_err(|e| res(&e))?;
                Ok((matrix, quotes, adjectives, gazetteer))
            },
        );
        let lexicon = lexicon.map_err(|e| res(&e))?;
        let (matrix, quotes, adjectives, gazetteer) = rest?;
        let parser = match &cfg.parser_adapter {
            Some(a) => Some(ParserAdapter::new(a).map_err(|e| PipelineError::adapter(Stage::Resources, e))?),
            None => None,
        };
        Ok(Resources {
            matrix,
            lexicon,
            quotes,
            adjectives,
            gazetteer,
            parser,
        })
    }
}

#[derive(Clone, Debug)]
pub enum TransformInput {
    Text(String),
    Parsed(ParsedSentence),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TokenSummary {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub upos: String,
    pub head: usize,
    pub deprel: String,
}

impl From<&Token> for TokenSummary {
    fn from(t: &Token) -> Self {
        TokenSummary {
            index: t.index,
            surface: t.surface.clone(),
            lemma: t.lemma.clone(),
            upos: t.upos.clone(),
            head: t.head,
            deprel: t.deprel.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchedQuote {
    pub id: usize,
    pub text: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformTrace {
    pub input_text: String,
    pub input_parse_summary: Vec<TokenSummary>,
    pub matched_quotes: Vec<MatchedQuote>,
    /// Absent when no expression was used.
    pub direction_used: Option<Direction>,
    pub candidate_table: Vec<CandidatePair>,
    pub chosen_pair: Option<CandidatePair>,
    pub substituted_text: String,
    pub insertions: Vec<Insertion>,
    pub final_text: String,
    /// Milliseconds per stage.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

/// One line of batch output: a trace, or the error for that line.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum BatchRecord {
    Trace(Box<TransformTrace>),
    Error {
        line: usize,
        input_text: String,
        error: PipelineError,
    },
}

/// Loaded resources plus run settings. Clones share the resources.
#[derive(Clone)]
pub struct Pipeline {
    cfg: PipelineConfig,
    res: Arc<Resources>,
    timings: bool,
}

impl Pipeline {
    pub fn load(cfg: PipelineConfig) -> Result<Self, PipelineError> {
        let res = Resources::load(&cfg)?;
        Ok(Pipeline::new(cfg, res))
    }

    pub fn new(cfg: PipelineConfig, res: Resources) -> Self {
        Pipeline {
            cfg,
            res: Arc::new(res),
            timings: true,
        }
    }

    /// Leaves stage timings out of traces, making them byte-reproducible.
    pub fn without_timings(mut self) -> Self {
        self.timings = false;
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    /// Run settings may be changed freely; resource paths are only read by
    /// [`Pipeline::load`].
    pub fn config_mut(&mut self) -> &mut PipelineConfig {
        &mut self.cfg
    }

    pub fn resources(&self) -> &Resources {
        &self.res
    }

    pub fn parse(&self, text: &str) -> Result<ParsedSentence, PipelineError> {
        let parser = self
            .res
            .parser
            .as_ref()
            .ok_or_else(|| PipelineError::adapter(Stage::Parse, "no parser_adapter configured for raw text input"))?;
        parser.parse(text).map_err(|e| {
            let mut message = e.message;
            if !e.diagnostics.trim().is_empty() {
                message.push_str(": ");
                message.push_str(e.diagnostics.trim());
            }
            PipelineError::adapter(Stage::Parse, message)
        })
    }

    pub fn transform(&self, input: TransformInput) -> Result<TransformTrace, PipelineError> {
        let mut timings = BTreeMap::new();
        let mut clock = Instant::now();
        let mut lap = |name: &str, timings: &mut BTreeMap<String, f64>| {
            timings.insert(name.to_string(), clock.elapsed().as_secs_f64() * 1e3);
            clock = Instant::now();
        };
        let started = Instant::now();

        let input = match input {
            TransformInput::Text(text) => self.parse(&text)?,
            TransformInput::Parsed(s) => s,
        };
        lap("parse", &mut timings);

        let matches = top_match(&input, &self.res.quotes, &self.cfg.similarity);
        let matched_quotes: Vec<MatchedQuote> = matches
            .iter()
            .map(|(q, score)| MatchedQuote {
                id: q.id,
                text: q.raw.clone(),
                score: *score,
            })
            .collect();
        lap("retrieve", &mut timings);

        let mut trace = TransformTrace {
            input_text: input.raw_text().to_string(),
            input_parse_summary: input.tokens().iter().map(TokenSummary::from).collect(),
            matched_quotes,
            direction_used: None,
            candidate_table: Vec::new(),
            chosen_pair: None,
            substituted_text: input.raw_text().to_string(),
            insertions: Vec::new(),
            final_text: input.raw_text().to_string(),
            timings: None,
        };

        let best = match matches.first() {
            Some((quote, score)) if *score >= self.cfg.min_similarity => *quote,
            _ => {
                timings.insert("total".into(), started.elapsed().as_secs_f64() * 1e3);
                trace.timings = self.timings.then_some(timings);
                return Ok(trace);
            }
        };

        let run = |d| transform_with_quote(&input, best, &self.res.matrix, &self.res.lexicon, d);
        let result: SubstitutionResult = match self.cfg.direction_policy {
            DirectionPolicy::InputModified => run(Direction::InputModified),
            DirectionPolicy::QuoteModified => run(Direction::QuoteModified),
            DirectionPolicy::BestOfBoth => {
                let forward = run(Direction::InputModified);
                let backward = run(Direction::QuoteModified);
                let score = |r: &SubstitutionResult| r.chosen.as_ref().map(|c| c.score);
                match (score(&forward), score(&backward)) {
                    (Some(f), Some(b)) if b > f => backward,
                    (None, Some(_)) => backward,
                    _ => forward,
                }
            }
        };
        lap("substitute", &mut timings);

        trace.direction_used = Some(result.direction);
        trace.substituted_text = result.output_text().to_string();
        trace.final_text = trace.substituted_text.clone();
        if self.cfg.sentiment {
            let (enhanced, insertions) = insert_adjectives(
                &result.output,
                &self.res.adjectives,
                &self.res.gazetteer,
                self.cfg.max_insertions,
                self.cfg.seed,
            )
            .map_err(|e| PipelineError::resource(Stage::Sentiment, e))?;
            trace.final_text = enhanced.raw_text().to_string();
            trace.insertions = insertions;
        }
        lap("sentiment", &mut timings);

        trace.candidate_table = result.candidates;
        trace.chosen_pair = result.chosen;
        timings.insert("total".into(), started.elapsed().as_secs_f64() * 1e3);
        trace.timings = self.timings.then_some(timings);
        Ok(trace)
    }

    /// Transforms every nonblank line, in parallel, keeping input order.
    /// Failures become per-line error records.
    pub fn run_batch<S: AsRef<str> + Sync>(&self, lines: &[S]) -> Vec<BatchRecord> {
        let work: Vec<(usize, &str)> = lines
            .iter()
            .enumerate()
            .map(|(i, l)| (i + 1, l.as_ref().trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        work.par_iter()
            .map(|&(line, text)| match self.transform(TransformInput::Text(text.to_string())) {
                Ok(trace) => BatchRecord::Trace(Box::new(trace)),
                Err(error) => BatchRecord::Error {
                    line,
                    input_text: text.to_string(),
                    error,
                },
            })
            .collect()
    }

    /// Reads `input`, writes one JSON object per nonblank line to `output`.
    pub fn run_batch_file(&self, input: &Path, output: &Path) -> Result<usize, PipelineError> {
        let text = std::fs::read_to_string(input)
            .map_err(|e| PipelineError::resource(Stage::Resources, format!("{}: {e}", input.display())))?;
        let lines: Vec<&str> = text.lines().collect();
        let records = self.run_batch(&lines);
        let mut out = String::new();
        for r in &records {
            out.push_str(&serde_json::to_string(r).expect("trace serializes"));
            out.push('\n');
        }
        std::fs::write(output, out)
            .map_err(|e| PipelineError::resource(Stage::Resources, format!("{}: {e}", output.display())))?;
        Ok(records.len())
    }
}
