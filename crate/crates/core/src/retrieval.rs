//! Retrieval of the well-known expression (quotation, slogan, movie line)
//! closest to an input sentence.
//!
//! Similarity is pluggable: a tf-idf cosine baseline over content lemmas, or
//! the cosine of mean word embeddings when an embedding table is attached.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapter::{AdapterError, ParserAdapter};
use crate::conllu::{content_words, parse_conllu, write_conllu, ContentWord, ConlluError, ParsedSentence};

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("quote line {line}: {source}")]
    Adapter { line: usize, source: AdapterError },
    #[error("{file}: {source}")]
    Conllu { file: String, source: ConlluError },
    #[error("{file} line {line}: {message}")]
    Format { file: String, line: usize, message: String },
    #[error("I/O error on {file}: {source}")]
    Io { file: String, source: io::Error },
    #[error("{0}")]
    Config(String),
}

fn io_err(file: &Path) -> impl FnOnce(io::Error) -> RetrievalError + '_ {
    move |source| RetrievalError::Io {
        file: file.display().to_string(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuoteRecord {
    /// Zero-based line number in the source corpus file.
    pub id: usize,
    pub raw: String,
    pub parse: ParsedSentence,
    /// Lowercase content lemmas, in sentence order.
    pub terms: Vec<String>,
}

impl QuoteRecord {
    /// The parse's `sent_id` is set to `id`.
    pub fn new(id: usize, raw: impl Into<String>, mut parse: ParsedSentence) -> Self {
        parse.set_sent_id(Some(id.to_string()));
        let terms = content_terms(&parse);
        QuoteRecord {
            id,
            raw: raw.into(),
            parse,
            terms,
        }
    }

    pub fn content(&self) -> Vec<ContentWord<'_>> {
        content_words(&self.parse)
    }
}

fn content_terms(s: &ParsedSentence) -> Vec<String> {
    content_words(s).iter().map(|c| c.token.lemma.to_lowercase()).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityMethod {
    #[default]
    Tfidf,
    Embedding,
}

impl std::str::FromStr for SimilarityMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tfidf" => Ok(SimilarityMethod::Tfidf),
            "embedding" => Ok(SimilarityMethod::Embedding),
            other => Err(format!("unknown similarity method `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub method: SimilarityMethod,
    pub k: usize,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            method: SimilarityMethod::Tfidf,
            k: 3,
        }
    }
}

/// Word vectors of a fixed dimension, keyed by lowercase term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Embeddings {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl Embeddings {
    pub fn new(dim: usize) -> Self {
        Embeddings {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<&[f64]> {
        self.vectors.get(term).map(Vec::as_slice)
    }

    /// Adds a vector; the first entry for a term wins.
    pub fn insert(&mut self, term: &str, vector: Vec<f64>) -> Result<(), String> {
        if vector.len() != self.dim {
            return Err(format!("expected {} components, found {}", self.dim, vector.len()));
        }
        self.vectors.entry(term.to_lowercase()).or_insert(vector);
        Ok(())
    }

    /// Multiplies every vector by `factor`.
    pub fn scaled(&self, factor: f64) -> Embeddings {
        Embeddings {
            dim: self.dim,
            vectors: self
                .vectors
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|x| x * factor).collect()))
                .collect(),
        }
    }

    /// Reads `term v1 ... vd` lines. A first line of exactly two integers is
    /// taken as a `count dim` header.
    pub fn read<R: BufRead>(r: R, file: &str) -> Result<Embeddings, RetrievalError> {
        let fail = |line: usize, message: String| RetrievalError::Format {
            file: file.to_string(),
            line,
            message,
        };
        let mut out: Option<Embeddings> = None;
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|source| RetrievalError::Io {
                file: file.to_string(),
                source,
            })?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if lineno == 1
                && fields.len() == 2
                && fields[0].parse::<u64>().is_ok()
                && fields[1].parse::<u64>().is_ok()
            {
                let dim = fields[1].parse::<usize>().unwrap_or(0);
                out = Some(Embeddings::new(dim));
                continue;
            }
            if fields.len() < 2 {
                return Err(fail(lineno, "entry has no vector components".into()));
            }
            let vector = fields[1..]
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| fail(lineno, format!("bad component `{v}`"))))
                .collect::<Result<Vec<f64>, _>>()?;
            let table = out.get_or_insert_with(|| Embeddings::new(vector.len()));
            table.insert(fields[0], vector).map_err(|m| fail(lineno, m))?;
        }
        Ok(out.unwrap_or_default())
    }

    pub fn load(path: &Path) -> Result<Embeddings, RetrievalError> {
        let f = File::open(path).map_err(io_err(path))?;
        Embeddings::read(BufReader::new(f), &path.display().to_string())
    }

    /// Mean vector of the sentence's content words found in the table,
    /// looking up the lemma first and the lowercase surface second.
    fn sentence_vector(&self, s: &ParsedSentence) -> Vec<f64> {
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for c in content_words(s) {
            let v = self
                .get(&c.token.lemma.to_lowercase())
                .or_else(|| self.get(&c.token.surface.to_lowercase()));
            if let Some(v) = v {
                for (acc, x) in sum.iter_mut().zip(v) {
                    *acc += x;
                }
                n += 1;
            }
        }
        if n > 0 {
            for x in sum.iter_mut() {
                *x /= n as f64;
            }
        }
        sum
    }
}

#[derive(Clone, Debug, Default)]
pub struct QuoteIndex {
    quotes: Vec<QuoteRecord>,
    df: HashMap<String, usize>,
    embeddings: Option<Embeddings>,
}

impl QuoteIndex {
    pub fn from_records(quotes: Vec<QuoteRecord>) -> Result<Self, RetrievalError> {
        let mut seen = std::collections::HashSet::new();
        for q in &quotes {
            if !seen.insert(q.id) {
                return Err(RetrievalError::Config(format!("duplicate quote id {}", q.id)));
            }
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for q in &quotes {
            let mut terms: Vec<&String> = q.terms.iter().collect();
            terms.sort();
            terms.dedup();
            for t in terms {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        Ok(QuoteIndex {
            quotes,
            df,
            embeddings: None,
        })
    }

    pub fn with_embeddings(mut self, embeddings: Embeddings) -> Self {
        self.embeddings = Some(embeddings);
        self
    }

    pub fn embeddings(&self) -> Option<&Embeddings> {
        self.embeddings.as_ref()
    }

    pub fn quotes(&self) -> &[QuoteRecord] {
        &self.quotes
    }

    pub fn len(&self) -> usize {
        self.quotes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotes.is_empty()
    }

    pub fn df(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    /// Smoothed inverse document frequency `ln((1+N)/(1+df)) + 1`.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.quotes.len() as f64;
        ((1.0 + n) / (1.0 + self.df(term) as f64)).ln() + 1.0
    }

    fn tfidf_vector(&self, terms: &[String]) -> BTreeMap<String, f64> {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in terms {
            *tf.entry(t.clone()).or_insert(0.0) += 1.0;
        }
        for (t, w) in tf.iter_mut() {
            *w *= self.idf(t);
        }
        tf
    }

    /// Checks that `cfg` can be served by this index.
    pub fn check_config(&self, cfg: &SimilarityConfig) -> Result<(), RetrievalError> {
        if cfg.k == 0 {
            return Err(RetrievalError::Config("top-k must be positive".into()));
        }
        if cfg.method == SimilarityMethod::Embedding && self.embeddings.is_none() {
            return Err(RetrievalError::Config(
                "embedding similarity requested but no embeddings are loaded".into(),
            ));
        }
        Ok(())
    }

    /// Writes `quotes.txt`, `quotes.conllu` and `stats.tsv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), RetrievalError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;

        let path = dir.join("quotes.txt");
        let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        for q in &self.quotes {
            writeln!(w, "{}", q.raw).map_err(io_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;

        let path = dir.join("quotes.conllu");
        let parses: Vec<ParsedSentence> = self
            .quotes
            .iter()
            .map(|q| {
                let mut p = q.parse.clone();
                p.set_sent_id(Some(q.id.to_string()));
                p
            })
            .collect();
        let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        write_conllu(&mut w, &parses).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;

        let path = dir.join("stats.tsv");
        let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        let mut df: Vec<(&String, &usize)> = self.df.iter().collect();
        df.sort();
        for (term, n) in df {
            writeln!(w, "{term}\t{n}").map_err(io_err(&path))?;
        }
        w.flush().map_err(io_err(&path))
    }

    /// Loads an index written by [`QuoteIndex::save`]. Document frequencies
    /// in `stats.tsv` must agree with the frozen parses.
    pub fn load(dir: &Path) -> Result<QuoteIndex, RetrievalError> {
        let path = dir.join("quotes.txt");
        let raws: Vec<String> = fs::read_to_string(&path)
            .map_err(io_err(&path))?
            .lines()
            .map(str::to_string)
            .collect();

        let path = dir.join("quotes.conllu");
        let file = path.display().to_string();
        let f = File::open(&path).map_err(io_err(&path))?;
        let parses = parse_conllu(BufReader::new(f)).map_err(|source| RetrievalError::Conllu {
            file: file.clone(),
            source,
        })?;
        if parses.len() != raws.len() {
            return Err(RetrievalError::Format {
                file,
                line: 0,
                message: format!("{} parses for {} quotes", parses.len(), raws.len()),
            });
        }
        let mut records = Vec::with_capacity(raws.len());
        for (i, (raw, parse)) in raws.into_iter().zip(parses).enumerate() {
            let id = parse
                .sent_id()
                .and_then(|id| id.parse::<usize>().ok())
                .ok_or_else(|| RetrievalError::Format {
                    file: file.clone(),
                    line: 0,
                    message: format!("parse {} lacks a numeric sent_id", i + 1),
                })?;
            records.push(QuoteRecord::new(id, raw, parse));
        }
        let index = QuoteIndex::from_records(records)?;

        let path = dir.join("stats.tsv");
        let file = path.display().to_string();
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let mut listed = 0;
        for (i, line) in text.lines().enumerate() {
            let fail = |message: String| RetrievalError::Format {
                file: file.clone(),
                line: i + 1,
                message,
            };
            let (term, n) = line
                .split_once('\t')
                .ok_or_else(|| fail("expected `term<TAB>df`".into()))?;
            let n: usize = n.parse().map_err(|_| fail(format!("bad df `{n}`")))?;
            if index.df(term) != n {
                return Err(fail(format!(
                    "df of `{term}` is {n} but the parses give {}",
                    index.df(term)
                )));
            }
            listed += 1;
        }
        if listed != index.df.len() {
            return Err(RetrievalError::Format {
                file,
                line: 0,
                message: format!("{listed} terms listed, parses give {}", index.df.len()),
            });
        }
        Ok(index)
    }
}

/// Parses every nonblank line with `adapter` (up to `concurrency` calls at a
/// time) and indexes the result. Quote ids are zero-based line numbers.
pub fn index_quotes<S: AsRef<str> + Sync>(
    lines: &[S],
    adapter: &ParserAdapter,
    concurrency: usize,
) -> Result<QuoteIndex, RetrievalError> {
    let work: Vec<(usize, &str)> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i, l.as_ref().trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency.max(1))
        .build()
        .map_err(|e| RetrievalError::Config(e.to_string()))?;
    let parsed: Vec<Result<QuoteRecord, RetrievalError>> = pool.install(|| {
        work.par_iter()
            .map(|&(id, raw)| {
                adapter
                    .parse(raw)
                    .map(|parse| QuoteRecord::new(id, raw, parse))
                    .map_err(|source| RetrievalError::Adapter { line: id + 1, source })
            })
            .collect()
    });
    let records = parsed.into_iter().collect::<Result<Vec<_>, _>>()?;
    QuoteIndex::from_records(records)
}

fn cosine_sparse(x: &BTreeMap<String, f64>, y: &BTreeMap<String, f64>) -> f64 {
    let dot: f64 = x.iter().filter_map(|(t, a)| y.get(t).map(|b| a * b)).sum();
    let nx = x.values().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.values().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        (dot / (nx * ny)).clamp(0.0, 1.0)
    }
}

fn cosine_dense(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        (dot / (nx * ny)).clamp(0.0, 1.0)
    }
}

/// Similarity in `[0, 1]` between a query sentence and a quote.
pub fn similarity(query: &ParsedSentence, q: &QuoteRecord, idx: &QuoteIndex, cfg: &SimilarityConfig) -> f64 {
    match cfg.method {
        SimilarityMethod::Tfidf => {
            let qv = idx.tfidf_vector(&content_terms(query));
            let dv = idx.tfidf_vector(&q.terms);
            cosine_sparse(&qv, &dv)
        }
        SimilarityMethod::Embedding => match &idx.embeddings {
            Some(e) => cosine_dense(&e.sentence_vector(query), &e.sentence_vector(&q.parse)),
            None => 0.0,
        },
    }
}

/// The `k` best quotes, by descending score then ascending id.
pub fn top_match<'a>(
    query: &ParsedSentence,
    idx: &'a QuoteIndex,
    cfg: &SimilarityConfig,
) -> Vec<(&'a QuoteRecord, f64)> {
    let mut scored: Vec<(&QuoteRecord, f64)> = idx
        .quotes
        .iter()
        .map(|q| (q, similarity(query, q, idx, cfg)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.id.cmp(&b.0.id)));
    scored.truncate(cfg.k);
    scored
}
