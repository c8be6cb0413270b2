//! Sparse head/dependent lemma frequencies `f(a, b)` collected from a parsed
//! corpus.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conllu::{ParsedSentence, Token};

const MAGIC: &str = "#persuaide-matrix v1";

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

fn format_err(line: usize, message: impl Into<String>) -> MatrixError {
    MatrixError::Format {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MatrixStats {
    pub vocab: u64,
    pub relation_pairs: u64,
    pub total_edges: u64,
    pub sentences: u64,
}

/// Whether a dependency edge contributes to the counts: punctuation
/// attachments and the root pseudo-edge do not.
pub fn counts_edge(dependent: &Token) -> bool {
    dependent.head != 0 && dependent.base_deprel() != "punct"
}

#[derive(Clone, Debug, Default)]
pub struct RelationCounts {
    symbols: Vec<String>,
    ids: HashMap<String, u32>,
    counts: HashMap<(u32, u32), u64>,
    total_edges: u64,
    sentences: u64,
}

impl RelationCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts every non-punct, non-root edge of the corpus.
    pub fn build<'a, I>(corpus: I) -> Self
    where
        I: IntoIterator<Item = &'a ParsedSentence>,
    {
        let mut m = Self::new();
        for s in corpus {
            m.add_sentence(s);
        }
        m
    }

    /// Same result as [`RelationCounts::build`], sharded over the rayon pool.
    pub fn build_parallel(corpus: &[ParsedSentence]) -> Self {
        corpus
            .par_chunks(2048)
            .map(|chunk| Self::build(chunk))
            .reduce(Self::new, |a, b| a.merge(&b))
    }

    pub fn add_sentence(&mut self, s: &ParsedSentence) {
        for dep in s.tokens() {
            if !counts_edge(dep) {
                continue;
            }
            let head = &s.tokens()[dep.head - 1];
            self.add(&head.lemma, &dep.lemma, 1);
        }
        self.sentences += 1;
    }

    fn intern(&mut self, lemma: &str) -> u32 {
        if let Some(&id) = self.ids.get(lemma) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.push(lemma.to_string());
        self.ids.insert(lemma.to_string(), id);
        id
    }

    /// Adds `count` occurrences of the edge `a -> b`.
    pub fn add(&mut self, a: &str, b: &str, count: u64) {
        if count == 0 {
            return;
        }
        let a = self.intern(a);
        let b = self.intern(b);
        *self.counts.entry((a, b)).or_insert(0) += count;
        self.total_edges += count;
    }

    /// Pointwise sum of two matrices.
    pub fn merge(mut self, other: &RelationCounts) -> RelationCounts {
        self.merge_from(other);
        self
    }

    pub fn merge_from(&mut self, other: &RelationCounts) {
        let remap: Vec<u32> = other.symbols.iter().map(|s| self.intern(s)).collect();
        for (&(a, b), &c) in &other.counts {
            *self
                .counts
                .entry((remap[a as usize], remap[b as usize]))
                .or_insert(0) += c;
        }
        self.total_edges += other.total_edges;
        self.sentences += other.sentences;
    }

    /// `f(a, b)`: how often `b` depends on `a`; 0 for unseen pairs.
    pub fn lookup(&self, a: &str, b: &str) -> u64 {
        match (self.ids.get(a), self.ids.get(b)) {
            (Some(&a), Some(&b)) => self.counts.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn stats(&self) -> MatrixStats {
        MatrixStats {
            vocab: self.symbols.len() as u64,
            relation_pairs: self.counts.len() as u64,
            total_edges: self.total_edges,
            sentences: self.sentences,
        }
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        self.ids.contains_key(lemma)
    }

    /// All `(a, b, count)` triples sorted by `(a, b)`.
    pub fn sorted_pairs(&self) -> Vec<(&str, &str, u64)> {
        let mut pairs: Vec<(&str, &str, u64)> = self
            .counts
            .iter()
            .map(|(&(a, b), &c)| {
                (
                    self.symbols[a as usize].as_str(),
                    self.symbols[b as usize].as_str(),
                    c,
                )
            })
            .collect();
        pairs.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        pairs
    }

    pub fn save<W: Write>(&self, w: W) -> io::Result<()> {
        let mut w = BufWriter::new(w);
        let st = self.stats();
        writeln!(
            w,
            "{MAGIC}\tvocab={}\tpairs={}\tedges={}\tsentences={}",
            st.vocab, st.relation_pairs, st.total_edges, st.sentences
        )?;
        for (a, b, c) in self.sorted_pairs() {
            writeln!(w, "{a}\t{b}\t{c}")?;
        }
        w.flush()
    }

    pub fn save_to_path(&self, path: &Path) -> io::Result<()> {
        self.save(File::create(path)?)
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self, MatrixError> {
        let mut lines = r.lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => return Err(format_err(1, "missing header")),
        };
        let declared = parse_header(&header)?;

        let mut m = RelationCounts::new();
        let mut prev: Option<(String, String)> = None;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            let mut cols = line.split('\t');
            let (a, b, c) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), Some(c), None) if !a.is_empty() && !b.is_empty() => (a, b, c),
                _ => return Err(format_err(lineno, "expected `a<TAB>b<TAB>count`")),
            };
            let count: u64 = c
                .parse()
                .map_err(|_| format_err(lineno, format!("non-integer count `{c}`")))?;
            if count == 0 {
                return Err(format_err(lineno, "count must be positive"));
            }
            if let Some((pa, pb)) = &prev {
                match (pa.as_str(), pb.as_str()).cmp(&(a, b)) {
                    std::cmp::Ordering::Less => {}
                    std::cmp::Ordering::Equal => {
                        return Err(format_err(lineno, format!("duplicate pair ({a}, {b})")))
                    }
                    std::cmp::Ordering::Greater => {
                        return Err(format_err(lineno, format!("pair ({a}, {b}) out of order")))
                    }
                }
            }
            m.add(a, b, count);
            prev = Some((a.to_string(), b.to_string()));
        }
        m.sentences = declared.sentences;

        let actual = m.stats();
        if actual != declared {
            return Err(format_err(
                1,
                format!("header declares {declared:?} but body holds {actual:?}"),
            ));
        }
        Ok(m)
    }

    pub fn load_from_path(path: &Path) -> Result<Self, MatrixError> {
        Self::load(BufReader::new(File::open(path)?))
    }
}

fn parse_header(line: &str) -> Result<MatrixStats, MatrixError> {
    let mut fields = line.split('\t');
    if fields.next() != Some(MAGIC) {
        return Err(format_err(1, format!("bad header, expected `{MAGIC}`")));
    }
    let mut values = [0u64; 4];
    for (slot, key) in ["vocab", "pairs", "edges", "sentences"].iter().enumerate() {
        let field = fields
            .next()
            .ok_or_else(|| format_err(1, format!("header is missing `{key}=`")))?;
        let value = field
            .strip_prefix(key)
            .and_then(|f| f.strip_prefix('='))
            .ok_or_else(|| format_err(1, format!("expected `{key}=<n>`, found `{field}`")))?;
        values[slot] = value
            .parse()
            .map_err(|_| format_err(1, format!("non-integer header value `{field}`")))?;
    }
    if fields.next().is_some() {
        return Err(format_err(1, "trailing header fields"));
    }
    Ok(MatrixStats {
        vocab: values[0],
        relation_pairs: values[1],
        total_edges: values[2],
        sentences: values[3],
    })
}

impl PartialEq for RelationCounts {
    fn eq(&self, other: &Self) -> bool {
        self.stats() == other.stats()
            && self.counts.iter().all(|(&(a, b), &c)| {
                other.lookup(&self.symbols[a as usize], &self.symbols[b as usize]) == c
            })
    }
}

impl Eq for RelationCounts {}
