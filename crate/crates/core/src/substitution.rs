//! Lexical substitution between an input sentence and a matched expression.
//!
//! Candidate words come from the derivational families of one sentence's
//! content words; each candidate `k` for a word `w` of the other sentence is
//! scored by how well it fits `w`'s dependency context:
//!
//! ```text
//! score(R, w, k) = exp( (1/|R∋w|) · Σ_{r ∈ R∋w} ln(f(a, b) + 1) )
//! ```
//!
//! where `w` being the dependent of `r` gives `a = head(r), b = k`, and `w`
//! being the head gives `a = k, b = dependent(r)`. The score is the geometric
//! mean of the add-one smoothed frequencies, so unseen relations floor at 1.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::conllu::{content_words, ParsedSentence, PosClass, Token};
use crate::matrix::{counts_edge, RelationCounts};
use crate::render::transfer_case;
use crate::retrieval::QuoteRecord;
use crate::wordnet::{bucket_by_pos, DerivedForm, Lexicon};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// `w` is the head; the other lemma is its dependent.
    ParentOf,
    /// `w` is the dependent; the other lemma is its head.
    ChildOf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub role: Role,
    pub other_lemma: String,
}

/// The dependency relations `R ∋ w` of one word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationContext {
    pub word_index: usize,
    pub relations: Vec<Relation>,
}

/// Relations incident to token `w_index`: the edge to its head first, then
/// edges to its dependents in sentence order. Punct and root edges are left
/// out, so an isolated root yields an empty context.
pub fn relations_containing(s: &ParsedSentence, w_index: usize) -> RelationContext {
    let mut relations = Vec::new();
    if let Some(w) = s.token(w_index) {
        if counts_edge(w) {
            let head = &s.tokens()[w.head - 1];
            relations.push(Relation {
                role: Role::ChildOf,
                other_lemma: head.lemma.clone(),
            });
        }
        for dep in s.dependents(w_index).filter(|d| counts_edge(d)) {
            relations.push(Relation {
                role: Role::ParentOf,
                other_lemma: dep.lemma.clone(),
            });
        }
    }
    RelationContext {
        word_index: w_index,
        relations,
    }
}

/// One looked-up frequency `f(a, b)` feeding a score.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Contribution {
    pub a: String,
    pub b: String,
    pub f: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Score {
    pub value: f64,
    pub contributions: Vec<Contribution>,
}

/// Scores candidate `k` for the word whose context is `ctx`.
pub fn matching_score(m: &RelationCounts, ctx: &RelationContext, k: &str) -> Score {
    let contributions: Vec<Contribution> = ctx
        .relations
        .iter()
        .map(|r| {
            let (a, b) = match r.role {
                Role::ChildOf => (r.other_lemma.as_str(), k),
                Role::ParentOf => (k, r.other_lemma.as_str()),
            };
            Contribution {
                a: a.to_string(),
                b: b.to_string(),
                f: m.lookup(a, b),
            }
        })
        .collect();
    Score {
        value: score_from_contributions(&contributions),
        contributions,
    }
}

/// Recomputes a score from its recorded contributions; 0 when there are none.
pub fn score_from_contributions(contributions: &[Contribution]) -> f64 {
    if contributions.is_empty() {
        return 0.0;
    }
    let mean_log = contributions
        .iter()
        .map(|c| (c.f as f64 + 1.0).ln())
        .sum::<f64>()
        / contributions.len() as f64;
    mean_log.exp()
}

/// The word being replaced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TargetWord {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos_class: PosClass,
}

impl TargetWord {
    fn from_token(token: &Token, pos_class: PosClass) -> Self {
        TargetWord {
            index: token.index,
            surface: token.surface.clone(),
            lemma: token.lemma.clone(),
            pos_class,
        }
    }
}

/// An unscored pairing of a base-sentence word with a candidate form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateRow {
    pub w: TargetWord,
    pub k: DerivedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidatePair {
    pub w: TargetWord,
    pub k: DerivedForm,
    pub score: f64,
    pub contributions: Vec<Contribution>,
}

/// Pairs every content word of `base` with the same-POS members of the
/// buckets built from `source`'s content words (each word's derivational
/// forms plus the word itself). Rows come out ordered by word index, then
/// candidate lemma; `k == w` pairs are dropped.
pub fn enumerate_candidates(base: &ParsedSentence, source: &ParsedSentence, lex: &Lexicon) -> Vec<CandidateRow> {
    let forms = content_words(source).into_iter().flat_map(|c| {
        let own = DerivedForm::new(c.token.lemma.to_lowercase(), c.pos_class);
        lex.derivational_forms(&c.token.lemma, c.pos_class)
            .into_iter()
            .chain(std::iter::once(own))
    });
    let buckets = bucket_by_pos(forms);

    let mut rows = Vec::new();
    for w in content_words(base) {
        let w_lemma = w.token.lemma.to_lowercase();
        for k in buckets.bucket(w.pos_class) {
            if k.lemma != w_lemma {
                rows.push(CandidateRow {
                    w: TargetWord::from_token(w.token, w.pos_class),
                    k: k.clone(),
                });
            }
        }
    }
    rows
}

/// Scores each row against the dependency context of its word in `base`.
pub fn score_candidates(rows: Vec<CandidateRow>, base: &ParsedSentence, m: &RelationCounts) -> Vec<CandidatePair> {
    let mut ctx: Option<RelationContext> = None;
    rows.into_iter()
        .map(|row| {
            if ctx.as_ref().map(|c| c.word_index) != Some(row.w.index) {
                ctx = Some(relations_containing(base, row.w.index));
            }
            let score = matching_score(m, ctx.as_ref().expect("context set above"), &row.k.lemma);
            CandidatePair {
                w: row.w,
                k: row.k,
                score: score.value,
                contributions: score.contributions,
            }
        })
        .collect()
}

/// Total order used for selection: higher score first, then leftmost word,
/// then lexicographically smallest candidate.
pub fn preference(x: &CandidatePair, y: &CandidatePair) -> Ordering {
    y.score
        .total_cmp(&x.score)
        .then(x.w.index.cmp(&y.w.index))
        .then_with(|| x.k.lemma.cmp(&y.k.lemma))
}

/// The highest scoring pair, if any.
pub fn select_best(table: &[CandidatePair]) -> Option<&CandidatePair> {
    table.iter().min_by(|x, y| preference(x, y))
}

/// Replaces the token `pair.w.index` with `pair.k`, carrying over its
/// capitalization pattern. Returns the edited sentence; its raw text is the
/// detokenized output.
pub fn apply_substitution(s: &ParsedSentence, pair: &CandidatePair) -> ParsedSentence {
    let surface = match s.token(pair.w.index) {
        Some(t) => transfer_case(&t.surface, &pair.k.lemma),
        None => return s.clone(),
    };
    s.with_replaced(pair.w.index, &surface, &pair.k.lemma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Words of the input are replaced by forms from the quote.
    InputModified,
    /// Words of the quote are replaced by forms from the input.
    QuoteModified,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::InputModified => "input_modified",
            Direction::QuoteModified => "quote_modified",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionResult {
    pub direction: Direction,
    pub chosen: Option<CandidatePair>,
    pub candidates: Vec<CandidatePair>,
    pub output: ParsedSentence,
}

impl SubstitutionResult {
    pub fn output_text(&self) -> &str {
        self.output.raw_text()
    }
}

/// Runs one substitution in the given direction. The modified sentence
/// supplies both the words to replace and the relation contexts; the other
/// sentence supplies the candidate forms.
pub fn transform_with_quote(
    input: &ParsedSentence,
    quote: &QuoteRecord,
    m: &RelationCounts,
    lex: &Lexicon,
    direction: Direction,
) -> SubstitutionResult {
    let (base, source) = match direction {
        Direction::InputModified => (input, &quote.parse),
        Direction::QuoteModified => (&quote.parse, input),
    };
    let candidates = score_candidates(enumerate_candidates(base, source, lex), base, m);
    let chosen = select_best(&candidates).cloned();
    let output = match &chosen {
        Some(pair) => apply_substitution(base, pair),
        None => base.clone(),
    };
    SubstitutionResult {
        direction,
        chosen,
        candidates,
        output,
    }
}
