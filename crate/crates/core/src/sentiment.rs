//! Positive-adjective insertion in front of categorized nouns.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::conllu::{ParsedSentence, Token};
use crate::render::capitalize;

pub const GENERIC: &str = "generic";
pub const DEFAULT_MAX_INSERTIONS: usize = 2;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("{file} line {line}: {message}")]
    Format { file: String, line: usize, message: String },
    #[error("cannot read {file}: {source}")]
    Io { file: String, source: std::io::Error },
    #[error("no adjectives for category `{0}` and no `generic` list")]
    NoAdjectives(String),
}

/// Adjectives per noun category.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdjectiveLexicon {
    by_category: BTreeMap<String, Vec<String>>,
}

impl AdjectiveLexicon {
    /// Builds a lexicon from `(category, adjective)` pairs, lowercasing and
    /// dropping repeats while keeping first-seen order.
    pub fn from_pairs<C, A, I>(pairs: I) -> Self
    where
        C: AsRef<str>,
        A: AsRef<str>,
        I: IntoIterator<Item = (C, A)>,
    {
        let mut by_category: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (c, a) in pairs {
            let list = by_category.entry(c.as_ref().trim().to_lowercase()).or_default();
            let adj = a.as_ref().trim().to_lowercase();
            if !list.contains(&adj) {
                list.push(adj);
            }
        }
        AdjectiveLexicon { by_category }
    }

    pub fn parse(text: &str, file: &str) -> Result<Self, SentimentError> {
        Ok(Self::from_pairs(read_tsv(text, file)?))
    }

    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let file = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| SentimentError::Io { file: file.clone(), source })?;
        Self::parse(&text, &file)
    }

    pub fn adjectives(&self, category: &str) -> Option<&[String]> {
        self.by_category.get(category).map(Vec::as_slice)
    }

    pub fn contains(&self, category: &str, adjective: &str) -> bool {
        self.adjectives(category).is_some_and(|l| l.iter().any(|a| a == adjective))
    }
}

/// Noun lemma to category.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NounGazetteer {
    noun_to_category: HashMap<String, String>,
}

impl NounGazetteer {
    pub fn from_pairs<N, C, I>(pairs: I) -> Self
    where
        N: AsRef<str>,
        C: AsRef<str>,
        I: IntoIterator<Item = (N, C)>,
    {
        let mut noun_to_category = HashMap::new();
        for (n, c) in pairs {
            noun_to_category
                .entry(n.as_ref().trim().to_lowercase())
                .or_insert_with(|| c.as_ref().trim().to_lowercase());
        }
        NounGazetteer { noun_to_category }
    }

    pub fn parse(text: &str, file: &str) -> Result<Self, SentimentError> {
        Ok(Self::from_pairs(read_tsv(text, file)?))
    }

    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let file = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| SentimentError::Io { file: file.clone(), source })?;
        Self::parse(&text, &file)
    }
}

fn read_tsv(text: &str, file: &str) -> Result<Vec<(String, String)>, SentimentError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        match line.split_once('\t') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() && !b.contains('\t') => {
                pairs.push((a.trim().to_string(), b.trim().to_string()))
            }
            _ => {
                return Err(SentimentError::Format {
                    file: file.to_string(),
                    line: i + 1,
                    message: "expected two tab-separated fields".into(),
                })
            }
        }
    }
    Ok(pairs)
}

/// Exact gazetteer lookup of a lemma.
pub fn classify_noun<'g>(lemma: &str, g: &'g NounGazetteer) -> Option<&'g str> {
    g.noun_to_category.get(&lemma.to_lowercase()).map(String::as_str)
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Picks an adjective for `noun` from its category list (or the generic one)
/// by hashing `noun:seed`.
pub fn choose_adjective<'l>(
    lex: &'l AdjectiveLexicon,
    category: &str,
    noun: &str,
    seed: u64,
) -> Result<&'l str, SentimentError> {
    let list = lex
        .adjectives(category)
        .filter(|l| !l.is_empty())
        .or_else(|| lex.adjectives(GENERIC).filter(|l| !l.is_empty()))
        .ok_or_else(|| SentimentError::NoAdjectives(category.to_string()))?;
    let key = format!("{noun}:{seed}");
    let i = (fnv1a64(key.as_bytes()) % list.len() as u64) as usize;
    Ok(&list[i])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Insertion {
    /// Index of the noun in the sentence the insertion was planned on.
    pub noun_index: usize,
    pub adjective: String,
    pub insert_before_index: usize,
}

/// Relations that make up a noun's premodifier chain.
fn is_premodifier(rel: &str) -> bool {
    matches!(rel, "amod" | "compound" | "advmod" | "flat")
}

/// First token of the contiguous premodifier chain that ends at `noun`.
fn chain_start(s: &ParsedSentence, noun: usize) -> usize {
    let in_chain = |i: usize| {
        let mut cur = i;
        // Climb through modifier edges; the chain belongs to `noun` if the
        // climb reaches it.
        for _ in 0..s.len() {
            let t = &s.tokens()[cur - 1];
            if t.head == noun {
                return is_premodifier(t.base_deprel());
            }
            if t.head == 0 || t.head < i || t.head > noun || !is_premodifier(t.base_deprel()) {
                return false;
            }
            cur = t.head;
        }
        false
    };
    let mut start = noun;
    while start > 1 && in_chain(start - 1) {
        start -= 1;
    }
    start
}

/// Inserts up to `max_insertions` adjectives, at most one per noun, scanning
/// left to right over tokens whose lemma the gazetteer knows. The adjective
/// goes in front of the noun's premodifier chain; nouns already preceded by
/// the chosen adjective are skipped.
pub fn insert_adjectives(
    s: &ParsedSentence,
    lex: &AdjectiveLexicon,
    g: &NounGazetteer,
    max_insertions: usize,
    seed: u64,
) -> Result<(ParsedSentence, Vec<Insertion>), SentimentError> {
    let mut plan: Vec<Insertion> = Vec::new();
    for t in s.tokens() {
        if plan.len() >= max_insertions {
            break;
        }
        let Some(category) = classify_noun(&t.lemma, g) else {
            continue;
        };
        let adjective = choose_adjective(lex, category, &t.lemma, seed)?;
        let before = chain_start(s, t.index);
        let already_there = (before.saturating_sub(1).max(1)..t.index)
            .filter_map(|i| s.token(i))
            .any(|l| l.surface.eq_ignore_ascii_case(adjective) || l.lemma == adjective);
        if already_there {
            continue;
        }
        if plan.iter().any(|p| p.insert_before_index == before) {
            continue;
        }
        plan.push(Insertion {
            noun_index: t.index,
            adjective: adjective.to_string(),
            insert_before_index: before,
        });
    }

    let capitalized_start = s.token(1).is_some_and(|t| t.surface.chars().next().is_some_and(char::is_uppercase));
    let mut out = s.clone();
    if capitalized_start && plan.iter().any(|p| p.insert_before_index == 1) {
        let first = &s.tokens()[0];
        let keep = first.upos == "PROPN"
            || (first.surface.chars().count() > 1 && !first.surface.chars().any(char::is_lowercase))
            || s.multiword().iter().any(|m| m.first == 1);
        if !keep {
            out = out.with_replaced(1, &decapitalize(&first.surface), &first.lemma);
        }
    }
    // Right to left keeps the planned indices valid.
    for ins in plan.iter().rev() {
        let initial = ins.insert_before_index == 1 && capitalized_start;
        let surface = if initial {
            capitalize(&ins.adjective)
        } else {
            ins.adjective.clone()
        };
        let token = Token {
            index: 0,
            surface,
            lemma: ins.adjective.clone(),
            upos: "ADJ".into(),
            xpos: "JJ".into(),
            feats: "_".into(),
            head: ins.noun_index,
            deprel: "amod".into(),
            misc: "_".into(),
        };
        out = out.with_inserted(ins.insert_before_index, token);
    }
    Ok((out, plan))
}

fn decapitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}
