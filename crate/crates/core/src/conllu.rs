//! CoNLL-U reading and writing.
//!
//! Sentences are validated at parse time: token ids must run 1..n, every head
//! must point inside the sentence, there is exactly one root and the head
//! function is acyclic. Downstream code relies on parses being trees.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl ConlluError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConlluError::Malformed {
            line,
            message: message.into(),
        }
    }
}

/// One syntactic word of a parsed sentence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    pub head: usize,
    pub deprel: String,
    pub misc: String,
}

impl Token {
    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT"
    }

    pub fn space_after(&self) -> bool {
        !self.misc.split('|').any(|f| f == "SpaceAfter=No")
    }

    /// Relation label without its subtype (`obl:tmod` -> `obl`).
    pub fn base_deprel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }
}

/// A multiword token range such as `4-5 don't`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiwordToken {
    pub first: usize,
    pub last: usize,
    pub surface: String,
    pub misc: String,
}

impl MultiwordToken {
    pub fn space_after(&self) -> bool {
        !self.misc.split('|').any(|f| f == "SpaceAfter=No")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedSentence {
    raw_text: String,
    sent_id: Option<String>,
    tokens: Vec<Token>,
    multiword: Vec<MultiwordToken>,
}

impl ParsedSentence {
    /// Builds a sentence from already numbered tokens, checking the tree
    /// invariants. An empty `raw_text` is replaced by the rendered tokens.
    pub fn new(
        raw_text: impl Into<String>,
        tokens: Vec<Token>,
        multiword: Vec<MultiwordToken>,
    ) -> Result<Self, String> {
        validate_tokens(&tokens).map_err(|(_, msg)| msg)?;
        validate_ranges(&multiword, tokens.len())?;
        let mut sentence = ParsedSentence {
            raw_text: raw_text.into(),
            sent_id: None,
            tokens,
            multiword,
        };
        if sentence.raw_text.is_empty() {
            sentence.raw_text = crate::render::render(&sentence);
        }
        Ok(sentence)
    }

    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    pub fn sent_id(&self) -> Option<&str> {
        self.sent_id.as_deref()
    }

    pub fn set_sent_id(&mut self, id: Option<String>) {
        self.sent_id = id;
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn multiword(&self) -> &[MultiwordToken] {
        &self.multiword
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by its 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Dependents of `index` in sentence order.
    pub fn dependents(&self, index: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == index)
    }

    /// Returns a copy with token `index` rewritten. Multiword ranges covering
    /// the token are dropped, and the raw text is re-rendered.
    pub(crate) fn with_replaced(&self, index: usize, surface: &str, lemma: &str) -> Self {
        let mut out = self.clone();
        if let Some(tok) = index.checked_sub(1).and_then(|i| out.tokens.get_mut(i)) {
            tok.surface = surface.to_string();
            tok.lemma = lemma.to_lowercase();
        }
        out.multiword.retain(|m| index < m.first || index > m.last);
        out.raw_text = crate::render::render(&out);
        out
    }

    /// Returns a copy with a new token inserted before position `before`
    /// (1-based; `len() + 1` appends). The new token takes index `before`;
    /// later ids and heads are shifted. `token.head` is given in the
    /// numbering of `self`.
    pub(crate) fn with_inserted(&self, before: usize, mut token: Token) -> Self {
        let shift = |i: usize| if i >= before { i + 1 } else { i };
        let mut out = self.clone();
        for t in out.tokens.iter_mut() {
            t.index = shift(t.index);
            if t.head != 0 {
                t.head = shift(t.head);
            }
        }
        token.index = before;
        if token.head != 0 {
            token.head = shift(token.head);
        }
        out.tokens.insert(before - 1, token);
        out.multiword.retain(|m| before <= m.first || before > m.last);
        for m in out.multiword.iter_mut() {
            m.first = shift(m.first);
            m.last = shift(m.last);
        }
        out.raw_text = crate::render::render(&out);
        out
    }
}

/// Coarse part-of-speech class of a substitutable word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosClass {
    Noun,
    Verb,
    Adjective,
    Adverb,
}

impl PosClass {
    pub const ALL: [PosClass; 4] = [
        PosClass::Noun,
        PosClass::Verb,
        PosClass::Adjective,
        PosClass::Adverb,
    ];

    pub fn from_upos(upos: &str) -> Option<PosClass> {
        match upos {
            "NOUN" | "PROPN" => Some(PosClass::Noun),
            "VERB" => Some(PosClass::Verb),
            "ADJ" => Some(PosClass::Adjective),
            "ADV" => Some(PosClass::Adverb),
            _ => None,
        }
    }

    /// WordNet part-of-speech letter; satellites (`s`) count as adjectives.
    pub fn from_wordnet(c: char) -> Option<PosClass> {
        match c {
            'n' => Some(PosClass::Noun),
            'v' => Some(PosClass::Verb),
            'a' | 's' => Some(PosClass::Adjective),
            'r' => Some(PosClass::Adverb),
            _ => None,
        }
    }

    pub fn wordnet_letter(self) -> char {
        match self {
            PosClass::Noun => 'n',
            PosClass::Verb => 'v',
            PosClass::Adjective => 'a',
            PosClass::Adverb => 'r',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PosClass::Noun => "noun",
            PosClass::Verb => "verb",
            PosClass::Adjective => "adjective",
            PosClass::Adverb => "adverb",
        }
    }
}

impl std::fmt::Display for PosClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PosClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "noun" | "n" => Ok(PosClass::Noun),
            "verb" | "v" => Ok(PosClass::Verb),
            "adjective" | "adj" | "a" | "s" => Ok(PosClass::Adjective),
            "adverb" | "adv" | "r" => Ok(PosClass::Adverb),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}

/// A noun, verb, adjective or adverb of a sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContentWord<'a> {
    pub token: &'a Token,
    pub pos_class: PosClass,
}

/// Content words of `s` in sentence order.
pub fn content_words(s: &ParsedSentence) -> Vec<ContentWord<'_>> {
    s.tokens()
        .iter()
        .filter_map(|token| {
            PosClass::from_upos(&token.upos).map(|pos_class| ContentWord { token, pos_class })
        })
        .collect()
}

/// Parses a CoNLL-U string.
pub fn parse_conllu_str(input: &str) -> Result<Vec<ParsedSentence>, ConlluError> {
    parse_conllu(input.as_bytes())
}

/// Parses every sentence block of a CoNLL-U stream.
pub fn parse_conllu<R: BufRead>(reader: R) -> Result<Vec<ParsedSentence>, ConlluError> {
    let mut sentences = Vec::new();
    let mut block = Block::default();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if line.trim().is_empty() {
            if let Some(sentence) = block.finish()? {
                sentences.push(sentence);
            }
            continue;
        }
        if block.start_line == 0 {
            block.start_line = lineno;
        }
        if let Some(comment) = line.strip_prefix('#') {
            block.comment(comment);
            continue;
        }
        block.token_line(line, lineno)?;
    }
    if let Some(sentence) = block.finish()? {
        sentences.push(sentence);
    }
    Ok(sentences)
}

#[derive(Default)]
struct Block {
    start_line: usize,
    text: Option<String>,
    sent_id: Option<String>,
    tokens: Vec<Token>,
    lines: Vec<usize>,
    multiword: Vec<(MultiwordToken, usize)>,
}

impl Block {
    fn comment(&mut self, comment: &str) {
        let comment = comment.trim();
        if let Some((key, value)) = comment.split_once('=') {
            match key.trim() {
                "text" => self.text = Some(value.trim().to_string()),
                "sent_id" => self.sent_id = Some(value.trim().to_string()),
                _ => {}
            }
        }
    }

    fn token_line(&mut self, line: &str, lineno: usize) -> Result<(), ConlluError> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ConlluError::at(
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if id.contains('.') {
            // Empty node of the enhanced graph.
            return Ok(());
        }
        if let Some((first, last)) = id.split_once('-') {
            let first = first
                .parse::<usize>()
                .map_err(|_| ConlluError::at(lineno, format!("bad range id `{id}`")))?;
            let last = last
                .parse::<usize>()
                .map_err(|_| ConlluError::at(lineno, format!("bad range id `{id}`")))?;
            if first == 0 || last < first {
                return Err(ConlluError::at(lineno, format!("bad range id `{id}`")));
            }
            self.multiword.push((
                MultiwordToken {
                    first,
                    last,
                    surface: cols[1].to_string(),
                    misc: cols[9].to_string(),
                },
                lineno,
            ));
            return Ok(());
        }

        let index = id
            .parse::<usize>()
            .map_err(|_| ConlluError::at(lineno, format!("non-integer id `{id}`")))?;
        if index != self.tokens.len() + 1 {
            return Err(ConlluError::at(
                lineno,
                format!("token id {index} out of sequence, expected {}", self.tokens.len() + 1),
            ));
        }
        let head = cols[6]
            .parse::<usize>()
            .map_err(|_| ConlluError::at(lineno, format!("non-integer head `{}`", cols[6])))?;
        let surface = cols[1].to_string();
        let lemma = if cols[2] == "_" && surface != "_" {
            surface.to_lowercase()
        } else {
            cols[2].to_lowercase()
        };
        if lemma.is_empty() || surface.is_empty() {
            return Err(ConlluError::at(lineno, "empty form or lemma"));
        }
        self.tokens.push(Token {
            index,
            surface,
            lemma,
            upos: cols[3].to_string(),
            xpos: cols[4].to_string(),
            feats: cols[5].to_string(),
            head,
            deprel: cols[7].to_string(),
            misc: cols[9].to_string(),
        });
        self.lines.push(lineno);
        Ok(())
    }

    fn finish(&mut self) -> Result<Option<ParsedSentence>, ConlluError> {
        let block = std::mem::take(self);
        if block.tokens.is_empty() {
            if let Some((_, line)) = block.multiword.first() {
                return Err(ConlluError::at(*line, "range line without tokens"));
            }
            return Ok(None);
        }
        validate_tokens(&block.tokens).map_err(|(i, msg)| {
            let line = i.map(|i| block.lines[i]).unwrap_or(block.start_line);
            ConlluError::at(line, msg)
        })?;
        let n = block.tokens.len();
        for (m, line) in &block.multiword {
            if m.last > n {
                return Err(ConlluError::at(*line, format!("range {}-{} exceeds sentence length {n}", m.first, m.last)));
            }
        }
        let multiword: Vec<MultiwordToken> = block.multiword.into_iter().map(|(m, _)| m).collect();
        let mut sentence = ParsedSentence {
            raw_text: block.text.unwrap_or_default(),
            sent_id: block.sent_id,
            tokens: block.tokens,
            multiword,
        };
        if sentence.raw_text.is_empty() {
            sentence.raw_text = sentence
                .tokens
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ");
        }
        Ok(Some(sentence))
    }
}

/// Checks ids, head range, single root and acyclicity. The error carries the
/// position of the offending token, when there is one.
fn validate_tokens(tokens: &[Token]) -> Result<(), (Option<usize>, String)> {
    let n = tokens.len();
    let mut root = None;
    for (i, t) in tokens.iter().enumerate() {
        if t.index != i + 1 {
            return Err((Some(i), format!("token id {} out of sequence, expected {}", t.index, i + 1)));
        }
        if t.head > n {
            return Err((Some(i), format!("head {} out of range for sentence of length {n}", t.head)));
        }
        if t.head == t.index {
            return Err((Some(i), format!("token {} is its own head", t.index)));
        }
        if t.lemma.is_empty() || t.lemma.chars().any(char::is_uppercase) {
            return Err((Some(i), format!("lemma `{}` must be nonempty and lowercase", t.lemma)));
        }
        if t.head == 0 {
            if root.is_some() {
                return Err((Some(i), "multiple roots".to_string()));
            }
            root = Some(i);
        }
    }
    if n > 0 && root.is_none() {
        return Err((None, "sentence has no root".to_string()));
    }

    // Every token must reach the root within n steps.
    let mut state = vec![0u8; n + 1]; // 0 unvisited, 1 on path, 2 done
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            path.push(cur);
            cur = tokens[cur - 1].head;
        }
        if state[cur] == 1 {
            return Err((Some(cur - 1), format!("dependency cycle through token {cur}")));
        }
        for p in path {
            state[p] = 2;
        }
    }
    Ok(())
}

fn validate_ranges(ranges: &[MultiwordToken], n: usize) -> Result<(), String> {
    for m in ranges {
        if m.first == 0 || m.last < m.first || m.last > n {
            return Err(format!("bad multiword range {}-{}", m.first, m.last));
        }
    }
    Ok(())
}

/// Writes sentences as CoNLL-U, one block per sentence.
pub fn write_conllu<W: Write>(mut w: W, sentences: &[ParsedSentence]) -> io::Result<()> {
    for s in sentences {
        if let Some(id) = s.sent_id() {
            writeln!(w, "# sent_id = {id}")?;
        }
        writeln!(w, "# text = {}", s.raw_text())?;
        for t in s.tokens() {
            for m in s.multiword().iter().filter(|m| m.first == t.index) {
                writeln!(w, "{}-{}\t{}\t_\t_\t_\t_\t_\t_\t_\t{}", m.first, m.last, m.surface, m.misc)?;
            }
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t_\t{}",
                t.index, t.surface, t.lemma, t.upos, t.xpos, t.feats, t.head, t.deprel, t.misc
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}
