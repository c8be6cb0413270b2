//! WordNet 3.0 database reader, limited to what lexical substitution needs:
//! which (lemma, pos) pairs exist and the derivationally-related-form (`+`)
//! pointers between word senses.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::conllu::PosClass;

#[derive(Debug, Error)]
pub enum WordNetError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}, byte offset {offset}: {message}", path.display())]
    Format {
        path: PathBuf,
        offset: usize,
        message: String,
    },
}

fn file_suffix(pos: PosClass) -> &'static str {
    match pos {
        PosClass::Noun => "noun",
        PosClass::Verb => "verb",
        PosClass::Adjective => "adj",
        PosClass::Adverb => "adv",
    }
}

/// A lemma reachable from a query word, tagged with its part of speech.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DerivedForm {
    pub lemma: String,
    pub pos_class: PosClass,
}

impl DerivedForm {
    pub fn new(lemma: impl Into<String>, pos_class: PosClass) -> Self {
        DerivedForm {
            lemma: lemma.into(),
            pos_class,
        }
    }
}

impl std::fmt::Display for DerivedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.lemma, self.pos_class)
    }
}

/// Derived forms split by part of speech, each list sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PosBuckets {
    pub nouns: Vec<DerivedForm>,
    pub verbs: Vec<DerivedForm>,
    pub adjectives: Vec<DerivedForm>,
    pub adverbs: Vec<DerivedForm>,
}

impl PosBuckets {
    pub fn bucket(&self, pos: PosClass) -> &[DerivedForm] {
        match pos {
            PosClass::Noun => &self.nouns,
            PosClass::Verb => &self.verbs,
            PosClass::Adjective => &self.adjectives,
            PosClass::Adverb => &self.adverbs,
        }
    }

    fn bucket_mut(&mut self, pos: PosClass) -> &mut Vec<DerivedForm> {
        match pos {
            PosClass::Noun => &mut self.nouns,
            PosClass::Verb => &mut self.verbs,
            PosClass::Adjective => &mut self.adjectives,
            PosClass::Adverb => &mut self.adverbs,
        }
    }

    pub fn len(&self) -> usize {
        PosClass::ALL.iter().map(|&p| self.bucket(p).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Partitions forms into the four part-of-speech buckets.
pub fn bucket_by_pos<I>(forms: I) -> PosBuckets
where
    I: IntoIterator<Item = DerivedForm>,
{
    let mut buckets = PosBuckets::default();
    for form in forms {
        buckets.bucket_mut(form.pos_class).push(form);
    }
    for pos in PosClass::ALL {
        let bucket = buckets.bucket_mut(pos);
        bucket.sort();
        bucket.dedup();
    }
    buckets
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct SenseKey {
    lemma: u32,
    pos: PosClass,
    offset: u32,
}

#[derive(Debug, Default)]
pub struct Lexicon {
    lemmas: Vec<String>,
    lemma_ids: HashMap<String, u32>,
    entries: HashMap<(u32, PosClass), Vec<u32>>,
    deriv_links: HashMap<SenseKey, Vec<SenseKey>>,
}

struct PendingPointer {
    source: SenseSource,
    source_word: usize,
    target_pos: PosClass,
    target_offset: u32,
    target_word: usize,
    file: usize,
    line_offset: usize,
}

struct SenseSource {
    pos: PosClass,
    offset: u32,
}

impl Lexicon {
    /// Loads `index.*` and `data.*` for all four parts of speech.
    pub fn load(dir: &Path) -> Result<Lexicon, WordNetError> {
        let mut lex = Lexicon::default();

        let read = |name: String| -> Result<(PathBuf, String), WordNetError> {
            let path = dir.join(name);
            fs::read_to_string(&path)
                .map(|text| (path.clone(), text))
                .map_err(|source| WordNetError::Io { path, source })
        };

        let mut data_files = Vec::new();
        for pos in PosClass::ALL {
            let (path, text) = read(format!("index.{}", file_suffix(pos)))?;
            lex.read_index(&path, &text, pos)?;
            data_files.push(read(format!("data.{}", file_suffix(pos)))?);
        }

        let mut synsets: HashMap<(PosClass, u32), Vec<u32>> = HashMap::new();
        let mut pending = Vec::new();
        for (file, (pos, (path, text))) in PosClass::ALL.iter().zip(&data_files).enumerate() {
            lex.read_data(path, text, *pos, file, &mut synsets, &mut pending)?;
        }

        for (&(lemma, pos), offsets) in &lex.entries {
            let path = &data_files[pos_slot(pos)].0;
            for &offset in offsets {
                if !synsets.contains_key(&(pos, offset)) {
                    return Err(WordNetError::Format {
                        path: path.clone(),
                        offset: offset as usize,
                        message: format!(
                            "index entry `{}` names missing synset {offset:08}",
                            lex.lemmas[lemma as usize]
                        ),
                    });
                }
            }
        }

        for p in pending {
            let fail = |message: String| WordNetError::Format {
                path: data_files[p.file].0.clone(),
                offset: p.line_offset,
                message,
            };
            let target = synsets
                .get(&(p.target_pos, p.target_offset))
                .ok_or_else(|| fail(format!("pointer to nonexistent synset {:08}", p.target_offset)))?;
            let source = &synsets[&(p.source.pos, p.source.offset)];
            let pick = |words: &[u32], n: usize| -> Result<Vec<u32>, WordNetError> {
                match n {
                    0 => Ok(words.to_vec()),
                    n if n <= words.len() => Ok(vec![words[n - 1]]),
                    n => Err(fail(format!("pointer word number {n} exceeds synset size"))),
                }
            };
            let sources = pick(source, p.source_word)?;
            let targets = pick(target, p.target_word)?;
            for &s in &sources {
                let key = SenseKey {
                    lemma: s,
                    pos: p.source.pos,
                    offset: p.source.offset,
                };
                let links = lex.deriv_links.entry(key).or_default();
                for &t in &targets {
                    links.push(SenseKey {
                        lemma: t,
                        pos: p.target_pos,
                        offset: p.target_offset,
                    });
                }
            }
        }
        for links in lex.deriv_links.values_mut() {
            links.sort_by_key(|k| (k.lemma, k.pos, k.offset));
            links.dedup();
        }
        Ok(lex)
    }

    fn intern(&mut self, lemma: &str) -> u32 {
        if let Some(&id) = self.lemma_ids.get(lemma) {
            return id;
        }
        let id = self.lemmas.len() as u32;
        self.lemmas.push(lemma.to_string());
        self.lemma_ids.insert(lemma.to_string(), id);
        id
    }

    fn read_index(&mut self, path: &Path, text: &str, pos: PosClass) -> Result<(), WordNetError> {
        for (offset, line) in lines_with_offsets(text) {
            if line.starts_with(' ') || line.trim().is_empty() {
                continue;
            }
            let fail = |message: &str| WordNetError::Format {
                path: path.to_path_buf(),
                offset,
                message: message.to_string(),
            };
            let f: Vec<&str> = line.split_ascii_whitespace().collect();
            if f.len() < 6 {
                return Err(fail("truncated index line"));
            }
            let synset_cnt: usize = f[2].parse().map_err(|_| fail("bad synset_cnt"))?;
            let p_cnt: usize = f[3].parse().map_err(|_| fail("bad p_cnt"))?;
            let first_offset = 4 + p_cnt + 2;
            if f.len() != first_offset + synset_cnt {
                return Err(fail("index line field count does not match synset_cnt/p_cnt"));
            }
            let offsets = f[first_offset..]
                .iter()
                .map(|o| parse_offset(o).ok_or_else(|| fail(&format!("malformed offset `{o}`"))))
                .collect::<Result<Vec<u32>, _>>()?;
            let lemma = f[0].to_lowercase();
            let id = self.intern(&lemma);
            self.entries.entry((id, pos)).or_default().extend(offsets);
        }
        Ok(())
    }

    fn read_data(
        &mut self,
        path: &Path,
        text: &str,
        pos: PosClass,
        file: usize,
        synsets: &mut HashMap<(PosClass, u32), Vec<u32>>,
        pending: &mut Vec<PendingPointer>,
    ) -> Result<(), WordNetError> {
        for (offset, line) in lines_with_offsets(text) {
            if line.starts_with(' ') || line.trim().is_empty() {
                continue;
            }
            let fail = |message: String| WordNetError::Format {
                path: path.to_path_buf(),
                offset,
                message,
            };
            let body = line.split(" | ").next().unwrap_or(line);
            let f: Vec<&str> = body.split_ascii_whitespace().collect();
            if f.len() < 4 {
                return Err(fail("truncated data line".into()));
            }
            let synset_offset =
                parse_offset(f[0]).ok_or_else(|| fail(format!("malformed offset `{}`", f[0])))?;
            if synset_offset as usize != offset {
                return Err(fail(format!("synset offset {} does not match its byte position", f[0])));
            }
            let w_cnt = usize::from_str_radix(f[3], 16).map_err(|_| fail("bad w_cnt".into()))?;
            let mut i = 4;
            let mut words = Vec::with_capacity(w_cnt);
            for _ in 0..w_cnt {
                let word = f.get(i).ok_or_else(|| fail("truncated word list".into()))?;
                words.push(self.intern(&clean_word(word)));
                i += 2;
            }
            let p_cnt: usize = f
                .get(i)
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| fail("bad p_cnt".into()))?;
            i += 1;
            for _ in 0..p_cnt {
                let ptr = f.get(i..i + 4).ok_or_else(|| fail("truncated pointer list".into()))?;
                i += 4;
                if ptr[0] != "+" {
                    continue;
                }
                let target_offset =
                    parse_offset(ptr[1]).ok_or_else(|| fail(format!("malformed pointer offset `{}`", ptr[1])))?;
                let target_pos = ptr[2]
                    .chars()
                    .next()
                    .and_then(PosClass::from_wordnet)
                    .ok_or_else(|| fail(format!("bad pointer pos `{}`", ptr[2])))?;
                let st = ptr[3];
                if st.len() != 4 {
                    return Err(fail(format!("bad source/target `{st}`")));
                }
                let source_word =
                    usize::from_str_radix(&st[..2], 16).map_err(|_| fail(format!("bad source/target `{st}`")))?;
                let target_word =
                    usize::from_str_radix(&st[2..], 16).map_err(|_| fail(format!("bad source/target `{st}`")))?;
                if source_word > w_cnt {
                    return Err(fail(format!("source word {source_word} exceeds synset size")));
                }
                pending.push(PendingPointer {
                    source: SenseSource {
                        pos,
                        offset: synset_offset,
                    },
                    source_word,
                    target_pos,
                    target_offset,
                    target_word,
                    file,
                    line_offset: offset,
                });
            }
            synsets.insert((pos, synset_offset), words);
        }
        Ok(())
    }

    /// Whether `(lemma, pos)` has an index entry.
    pub fn contains(&self, lemma: &str, pos: PosClass) -> bool {
        self.lemma_ids
            .get(&lemma.to_lowercase())
            .is_some_and(|&id| self.entries.contains_key(&(id, pos)))
    }

    /// Synset offsets of `(lemma, pos)`, in index order.
    pub fn synsets(&self, lemma: &str, pos: PosClass) -> &[u32] {
        self.lemma_ids
            .get(&lemma.to_lowercase())
            .and_then(|&id| self.entries.get(&(id, pos)))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Derivationally related forms of `(lemma, pos)` over all its senses,
    /// plus the same spelling under every other part of speech. The query
    /// itself and multiword lemmas are left out.
    pub fn derivational_forms(&self, lemma: &str, pos: PosClass) -> BTreeSet<DerivedForm> {
        let lemma = lemma.to_lowercase();
        let mut out = BTreeSet::new();
        let Some(&id) = self.lemma_ids.get(&lemma) else {
            return out;
        };
        for &offset in self.entries.get(&(id, pos)).map(Vec::as_slice).unwrap_or(&[]) {
            let key = SenseKey { lemma: id, pos, offset };
            for target in self.deriv_links.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                out.insert(DerivedForm::new(self.lemmas[target.lemma as usize].clone(), target.pos));
            }
        }
        for other in PosClass::ALL {
            if self.entries.contains_key(&(id, other)) {
                out.insert(DerivedForm::new(lemma.clone(), other));
            }
        }
        out.remove(&DerivedForm::new(lemma, pos));
        out.retain(|f| !is_multiword(&f.lemma));
        out
    }

    /// Derivational links whose reverse link is missing, as
    /// `(source, target)` pairs. WordNet stores both directions, so this is
    /// expected to be empty on the distribution files.
    pub fn asymmetric_links(&self) -> Vec<(DerivedForm, DerivedForm)> {
        let mut missing = Vec::new();
        for (source, targets) in &self.deriv_links {
            for target in targets {
                let back = self
                    .deriv_links
                    .get(target)
                    .is_some_and(|links| links.contains(source));
                if !back {
                    missing.push((self.form(source), self.form(target)));
                }
            }
        }
        missing.sort();
        missing
    }

    /// Link targets that have no index entry of their own.
    pub fn dangling_targets(&self) -> Vec<DerivedForm> {
        let mut out: Vec<DerivedForm> = self
            .deriv_links
            .values()
            .flatten()
            .filter(|t| !self.entries.contains_key(&(t.lemma, t.pos)))
            .map(|t| self.form(t))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn form(&self, key: &SenseKey) -> DerivedForm {
        DerivedForm::new(self.lemmas[key.lemma as usize].clone(), key.pos)
    }

    /// Number of stored derivational pointers.
    pub fn link_count(&self) -> usize {
        self.deriv_links.values().map(Vec::len).sum()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }
}

fn pos_slot(pos: PosClass) -> usize {
    PosClass::ALL.iter().position(|&p| p == pos).unwrap_or(0)
}

fn is_multiword(lemma: &str) -> bool {
    lemma.contains('_') || lemma.contains(' ')
}

fn parse_offset(s: &str) -> Option<u32> {
    if s.len() == 8 && s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

/// Lowercases a data-file word and strips adjective markers like `(p)`.
fn clean_word(word: &str) -> String {
    let word = match word.find('(') {
        Some(i) if word.ends_with(')') => &word[..i],
        _ => word,
    };
    word.to_lowercase()
}

fn lines_with_offsets(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').map(move |raw| {
        let start = offset;
        offset += raw.len();
        (start, raw.trim_end_matches(['\n', '\r']))
    })
}
