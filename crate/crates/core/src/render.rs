//! Turning token sequences back into text.

use crate::conllu::ParsedSentence;

const OPENING: &[&str] = &["(", "[", "{", "“", "‘", "«"];

struct Piece<'a> {
    text: &'a str,
    attach_left: bool,
    attach_right: bool,
    space_after: bool,
}

/// Detokenizes a sentence: words are joined by single spaces, punctuation
/// attaches to the preceding word (opening brackets to the following one),
/// `SpaceAfter=No` is honoured and intact multiword ranges print their
/// surface form.
pub fn render(sentence: &ParsedSentence) -> String {
    let tokens = sentence.tokens();
    let mut pieces = Vec::with_capacity(tokens.len());
    let mut i = 1;
    while i <= tokens.len() {
        if let Some(m) = sentence.multiword().iter().find(|m| m.first == i) {
            pieces.push(Piece {
                text: &m.surface,
                attach_left: false,
                attach_right: false,
                space_after: m.space_after(),
            });
            i = m.last + 1;
            continue;
        }
        let t = &tokens[i - 1];
        let opening = t.is_punct() && OPENING.contains(&t.surface.as_str());
        pieces.push(Piece {
            text: &t.surface,
            attach_left: t.is_punct() && !opening,
            attach_right: opening,
            space_after: t.space_after(),
        });
        i += 1;
    }

    let mut out = String::new();
    for (n, p) in pieces.iter().enumerate() {
        if n > 0 {
            let prev = &pieces[n - 1];
            if prev.space_after && !prev.attach_right && !p.attach_left {
                out.push(' ');
            }
        }
        out.push_str(p.text);
    }
    out
}

/// Writes `word` in the capitalization pattern of `pattern`: all caps stays
/// all caps, an initial capital is kept, anything else is lowercase.
pub fn transfer_case(pattern: &str, word: &str) -> String {
    let letters: Vec<char> = pattern.chars().filter(|c| c.is_alphabetic()).collect();
    let all_caps = letters.len() > 1 && letters.iter().all(|c| c.is_uppercase());
    if all_caps {
        return word.to_uppercase();
    }
    let lower = word.to_lowercase();
    if pattern.chars().next().is_some_and(char::is_uppercase) {
        capitalize(&lower)
    } else {
        lower
    }
}

pub fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
