mod common;

use std::collections::BTreeSet;
use std::fs;

use persuaide::wordnet::{DerivedForm, Lexicon, WordNetError};
use persuaide::PosClass;

use common::{lexicon, wordnet_dir};

#[test]
fn index_entries_are_loaded() {
    let lex = lexicon();
    assert!(lex.contains("wear", PosClass::Verb));
    assert!(!lex.synsets("wear", PosClass::Verb).is_empty());
    assert!(lex.contains("pink", PosClass::Adjective));
    assert!(!lex.contains("qwxzy", PosClass::Noun));
}

#[test]
fn unknown_lemma_has_no_forms() {
    assert!(lexicon().derivational_forms("qwxzy", PosClass::Noun).is_empty());
}

#[test]
fn pink_gets_its_noun_by_spelling() {
    let forms = lexicon().derivational_forms("pink", PosClass::Adjective);
    assert!(forms.contains(&DerivedForm::new("pink", PosClass::Noun)));
    assert!(!forms.contains(&DerivedForm::new("pink", PosClass::Adjective)));
}

#[test]
fn wear_links_to_wear_noun() {
    let forms = lexicon().derivational_forms("wear", PosClass::Verb);
    assert!(forms.contains(&DerivedForm::new("wear", PosClass::Noun)));
    assert!(forms.contains(&DerivedForm::new("wearer", PosClass::Noun)));
}

#[test]
fn forms_exclude_query_and_multiwords() {
    let lex = lexicon();
    for (lemma, pos) in [("run", PosClass::Verb), ("light", PosClass::Adjective), ("dress", PosClass::Noun)] {
        let forms = lex.derivational_forms(lemma, pos);
        assert!(!forms.contains(&DerivedForm::new(lemma, pos)));
        assert!(forms.iter().all(|f| !f.lemma.contains('_')), "{forms:?}");
    }
}

fn oracle() -> serde_json::Value {
    let text = fs::read_to_string(common::fixtures().join("wordnet_oracle.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn derivational_forms_match_reference_reader() {
    let lex = lexicon();
    let queries = oracle()["queries"].as_array().unwrap().clone();
    assert_eq!(queries.len(), 20);
    for q in queries {
        let lemma = q["lemma"].as_str().unwrap();
        let pos: PosClass = q["pos"].as_str().unwrap().parse().unwrap();
        let expected: BTreeSet<DerivedForm> = q["forms"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| DerivedForm::new(f["lemma"].as_str().unwrap(), f["pos"].as_str().unwrap().parse().unwrap()))
            .collect();
        assert_eq!(lex.derivational_forms(lemma, pos), expected, "{lemma}#{pos}");
    }
}

#[test]
fn one_way_links_match_reference_reader() {
    let mut expected: Vec<(DerivedForm, DerivedForm)> = oracle()["one_way_links"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| {
            let f = |i: usize, j: usize| DerivedForm::new(l[i].as_str().unwrap(), l[j].as_str().unwrap().parse().unwrap());
            (f(0, 1), f(2, 3))
        })
        .collect();
    expected.sort();
    let found = lexicon().asymmetric_links();
    let missing: Vec<_> = expected.iter().filter(|e| !found.contains(e)).collect();
    let extra: Vec<_> = found.iter().filter(|e| !expected.contains(e)).collect();
    assert_eq!(found, expected, "missing {missing:?}, extra {extra:?}");
}

#[test]
fn nearly_all_links_are_symmetric() {
    let lex = lexicon();
    let one_way = lex.asymmetric_links().len();
    assert!(one_way < lex.link_count() / 500, "{one_way} of {}", lex.link_count());
}

#[test]
fn symmetric_at_the_query_level() {
    let lex = lexicon();
    for (lemma, pos) in [("wear", PosClass::Verb), ("style", PosClass::Noun), ("accentuate", PosClass::Verb)] {
        for f in lex.derivational_forms(lemma, pos) {
            if f.lemma == lemma {
                continue; // same-spelling entries, not pointers
            }
            let back: BTreeSet<String> =
                lex.derivational_forms(&f.lemma, f.pos_class).into_iter().map(|b| b.lemma).collect();
            assert!(back.contains(lemma), "{f} does not lead back to {lemma}");
        }
    }
}

fn copy_wordnet(dst: &std::path::Path) {
    for entry in fs::read_dir(wordnet_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dst.join(entry.file_name())).unwrap();
    }
}

#[test]
fn missing_data_file_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    copy_wordnet(dir.path());
    fs::remove_file(dir.path().join("data.verb")).unwrap();
    match Lexicon::load(dir.path()) {
        Err(WordNetError::Io { path, .. }) => assert!(path.ends_with("data.verb")),
        other => panic!("expected I/O error, got {other:?}"),
    }
}

#[test]
fn shifted_data_line_is_a_malformed_offset() {
    let dir = tempfile::tempdir().unwrap();
    copy_wordnet(dir.path());
    let path = dir.path().join("data.adv");
    let text = fs::read_to_string(&path).unwrap();
    // An extra byte inside the license header moves every synset line.
    fs::write(&path, text.replacen("  1 This", "  1  This", 1)).unwrap();
    match Lexicon::load(dir.path()) {
        Err(WordNetError::Format { path, message, .. }) => {
            assert!(path.ends_with("data.adv"));
            assert!(message.contains("offset"), "{message}");
        }
        other => panic!("expected format error, got {other:?}"),
    }
}

#[test]
fn dangling_pointer_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    copy_wordnet(dir.path());
    let path = dir.path().join("data.adj");
    let text = fs::read_to_string(&path).unwrap();
    // Point pink's derivational link at a noun offset that holds no synset.
    let line = text.lines().find(|l| l.starts_with("00379595 ")).unwrap();
    let broken = line.replace("+ 04970916 n", "+ 99999999 n");
    assert_eq!(broken.len(), line.len());
    let offset = text.find(line).unwrap();
    fs::write(&path, text.replacen(line, &broken, 1)).unwrap();
    match Lexicon::load(dir.path()) {
        Err(WordNetError::Format { path, offset: at, message }) => {
            assert!(path.ends_with("data.adj"));
            assert_eq!(at, offset);
            assert!(message.contains("nonexistent"), "{message}");
        }
        other => panic!("expected format error, got {other:?}"),
    }
}
