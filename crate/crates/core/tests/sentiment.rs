mod common;

use persuaide::conllu::{parse_conllu_str, write_conllu};
use persuaide::sentiment::{classify_noun, insert_adjectives, AdjectiveLexicon, NounGazetteer, SentimentError};
use persuaide::ParsedSentence;
use proptest::prelude::*;

use common::{fixtures, frozen};

fn resources() -> (AdjectiveLexicon, NounGazetteer) {
    (
        AdjectiveLexicon::load(&fixtures().join("adjectives.tsv")).unwrap(),
        NounGazetteer::load(&fixtures().join("gazetteer.tsv")).unwrap(),
    )
}

#[test]
fn pink_gets_gleaming() {
    let (lex, g) = resources();
    let (out, ins) = insert_adjectives(&frozen("Think pink but don't wear it"), &lex, &g, 2, 0).unwrap();
    assert_eq!(out.raw_text(), "Think gleaming pink but don't wear it");
    assert_eq!((ins.len(), ins[0].noun_index, ins[0].insert_before_index), (1, 2, 2));
    let adj = out.token(2).unwrap();
    assert_eq!((adj.upos.as_str(), adj.deprel.as_str(), adj.head), ("ADJ", "amod", 3));
}

#[test]
fn max_insertions_caps_the_plan() {
    let (lex, g) = resources();
    let s = frozen("Jewelry maybe is more expensive than clothes, but clothes are more important than jewelry");
    let (out, ins) = insert_adjectives(&s, &lex, &g, 1, 0).unwrap();
    assert_eq!(ins.len(), 1);
    assert_eq!(
        out.raw_text(),
        "Jewelry maybe is more expensive than stylish clothes, but clothes are more important than jewelry"
    );
    let (out, ins) = insert_adjectives(&s, &lex, &g, 2, 0).unwrap();
    assert_eq!(ins.len(), 2);
    assert!(out.raw_text().contains("than stylish clothes, but stylish clothes are"));
}

#[test]
fn adjective_goes_before_the_premodifier_chain() {
    let s = common::parse_one(
        "1\tA\ta\tDET\t_\t_\t4\tdet\t_\t_\n\
         2\tvery\tvery\tADV\t_\t_\t3\tadvmod\t_\t_\n\
         3\tlong\tlong\tADJ\t_\t_\t4\tamod\t_\t_\n\
         4\tdress\tdress\tNOUN\t_\t_\t0\troot\t_\t_\n",
    );
    let lex = AdjectiveLexicon::from_pairs([("garment", "stylish")]);
    let g = NounGazetteer::from_pairs([("dress", "garment")]);
    let (out, ins) = insert_adjectives(&s, &lex, &g, 2, 0).unwrap();
    assert_eq!(ins[0].insert_before_index, 2);
    assert_eq!(out.raw_text(), "A stylish very long dress");
}

#[test]
fn missing_category_without_generic_is_an_error() {
    let lex = AdjectiveLexicon::from_pairs([("color", "gleaming")]);
    let g = NounGazetteer::from_pairs([("clothes", "garment")]);
    let s = frozen("Jewelry maybe is more expensive than clothes, but clothes are more important than jewelry");
    assert!(matches!(insert_adjectives(&s, &lex, &g, 2, 0), Err(SentimentError::NoAdjectives(_))));
}

#[test]
fn malformed_tsv_reports_the_line() {
    let err = NounGazetteer::parse("# header\npink\tcolor\nclothes garment\n", "g.tsv").unwrap_err();
    assert!(matches!(err, SentimentError::Format { line: 3, .. }), "{err}");
}

const NOUNS: [&str; 5] = ["pink", "clothes", "dress", "ring", "idea"];
const OTHERS: [(&str, &str, &str); 4] = [("the", "DET", "det"), ("very", "ADV", "advmod"), ("red", "ADJ", "amod"), ("silk", "NOUN", "compound")];

/// A sentence of noun phrases hanging off a verb root; each phrase is a few
/// premodifiers followed by a noun.
fn random_sentence(phrases: &[(Vec<usize>, usize)]) -> ParsedSentence {
    let mut src = String::from("1\tSee\tsee\tVERB\t_\t_\t0\troot\t_\t_\n");
    let mut i = 1;
    for (mods, noun) in phrases {
        let noun_index = i + mods.len() + 1;
        for &m in mods {
            i += 1;
            let (w, upos, rel) = OTHERS[m];
            src += &format!("{i}\t{w}\t{w}\t{upos}\t_\t_\t{noun_index}\t{rel}\t_\t_\n");
        }
        i += 1;
        let w = NOUNS[*noun];
        src += &format!("{i}\t{w}\t{w}\tNOUN\t_\t_\t1\tobj\t_\t_\n");
    }
    parse_conllu_str(&src).unwrap().remove(0)
}

proptest! {
    #[test]
    fn insertion_invariants(
        phrases in prop::collection::vec((prop::collection::vec(0usize..4, 0..3), 0usize..5), 1..6),
        max in 1usize..4,
        seed in any::<u64>(),
    ) {
        let s = random_sentence(&phrases);
        let lex = AdjectiveLexicon::from_pairs([("color", "gleaming"), ("garment", "stylish"), ("garment", "chic"), ("generic", "lovely")]);
        let g = NounGazetteer::from_pairs([("pink", "color"), ("clothes", "garment"), ("dress", "garment"), ("ring", "jewelry")]);
        let (out, ins) = insert_adjectives(&s, &lex, &g, max, seed).unwrap();

        prop_assert!(ins.len() <= max);
        prop_assert_eq!(out.len(), s.len() + ins.len());
        let mut points: Vec<_> = ins.iter().map(|i| i.insert_before_index).collect();
        points.dedup();
        prop_assert_eq!(points.len(), ins.len());

        // Dropping the inserted tokens gives back the original words.
        let mut inserted = vec![false; out.len() + 1];
        for (k, i) in ins.iter().enumerate() {
            let at = i.insert_before_index + k;
            inserted[at] = true;
            let t = out.token(at).unwrap();
            prop_assert_eq!(&t.lemma, &i.adjective);
            prop_assert_eq!(t.deprel.as_str(), "amod");
            prop_assert_eq!(&out.token(t.head).unwrap().lemma, &s.token(i.noun_index).unwrap().lemma);
            prop_assert!(classify_noun(&s.token(i.noun_index).unwrap().lemma, &g).is_some());
        }
        let kept: Vec<_> = out.tokens().iter().filter(|t| !inserted[t.index]).map(|t| t.surface.to_lowercase()).collect();
        let original: Vec<_> = s.tokens().iter().map(|t| t.surface.to_lowercase()).collect();
        prop_assert_eq!(kept, original);

        // The result is a well-formed tree.
        let mut buf = Vec::new();
        write_conllu(&mut buf, std::slice::from_ref(&out)).unwrap();
        let back = parse_conllu_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back[0].tokens(), out.tokens());

        let again = insert_adjectives(&s, &lex, &g, max, seed).unwrap();
        prop_assert_eq!(again.0.raw_text(), out.raw_text());
    }
}
