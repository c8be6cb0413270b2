#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use persuaide::conllu::parse_conllu_str;
use persuaide::{Lexicon, ParsedSentence};

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn wordnet_dir() -> PathBuf {
    workspace_root().join("data/wordnet-3.0")
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// The WordNet 3.0 lexicon, loaded once per test binary.
pub fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon::load(&wordnet_dir()).expect("vendored WordNet loads"))
}

pub fn parse_one(src: &str) -> ParsedSentence {
    parse_conllu_str(src).unwrap().remove(0)
}

/// Frozen parse from `tests/fixtures/parses.conllu` by its text.
pub fn frozen(text: &str) -> ParsedSentence {
    let all = std::fs::read_to_string(fixtures().join("parses.conllu")).unwrap();
    parse_conllu_str(&all)
        .unwrap()
        .into_iter()
        .find(|s| s.raw_text() == text)
        .unwrap_or_else(|| panic!("no frozen parse for `{text}`"))
}

pub const ROW1: &str = "Think pink but don't wear it";
pub const ROW2: &str = "Jewelry maybe is more expensive than clothes, but clothes are more important than jewelry";

/// Fixture pipeline for `slip.conf` or `outfit.conf`, loaded once per test
/// binary; each call hands out a clone sharing the resources.
pub fn pipeline(conf: &str) -> persuaide::Pipeline {
    static SLIP: OnceLock<persuaide::Pipeline> = OnceLock::new();
    static OUTFIT: OnceLock<persuaide::Pipeline> = OnceLock::new();
    let cell = match conf {
        "slip" => &SLIP,
        "outfit" => &OUTFIT,
        other => panic!("no fixture config {other}"),
    };
    cell.get_or_init(|| {
        let cfg = persuaide::PipelineConfig::load(&fixtures().join(format!("{conf}.conf"))).unwrap();
        persuaide::Pipeline::load(cfg).unwrap()
    })
    .clone()
}
