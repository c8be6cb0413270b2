//! Persuasive rewriting of product descriptions.
//!
//! A description sentence is blended with the closest well-known expression
//! (quotation, slogan, movie line): one content word is swapped for a
//! derivationally related form of a word from the other sentence, chosen by
//! how often the candidate occurs in the same dependency relations in a
//! domain corpus. Positive adjectives are then inserted in front of
//! categorized nouns.

pub mod adapter;
pub mod cli;
pub mod config;
pub mod conllu;
pub mod matrix;
pub mod pipeline;
pub mod render;
pub mod retrieval;
pub mod sentiment;
pub mod substitution;
pub mod wordnet;

pub use adapter::{parse_external, AdapterError, ParserAdapter, ParserAdapterConfig};
pub use config::{DirectionPolicy, PipelineConfig};
pub use conllu::{content_words, parse_conllu, parse_conllu_str, ContentWord, ParsedSentence, PosClass, Token};
pub use matrix::{MatrixStats, RelationCounts};
pub use pipeline::{Pipeline, PipelineError, Resources, TransformInput, TransformTrace};
pub use retrieval::{QuoteIndex, QuoteRecord, SimilarityConfig, SimilarityMethod};
pub use substitution::{CandidatePair, Direction};
pub use wordnet::{DerivedForm, Lexicon, PosBuckets};
