//! Lexicon, vocabulary, synthetic grammar and preamble extraction.

mod generate;
mod grammar;
mod lexicon;
mod preamble;
mod recognizer;

pub use generate::{generate_corpus, Derivation, Generator};
pub use grammar::{GrammarSpec, Production, Symbol};
pub use lexicon::{
    build_vocabulary, parse_lexicon, LexEntry, NumberFeature, TokenId, TokenInfo, Vocabulary, DEFAULT_CUTOFF,
    UNKNOWN_SURFACE,
};
pub use preamble::{export_preambles, extract_preamble, ingest_preambles, AnnotatedSentence, AnnotatedToken, Preamble};
pub use recognizer::Recognizer;

/// Default corpus sizes of the full-scale configuration.
pub const DEFAULT_TRAIN_PREAMBLES: usize = 1_270_000;
pub const DEFAULT_VALIDATION_PREAMBLES: usize = 142_000;
