#![allow(dead_code)]

use std::path::PathBuf;

use agreement_core::corpus::{build_vocabulary, parse_lexicon, GrammarSpec, Vocabulary, DEFAULT_CUTOFF};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap()
}

pub fn shipped_vocab() -> Vocabulary {
    build_vocabulary(&parse_lexicon(&read("lexicon.tsv")).unwrap(), DEFAULT_CUTOFF).unwrap()
}

pub fn shipped_grammar() -> GrammarSpec {
    GrammarSpec::parse(&read("grammar.pcfg")).unwrap()
}
