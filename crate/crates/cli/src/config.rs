use std::path::{Path, PathBuf};

use agreement_core::corpus::{
    build_vocabulary, parse_lexicon, GrammarSpec, Vocabulary, DEFAULT_TRAIN_PREAMBLES, DEFAULT_VALIDATION_PREAMBLES,
};
use agreement_core::TrainConfig;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    /// Paths are resolved against the directory of the config file.
    pub lexicon: PathBuf,
    pub grammar: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSizes {
    pub train: usize,
    pub validation: usize,
    /// Held-out preambles for attractor-count curves.
    pub test: usize,
}

impl Default for CorpusSizes {
    fn default() -> Self {
        CorpusSizes {
            train: DEFAULT_TRAIN_PREAMBLES,
            validation: DEFAULT_VALIDATION_PREAMBLES,
            test: 20_000,
        }
    }
}

/// Pipeline configuration: input data, corpus sizes and training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataPaths,
    #[serde(default)]
    pub corpus: CorpusSizes,
    #[serde(default)]
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.data.lexicon = base.join(&config.data.lexicon);
        config.data.grammar = base.join(&config.data.grammar);
        config.train.validate()?;
        Ok(config)
    }

    pub fn vocabulary(&self) -> Result<Vocabulary> {
        let text = std::fs::read_to_string(&self.data.lexicon)
            .with_context(|| format!("reading lexicon {}", self.data.lexicon.display()))?;
        let entries = parse_lexicon(&text).with_context(|| format!("lexicon {}", self.data.lexicon.display()))?;
        Ok(build_vocabulary(&entries, self.train.vocab_cutoff)?)
    }

    pub fn grammar(&self) -> Result<GrammarSpec> {
        let text = std::fs::read_to_string(&self.data.grammar)
            .with_context(|| format!("reading grammar {}", self.data.grammar.display()))?;
        GrammarSpec::parse(&text).with_context(|| format!("grammar {}", self.data.grammar.display()))
    }
}
