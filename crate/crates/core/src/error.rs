use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("surface form `{0}` appears with conflicting category or number")]
    DuplicateSurface(String),

    #[error("invalid grammar: {0}")]
    Grammar(String),

    #[error("nonterminal `{nonterminal}` has no terminating derivation within depth {depth}")]
    NoTermination { nonterminal: String, depth: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unknown token `{0}`")]
    UnknownToken(String),

    #[error("non-finite value in {0}")]
    Numerical(String),

    #[error("frame `{id}`: {reason}")]
    Frame { id: String, reason: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
