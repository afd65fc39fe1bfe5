//! Core of the agreement-attraction laboratory.
//!
//! The crate trains single-layer LSTM classifiers that read a sentence
//! preamble and predict whether the upcoming verb is singular or plural,
//! builds the factorial stimulus designs used to probe those classifiers,
//! and computes the statistics used to compare their error patterns.
//!
//! * [`corpus`]: lexicon, vocabulary, weighted feature grammar, preamble
//!   extraction and the preamble exchange format.
//! * [`network`]: embedding + LSTM + logistic classifier, BPTT and
//!   finite-difference gradient verification.
//! * [`trainer`]: Adam, mini-batching, validation early stopping, ensembles
//!   and checkpoint directories.
//! * [`stimuli`]: Experiment 1, Experiment 2, reversed and RC-length designs.
//! * [`evaluation`]: records, bootstrap statistics, attractor curves and the
//!   directional findings.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod network;
pub mod stimuli;
pub mod trainer;

pub use corpus::{AnnotatedSentence, GrammarSpec, LexEntry, NumberFeature, Preamble, TokenId, Vocabulary};
pub use error::{Error, Result};
pub use evaluation::{AttractorCurve, ConditionStats, EvalRecord};
pub use network::{Dims, Gradients, LstmState, ModelParams};
pub use stimuli::{ConditionLabel, Design, ItemFrame, Stimulus, StimulusSet};
pub use trainer::{AdamState, TrainConfig, TrainLog};

/// Seedable generator used by every stochastic stage of the pipeline.
pub type Rng = rand_chacha::ChaCha8Rng;
