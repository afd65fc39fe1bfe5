use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng as _, SeedableRng};

use super::lexicon::{NumberFeature, TokenId, Vocabulary};
use crate::error::{Error, Result};
use crate::Rng;

/// Words of a sentence up to, not including, a verb whose number is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preamble {
    pub tokens: Vec<TokenId>,
    pub gold: NumberFeature,
    pub subject_index: usize,
    /// Every number-marked noun of the preamble with its number, in order.
    pub noun_positions: Vec<(usize, NumberFeature)>,
    pub meta: BTreeMap<String, String>,
}

impl Preamble {
    /// Builds a preamble, deriving noun positions from the vocabulary and
    /// checking that the subject carries the gold number.
    pub fn from_tokens(
        tokens: Vec<TokenId>,
        gold: NumberFeature,
        subject_index: usize,
        vocab: &Vocabulary,
    ) -> Result<Self> {
        let noun_positions = tokens
            .iter()
            .enumerate()
            .filter(|(_, &id)| vocab.is_noun(id))
            .map(|(i, &id)| (i, vocab.number(id)))
            .collect();
        let preamble = Preamble {
            tokens,
            gold,
            subject_index,
            noun_positions,
            meta: BTreeMap::new(),
        };
        preamble.check()?;
        Ok(preamble)
    }

    pub fn check(&self) -> Result<()> {
        if !self.gold.is_marked() {
            return Err(Error::Input("gold number must be singular or plural".into()));
        }
        if self.subject_index >= self.tokens.len() {
            return Err(Error::Input(format!(
                "subject index {} outside a {}-token preamble",
                self.subject_index,
                self.tokens.len()
            )));
        }
        let subject = self
            .noun_positions
            .iter()
            .find(|(p, _)| *p == self.subject_index)
            .map(|&(_, n)| n);
        if subject != Some(self.gold) {
            return Err(Error::Input(format!(
                "token {} is not a {} noun",
                self.subject_index,
                match self.gold {
                    NumberFeature::Singular => "singular",
                    _ => "plural",
                }
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotatedToken {
    pub id: TokenId,
    /// Number carried by the token as the model sees it (placeholders are
    /// unmarked).
    pub number: NumberFeature,
    pub is_noun: bool,
}

/// A full sentence with its verb → subject dependencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub tokens: Vec<AnnotatedToken>,
    /// `(verb position, subject position)` pairs.
    pub agreements: Vec<(usize, usize)>,
}

impl AnnotatedSentence {
    /// Verb positions whose annotated subject precedes them and agrees in number.
    pub fn eligible_verbs(&self) -> Vec<usize> {
        let mut verbs: Vec<usize> = self
            .agreements
            .iter()
            .filter(|&&(verb, subject)| {
                subject < verb
                    && verb < self.tokens.len()
                    && self.tokens[verb].number.is_marked()
                    && self.tokens[subject].is_noun
                    && self.tokens[verb].number == self.tokens[subject].number
            })
            .map(|&(verb, _)| verb)
            .collect();
        verbs.sort_unstable();
        verbs.dedup();
        verbs
    }
}

/// Cuts the sentence right before one of its agreeing verbs, chosen
/// uniformly with a generator seeded by `verb_choice_seed`. Returns `None`
/// when no verb agrees with its subject; such sentences are skipped.
pub fn extract_preamble(sentence: &AnnotatedSentence, verb_choice_seed: u64) -> Option<Preamble> {
    let eligible = sentence.eligible_verbs();
    if eligible.is_empty() {
        return None;
    }
    let pick = if eligible.len() == 1 {
        0
    } else {
        Rng::seed_from_u64(verb_choice_seed).gen_range(0..eligible.len())
    };
    let verb = eligible[pick];
    let subject = sentence.agreements.iter().find(|&&(v, _)| v == verb).map(|&(_, s)| s)?;
    let tokens = &sentence.tokens[..verb];
    Some(Preamble {
        tokens: tokens.iter().map(|t| t.id).collect(),
        gold: sentence.tokens[verb].number,
        subject_index: subject,
        noun_positions: tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_noun && t.number.is_marked())
            .map(|(i, t)| (i, t.number))
            .collect(),
        meta: BTreeMap::new(),
    })
}

/// Writes the preamble exchange format: `S|P<TAB>subjectIndex<TAB>tokens`.
pub fn export_preambles(preambles: &[Preamble], vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for p in preambles {
        let _ = write!(out, "{}\t{}\t", p.gold.code(), p.subject_index);
        for (i, &id) in p.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(vocab.surface(id));
        }
        out.push('\n');
    }
    out
}

/// Reads the preamble exchange format. Surfaces are lowercased and mapped
/// through the vocabulary (rare forms become placeholders, unknown forms the
/// unknown token). Records whose subject is not a noun of the gold number are
/// rejected with their line number.
pub fn ingest_preambles(text: &str, vocab: &Vocabulary) -> Result<Vec<Preamble>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let gold = fields.next().unwrap_or("").trim();
        let gold = match NumberFeature::from_code(gold) {
            Some(n) if n.is_marked() => n,
            _ => return Err(Error::parse(line_no, "missing or invalid gold label")),
        };
        let subject_index: usize = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Error::parse(line_no, "missing or invalid subject index"))?;
        let tokens: Vec<TokenId> = fields
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|w| vocab.id_or_unknown(&w.to_lowercase()))
            .collect();
        if subject_index >= tokens.len() {
            return Err(Error::parse(
                line_no,
                format!("subject index {subject_index} out of range for {} tokens", tokens.len()),
            ));
        }
        let preamble = Preamble::from_tokens(tokens, gold, subject_index, vocab)
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        out.push(preamble);
    }
    Ok(out)
}
