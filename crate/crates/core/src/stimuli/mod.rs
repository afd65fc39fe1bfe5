//! Factorial stimulus designs built from item frames, the stimulus file
//! format and attractor annotation.

mod designs;
mod frame;
mod label;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

pub use designs::{
    gen_exp1, gen_exp2, gen_exp2_reversed, gen_rc_length_probe, generate, realize_exp1, realize_exp2, realize_rc_probe,
    Exp2Order,
};
pub use frame::{export_frames, parse_frames, ItemFrame};
pub use label::{ConditionLabel, Design};

use crate::corpus::{NumberFeature, Preamble, Recognizer, TokenId, Vocabulary};
use crate::error::{Error, Result};

/// One preamble of a design, in surface form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stimulus {
    pub item_id: String,
    pub condition: ConditionLabel,
    pub gold: NumberFeature,
    pub subject_index: usize,
    /// Prefix length at which the prediction is read; `None` reads it after
    /// the last token.
    pub probe: Option<usize>,
    pub tokens: Vec<String>,
}

impl Stimulus {
    pub fn design(&self) -> Design {
        self.condition.design
    }

    /// Length of the prefix the prediction is made on.
    pub fn prediction_point(&self) -> usize {
        self.probe.unwrap_or(self.tokens.len())
    }

    pub fn token_ids(&self, vocab: &Vocabulary) -> Result<Vec<TokenId>> {
        self.tokens
            .iter()
            .map(|t| {
                vocab
                    .id(t)
                    .filter(|id| !vocab.token(*id).placeholder)
                    .ok_or_else(|| Error::UnknownToken(t.clone()))
            })
            .collect()
    }

    /// The preamble the prediction is made on: the prefix up to the probe
    /// point, with item and condition recorded in its metadata.
    pub fn to_preamble(&self, vocab: &Vocabulary) -> Result<Preamble> {
        let mut ids = self.token_ids(vocab)?;
        ids.truncate(self.prediction_point());
        Ok(Preamble::from_tokens(ids, self.gold, self.subject_index, vocab)?
            .with_meta("design", self.design().id())
            .with_meta("item", self.item_id.clone())
            .with_meta("condition", self.condition.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StimulusSet {
    pub stimuli: Vec<Stimulus>,
}

impl StimulusSet {
    pub fn len(&self) -> usize {
        self.stimuli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stimuli.is_empty()
    }

    pub fn item_ids(&self) -> BTreeSet<&str> {
        self.stimuli.iter().map(|s| s.item_id.as_str()).collect()
    }

    /// Checks that each item carries every condition of its design exactly once.
    pub fn check_complete(&self) -> Result<()> {
        let mut cells: BTreeMap<(Design, &str), Vec<&ConditionLabel>> = BTreeMap::new();
        for s in &self.stimuli {
            cells.entry((s.design(), &s.item_id)).or_default().push(&s.condition);
        }
        for ((design, item), mut seen) in cells {
            seen.sort();
            let mut want = design.conditions();
            want.sort();
            if seen.len() != want.len() || seen.iter().zip(&want).any(|(a, b)| *a != b) {
                return Err(Error::Frame {
                    id: item.to_string(),
                    reason: format!("does not cover the {design} conditions exactly once"),
                });
            }
        }
        Ok(())
    }

    /// Columns: design, item, condition, gold, subject index, probe (empty
    /// for end of preamble), space-separated tokens.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for s in &self.stimuli {
            let probe = s.probe.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                s.design().id(),
                s.item_id,
                s.condition,
                s.gold.code(),
                s.subject_index,
                probe,
                s.tokens.join(" ")
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut stimuli = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::parse(i + 1, m);
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 7 {
                return Err(bad("expected 7 tab-separated columns"));
            }
            let design: Design = f[0].parse().map_err(|e: Error| bad(&e.to_string()))?;
            let condition = ConditionLabel::parse(design, f[2]).map_err(|e| bad(&e.to_string()))?;
            let gold = NumberFeature::from_code(f[3])
                .filter(|n| n.is_marked())
                .ok_or_else(|| bad("gold must be S or P"))?;
            let subject_index = f[4].parse().map_err(|_| bad("bad subject index"))?;
            let probe = match f[5] {
                "" => None,
                p => Some(p.parse().map_err(|_| bad("bad probe position"))?),
            };
            let tokens: Vec<String> = f[6].split_whitespace().map(str::to_string).collect();
            if subject_index >= tokens.len() {
                return Err(bad("subject index out of range"));
            }
            if probe.is_some_and(|p: usize| p == 0 || p > tokens.len() || p <= subject_index) {
                return Err(bad("probe position out of range"));
            }
            stimuli.push(Stimulus {
                item_id: f[1].to_string(),
                condition,
                gold,
                subject_index,
                probe,
                tokens,
            });
        }
        Ok(StimulusSet { stimuli })
    }
}

/// Nouns that oppose the gold number between the subject and the end of a
/// preamble.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttractorAnnotation {
    pub positions: Vec<usize>,
}

impl AttractorAnnotation {
    pub fn count(&self) -> usize {
        self.positions.len()
    }
}

pub fn annotate_attractors(preamble: &Preamble) -> AttractorAnnotation {
    let opposite = preamble.gold.opposite();
    AttractorAnnotation {
        positions: preamble
            .noun_positions
            .iter()
            .filter(|&&(pos, number)| pos > preamble.subject_index && number == opposite)
            .map(|&(pos, _)| pos)
            .collect(),
    }
}

/// Checks stimuli against a grammar and vocabulary: every token retained,
/// preamble invariants hold, the prefix is grammatical, and the grammar
/// allows a verb of the gold number, but not the opposite one, next.
/// Returns one `(item id, reason)` per failing stimulus.
pub fn check_stimuli(set: &StimulusSet, recognizer: &Recognizer, vocab: &Vocabulary) -> Vec<(String, String)> {
    let mut problems = Vec::new();
    for s in &set.stimuli {
        let fail = |reason: String| (s.item_id.clone(), format!("{}: {reason}", s.condition));
        let preamble = match s.to_preamble(vocab) {
            Ok(p) => p,
            Err(e) => {
                problems.push(fail(e.to_string()));
                continue;
            }
        };
        let cats = Recognizer::categorize(vocab, &preamble.tokens);
        let next = recognizer.next_terminals(&cats);
        if next.is_empty() {
            problems.push(fail("not a grammatical prefix".into()));
            continue;
        }
        let allows = |n: NumberFeature| next.iter().any(|(_, num)| *num == Some(n));
        if !allows(s.gold) || allows(s.gold.opposite()) {
            problems.push(fail(format!("grammar does not force a {} verb here", s.gold)));
        }
        if let Some(p) = s.probe {
            let full = match s.token_ids(vocab) {
                Ok(ids) => ids,
                Err(_) => continue,
            };
            if !recognizer.is_viable_prefix(&Recognizer::categorize(vocab, &full)) {
                problems.push(fail(format!("tokens after probe {p} are ungrammatical")));
            }
        }
    }
    problems
}
