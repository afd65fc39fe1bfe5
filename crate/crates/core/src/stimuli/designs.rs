use super::frame::ItemFrame;
use super::label::{ConditionLabel, Design};
use super::{Stimulus, StimulusSet};
use crate::corpus::NumberFeature::{self, Plural, Singular};
use crate::error::{Error, Result};

const DET: &str = "the";
const REL: &str = "that";

fn number_of(level: &str) -> NumberFeature {
    if level == "Plur" {
        Plural
    } else {
        Singular
    }
}

fn det(frame: &ItemFrame) -> Vec<String> {
    let words = frame.words("det");
    if words.is_empty() {
        vec![DET.to_string()]
    } else {
        words
    }
}

fn rel(frame: &ItemFrame) -> Vec<String> {
    let words = frame.words("rel");
    if words.is_empty() {
        vec![REL.to_string()]
    } else {
        words
    }
}

/// Builds tokens piecewise while tracking where the subject lands.
#[derive(Default)]
struct Builder {
    tokens: Vec<String>,
    subject: usize,
}

impl Builder {
    fn words(&mut self, words: impl IntoIterator<Item = String>) -> &mut Self {
        self.tokens.extend(words);
        self
    }

    fn word(&mut self, w: String) -> &mut Self {
        self.tokens.push(w);
        self
    }

    fn subject(&mut self, w: String) -> &mut Self {
        self.subject = self.tokens.len();
        self.tokens.push(w);
        self
    }
}

fn stimulus(
    frame: &ItemFrame,
    condition: ConditionLabel,
    gold: NumberFeature,
    b: Builder,
    probe: Option<usize>,
) -> Stimulus {
    Stimulus {
        item_id: frame.id.clone(),
        condition,
        gold,
        subject_index: b.subject,
        probe,
        tokens: b.tokens,
    }
}

/// One Exp-1 cell: `the [head_mods] HEAD prep the [pp_mods] LOCAL` or
/// `the [head_mods] HEAD that rc_verb the [rc_mods] LOCAL`.
pub fn realize_exp1(frame: &ItemFrame, condition: &ConditionLabel) -> Result<Stimulus> {
    let subject = number_of(condition.get("subjectNumber").unwrap_or("Sing"));
    let local = if condition.is("localMatch", "Match") {
        subject
    } else {
        subject.opposite()
    };
    let mut b = Builder::default();
    b.words(det(frame))
        .words(frame.words("head_mods"))
        .subject(frame.noun("head", subject)?);
    if condition.is("modifier", "RC") {
        let verb = frame.required("rc_verb").map_err(|_| Error::Frame {
            id: frame.id.clone(),
            reason: "cannot realize the RC condition without `rc_verb`".into(),
        })?;
        b.words(rel(frame))
            .words(verb)
            .words(det(frame))
            .words(frame.words("rc_mods"));
    } else {
        b.words(frame.required("prep")?)
            .words(det(frame))
            .words(frame.words("pp_mods"));
    }
    b.word(frame.noun("local", local)?);
    Ok(stimulus(frame, condition.clone(), subject, b, None))
}

/// Order of the two modifiers in Exp-2 materials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exp2Order {
    /// `the bird that ate the worms near the trees`
    RcFirst,
    /// `the bird near the trees that eats the worms`
    PpFirst,
}

impl Exp2Order {
    pub fn flipped(self) -> Self {
        match self {
            Exp2Order::RcFirst => Exp2Order::PpFirst,
            Exp2Order::PpFirst => Exp2Order::RcFirst,
        }
    }

    pub fn design(self) -> Design {
        match self {
            Exp2Order::RcFirst => Design::Exp2,
            Exp2Order::PpFirst => Design::Exp2Reversed,
        }
    }
}

const EXP2_SLOTS: [&str; 7] = [
    "head",
    "rc_verb",
    "rc_verb_agreeing",
    "first",
    "adverb",
    "prep",
    "second",
];

fn check_exp2(frame: &ItemFrame) -> Result<()> {
    for slot in EXP2_SLOTS {
        if !frame.slots.contains_key(slot) {
            let reason = if slot == "adverb" {
                "missing the adverb alternative (`adverb`)".to_string()
            } else {
                format!("missing slot `{slot}`")
            };
            return Err(Error::Frame {
                id: frame.id.clone(),
                reason,
            });
        }
    }
    Ok(())
}

/// One Exp-2 cell in either modifier order. The subject is always singular;
/// the RC verb is `rc_verb` when the RC comes first and the agreeing
/// present form `rc_verb_agreeing` when it follows the PP.
pub fn realize_exp2(frame: &ItemFrame, order: Exp2Order, n1: &str, n2: &str) -> Result<Stimulus> {
    check_exp2(frame)?;
    let condition = ConditionLabel::new(order.design(), &[("n1", n1), ("n2", n2)])?;
    let mut b = Builder::default();
    b.words(det(frame)).subject(frame.noun("head", Singular)?);
    let rc = |b: &mut Builder, verb: &str| -> Result<()> {
        b.words(rel(frame)).words(frame.required(verb)?);
        if n1 == "Absent" {
            b.words(frame.required("adverb")?);
        } else {
            b.words(det(frame)).word(frame.noun("first", number_of(n1))?);
        }
        Ok(())
    };
    let pp = |b: &mut Builder| -> Result<()> {
        b.words(frame.required("prep")?)
            .words(det(frame))
            .word(frame.noun("second", number_of(n2))?);
        Ok(())
    };
    match order {
        Exp2Order::RcFirst => {
            rc(&mut b, "rc_verb")?;
            pp(&mut b)?;
        }
        Exp2Order::PpFirst => {
            pp(&mut b)?;
            rc(&mut b, "rc_verb_agreeing")?;
        }
    }
    Ok(stimulus(frame, condition, Singular, b, None))
}

/// One RC-length probe cell: `the HEAD that the [[degree] adj] EMBEDDED
/// embedded_verb`. InsideRC probes before the embedded verb.
pub fn realize_rc_probe(frame: &ItemFrame, condition: &ConditionLabel) -> Result<Stimulus> {
    let mut b = Builder::default();
    b.words(det(frame)).word(frame.noun("head", Singular)?);
    let main = b.tokens.len() - 1;
    b.words(rel(frame)).words(det(frame));
    match condition.get("rcLength") {
        Some("Medium") => {
            b.words(frame.required("adj")?);
        }
        Some("Long") => {
            b.words(frame.required("degree")?).words(frame.required("adj")?);
        }
        _ => {}
    }
    b.subject(frame.noun("embedded", Plural)?);
    let probe = b.tokens.len();
    b.words(frame.required("embedded_verb")?);
    if condition.is("probeSite", "InsideRC") {
        Ok(stimulus(frame, condition.clone(), Plural, b, Some(probe)))
    } else {
        b.subject = main;
        Ok(stimulus(frame, condition.clone(), Singular, b, None))
    }
}

fn collect(
    frames: &[ItemFrame],
    design: Design,
    f: impl Fn(&ItemFrame, &ConditionLabel) -> Result<Stimulus>,
) -> Result<StimulusSet> {
    let conditions = design.conditions();
    let mut stimuli = Vec::with_capacity(frames.len() * conditions.len());
    for frame in frames {
        for c in &conditions {
            stimuli.push(f(frame, c)?);
        }
    }
    Ok(StimulusSet { stimuli })
}

/// Eight conditions per frame: modifier × subject number × local match.
pub fn gen_exp1(frames: &[ItemFrame]) -> Result<StimulusSet> {
    collect(frames, Design::Exp1, realize_exp1)
}

fn exp2(frames: &[ItemFrame], order: Exp2Order) -> Result<StimulusSet> {
    collect(frames, order.design(), |frame, c| {
        realize_exp2(frame, order, c.get("n1").unwrap_or(""), c.get("n2").unwrap_or(""))
    })
}

/// Six conditions per frame: first RC element (adverb, singular or plural
/// noun) × number of the noun inside the PP.
pub fn gen_exp2(frames: &[ItemFrame]) -> Result<StimulusSet> {
    exp2(frames, Exp2Order::RcFirst)
}

/// The Exp-2 materials with the PP moved before the RC.
pub fn gen_exp2_reversed(frames: &[ItemFrame]) -> Result<StimulusSet> {
    exp2(frames, Exp2Order::PpFirst)
}

/// Three RC lengths × two probe sites per frame.
pub fn gen_rc_length_probe(frames: &[ItemFrame]) -> Result<StimulusSet> {
    collect(frames, Design::RcLengthProbe, realize_rc_probe)
}

pub fn generate(design: Design, frames: &[ItemFrame]) -> Result<StimulusSet> {
    match design {
        Design::Exp1 => gen_exp1(frames),
        Design::Exp2 => gen_exp2(frames),
        Design::Exp2Reversed => gen_exp2_reversed(frames),
        Design::RcLengthProbe => gen_rc_length_probe(frames),
    }
}
