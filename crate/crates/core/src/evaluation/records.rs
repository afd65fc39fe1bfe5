use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{NumberFeature, Preamble, Vocabulary};
use crate::error::{Error, Result};
use crate::network::{forward_probe, forward_with, number_from_probability, ModelParams, Workspace};
use crate::stimuli::{annotate_attractors, StimulusSet};

/// Design name used for records scored on corpus preambles.
pub const CORPUS_DESIGN: &str = "corpus";

/// One model prediction on one preamble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub replica_seed: u64,
    pub design: String,
    pub item_id: String,
    pub condition: String,
    pub probe: Option<usize>,
    pub gold: NumberFeature,
    pub p_plural: f64,
    pub predicted: NumberFeature,
    pub is_error: bool,
}

impl EvalRecord {
    fn new(
        seed: u64,
        design: &str,
        item: &str,
        condition: String,
        probe: Option<usize>,
        gold: NumberFeature,
        p: f64,
    ) -> Self {
        let predicted = number_from_probability(p);
        EvalRecord {
            replica_seed: seed,
            design: design.to_string(),
            item_id: item.to_string(),
            condition,
            probe,
            gold,
            p_plural: p,
            predicted,
            is_error: predicted != gold,
        }
    }
}

fn check_dims(ensemble: &[ModelParams], vocab_len: usize) -> Result<()> {
    for m in ensemble {
        if m.dims.vocab != vocab_len {
            return Err(Error::Input(format!(
                "model {} has {} embeddings but the vocabulary has {vocab_len} tokens",
                m.seed, m.dims.vocab
            )));
        }
    }
    Ok(())
}

/// Scores every replica on every stimulus. Records are replica-major, in
/// stimulus order. Fails naming every token missing from the vocabulary.
pub fn evaluate(ensemble: &[ModelParams], stimuli: &StimulusSet, vocab: &Vocabulary) -> Result<Vec<EvalRecord>> {
    check_dims(ensemble, vocab.len())?;
    let mut unknown = std::collections::BTreeSet::new();
    let mut encoded = Vec::with_capacity(stimuli.len());
    for s in &stimuli.stimuli {
        match s.token_ids(vocab) {
            Ok(ids) => encoded.push(ids),
            Err(_) => unknown.extend(s.tokens.iter().filter(|t| !vocab.is_retained(t)).cloned()),
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownToken(unknown.into_iter().collect::<Vec<_>>().join(", ")));
    }
    let per_replica: Vec<Vec<EvalRecord>> = ensemble
        .par_iter()
        .map(|params| {
            let mut ws = Workspace::new();
            stimuli
                .stimuli
                .iter()
                .zip(&encoded)
                .map(|(s, ids)| {
                    let p = match s.probe {
                        Some(point) => forward_probe(params, ids, &[point])?[0],
                        None => forward_with(params, ids, &mut ws)?,
                    };
                    Ok(EvalRecord::new(
                        params.seed,
                        s.design().id(),
                        &s.item_id,
                        s.condition.to_string(),
                        s.probe,
                        s.gold,
                        p,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_replica.into_iter().flatten().collect())
}

/// Condition label for corpus preambles.
pub fn attractor_condition(count: usize) -> String {
    format!("attractors={count}")
}

/// Scores every replica on corpus preambles, labelling each record with
/// the preamble's index and attractor count.
pub fn evaluate_preambles(ensemble: &[ModelParams], preambles: &[Preamble]) -> Result<Vec<EvalRecord>> {
    let labels: Vec<String> = preambles
        .iter()
        .map(|p| attractor_condition(annotate_attractors(p).count()))
        .collect();
    let per_replica: Vec<Vec<EvalRecord>> = ensemble
        .par_iter()
        .map(|params| {
            let mut ws = Workspace::new();
            preambles
                .iter()
                .zip(&labels)
                .enumerate()
                .map(|(i, (p, label))| {
                    let prob = forward_with(params, &p.tokens, &mut ws)?;
                    Ok(EvalRecord::new(
                        params.seed,
                        CORPUS_DESIGN,
                        &i.to_string(),
                        label.clone(),
                        None,
                        p.gold,
                        prob,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_replica.into_iter().flatten().collect())
}

const HEADER: &str = "replica\tdesign\titem\tcondition\tprobe\tgold\tp_plural\tpredicted\terror";

pub fn records_to_tsv(records: &[EvalRecord]) -> String {
    let mut out = format!("{HEADER}\n");
    for r in records {
        let probe = r.probe.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{:?}\t{}\t{}",
            r.replica_seed,
            r.design,
            r.item_id,
            r.condition,
            probe,
            r.gold.code(),
            r.p_plural,
            r.predicted.code(),
            u8::from(r.is_error)
        );
    }
    out
}

pub fn parse_records(text: &str) -> Result<Vec<EvalRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || line == HEADER {
            continue;
        }
        let bad = |m: &str| Error::parse(i + 1, m);
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 9 {
            return Err(bad("expected 9 tab-separated columns"));
        }
        let number = |s: &str| {
            NumberFeature::from_code(s)
                .filter(|n| n.is_marked())
                .ok_or_else(|| bad("number must be S or P"))
        };
        out.push(EvalRecord {
            replica_seed: f[0].parse().map_err(|_| bad("bad replica seed"))?,
            design: f[1].to_string(),
            item_id: f[2].to_string(),
            condition: f[3].to_string(),
            probe: match f[4] {
                "" => None,
                p => Some(p.parse().map_err(|_| bad("bad probe"))?),
            },
            gold: number(f[5])?,
            p_plural: f[6].parse().map_err(|_| bad("bad probability"))?,
            predicted: number(f[7])?,
            is_error: match f[8] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("error flag must be 0 or 1")),
            },
        });
    }
    Ok(out)
}
