use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng as _, SeedableRng};

use super::grammar::GrammarSpec;
use super::lexicon::{NumberFeature, TokenId, Vocabulary};
use super::preamble::{extract_preamble, AnnotatedSentence, AnnotatedToken, Preamble};
use crate::error::{Error, Result};
use crate::Rng;

/// Consecutive depth overflows tolerated before generation gives up.
const MAX_REJECTIONS: usize = 10_000;

/// One sampled sentence together with the productions used to derive it.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub sentence: AnnotatedSentence,
    /// Production indices in the order they were expanded.
    pub rules: Vec<usize>,
    /// Surface forms as sampled, before any placeholder replacement.
    pub surfaces: Vec<String>,
}

struct Pool {
    surfaces: Vec<String>,
    choose: WeightedIndex<f64>,
}

/// Samples sentences from a grammar over a vocabulary's lexicon.
pub struct Generator<'a> {
    spec: &'a GrammarSpec,
    vocab: &'a Vocabulary,
    choose_rule: HashMap<&'a str, (Vec<usize>, WeightedIndex<f64>)>,
    pools: HashMap<(String, Option<NumberFeature>), Pool>,
}

struct Partial {
    words: Vec<(String, Option<usize>, bool)>,
    instances: Vec<NumberFeature>,
    rules: Vec<usize>,
}

impl<'a> Generator<'a> {
    pub fn new(spec: &'a GrammarSpec, vocab: &'a Vocabulary) -> Result<Self> {
        spec.check_termination()?;

        let mut choose_rule = HashMap::new();
        for nt in spec.nonterminals() {
            let ids = spec.alternatives(nt).to_vec();
            let weights: Vec<f64> = ids.iter().map(|&i| spec.productions[i].weight).collect();
            let dist = WeightedIndex::new(&weights).map_err(|e| Error::Grammar(format!("weights of `{nt}`: {e}")))?;
            choose_rule.insert(nt, (ids, dist));
        }

        let mut pools = HashMap::new();
        for (category, agreeing) in spec.terminals() {
            let keys: Vec<Option<NumberFeature>> = if agreeing {
                vec![Some(NumberFeature::Singular), Some(NumberFeature::Plural)]
            } else {
                vec![None]
            };
            for key in keys {
                let matching: Vec<_> = vocab
                    .entries()
                    .iter()
                    .filter(|e| e.category == category && key.is_none_or(|n| e.number == n))
                    .collect();
                if matching.is_empty() {
                    return Err(Error::Grammar(format!(
                        "terminal `{category}` has no lexicon entries{}",
                        match key {
                            Some(n) => format!(" with number {n}"),
                            None => String::new(),
                        }
                    )));
                }
                let weights: Vec<f64> = matching
                    .iter()
                    .map(|e| (e.frequency_rank as f64).powf(-spec.zipf_exponent))
                    .collect();
                let choose = WeightedIndex::new(&weights)
                    .map_err(|e| Error::Grammar(format!("lexical weights of `{category}`: {e}")))?;
                pools.insert(
                    (category.clone(), key),
                    Pool {
                        surfaces: matching.iter().map(|e| e.surface.clone()).collect(),
                        choose,
                    },
                );
            }
        }

        Ok(Generator {
            spec,
            vocab,
            choose_rule,
            pools,
        })
    }

    fn draw_number(&self, var: &str, rng: &mut Rng) -> NumberFeature {
        if rng.gen_bool(self.spec.rate_for(var)) {
            NumberFeature::Singular
        } else {
            NumberFeature::Plural
        }
    }

    /// Expands `name` bound to variable instance `instance`. On depth
    /// overflow returns the nonterminal being expanded.
    fn expand(
        &self,
        name: &str,
        instance: Option<usize>,
        depth: usize,
        rng: &mut Rng,
        out: &mut Partial,
    ) -> std::result::Result<(), String> {
        if depth > self.spec.depth_limit {
            return Err(name.to_string());
        }
        let (ids, dist) = &self.choose_rule[name];
        let rule = ids[dist.sample(rng)];
        out.rules.push(rule);
        let production = &self.spec.productions[rule];

        let mut fresh: Vec<(&str, usize)> = Vec::new();
        for var in production.fresh_vars() {
            let number = self.draw_number(var, rng);
            out.instances.push(number);
            fresh.push((var, out.instances.len() - 1));
        }
        let resolve = |var: &Option<String>| -> Option<usize> {
            let var = var.as_deref()?;
            if production.lhs.var.as_deref() == Some(var) {
                instance
            } else {
                fresh.iter().find(|(v, _)| *v == var).map(|&(_, i)| i)
            }
        };

        for sym in &production.rhs {
            let bound = resolve(&sym.var);
            if self.spec.is_nonterminal(&sym.name) {
                self.expand(&sym.name, bound, depth + 1, rng, out)?;
            } else {
                let is_noun = self.vocab.is_noun_category(&sym.name);
                let number = match bound {
                    Some(k) if is_noun || self.spec.number_agreement => Some(out.instances[k]),
                    Some(_) => Some(self.draw_number(sym.var.as_deref().unwrap_or(""), rng)),
                    None => None,
                };
                let pool = &self.pools[&(sym.name.clone(), number)];
                let surface = pool.surfaces[pool.choose.sample(rng)].clone();
                out.words.push((surface, bound, is_noun));
            }
        }
        Ok(())
    }

    /// Samples one sentence, retrying from scratch whenever the depth limit
    /// is exceeded.
    pub fn derive(&self, rng: &mut Rng) -> Result<Derivation> {
        let mut last_overflow = self.spec.start.clone();
        for _ in 0..MAX_REJECTIONS {
            let mut partial = Partial {
                words: Vec::new(),
                instances: Vec::new(),
                rules: Vec::new(),
            };
            match self.expand(&self.spec.start, None, 1, rng, &mut partial) {
                Ok(()) => return Ok(self.finish(partial)),
                Err(nt) => last_overflow = nt,
            }
        }
        Err(Error::NoTermination {
            nonterminal: last_overflow,
            depth: self.spec.depth_limit,
        })
    }

    fn finish(&self, partial: Partial) -> Derivation {
        let tokens: Vec<AnnotatedToken> = partial
            .words
            .iter()
            .map(|(surface, _, _)| {
                let id: TokenId = self.vocab.id_or_unknown(surface);
                AnnotatedToken {
                    id,
                    number: self.vocab.number(id),
                    is_noun: self.vocab.is_noun(id),
                }
            })
            .collect();

        let mut controllers: Vec<Vec<usize>> = vec![Vec::new(); partial.instances.len()];
        for (pos, (_, instance, is_noun)) in partial.words.iter().enumerate() {
            if let (Some(k), true) = (instance, is_noun) {
                controllers[*k].push(pos);
            }
        }
        let agreements = partial
            .words
            .iter()
            .enumerate()
            .filter_map(|(pos, (_, instance, is_noun))| match instance {
                Some(k) if !is_noun && controllers[*k].len() == 1 => Some((pos, controllers[*k][0])),
                _ => None,
            })
            .collect();

        Derivation {
            sentence: AnnotatedSentence { tokens, agreements },
            rules: partial.rules,
            surfaces: partial.words.into_iter().map(|(s, _, _)| s).collect(),
        }
    }
}

/// Generates exactly `n` preambles. The output is a pure function of
/// `(grammar, vocabulary, n, seed)`.
pub fn generate_corpus(grammar: &GrammarSpec, vocab: &Vocabulary, n: usize, seed: u64) -> Result<Vec<Preamble>> {
    let generator = Generator::new(grammar, vocab)?;
    let mut rng = Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut skipped = 0usize;
    while out.len() < n {
        let derivation = generator.derive(&mut rng)?;
        let verb_seed: u64 = rng.gen();
        match extract_preamble(&derivation.sentence, verb_seed) {
            Some(p) => {
                skipped = 0;
                out.push(p);
            }
            None => {
                skipped += 1;
                if skipped > MAX_REJECTIONS {
                    return Err(Error::Grammar(
                        "grammar produces no sentences with an agreeing verb".into(),
                    ));
                }
            }
        }
    }
    Ok(out)
}
