//! Earley recognizer for the number-expanded grammar.
//!
//! Every parameterized nonterminal is split into a singular and a plural
//! copy, which turns the feature grammar into a plain context-free grammar
//! over `(category, number)` terminals.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::grammar::GrammarSpec;
use super::lexicon::{NumberFeature, TokenId, Vocabulary};

const NUMBERS: [NumberFeature; 2] = [NumberFeature::Singular, NumberFeature::Plural];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Sym {
    Nonterminal(usize),
    Terminal(usize),
}

#[derive(Debug)]
struct Rule {
    lhs: usize,
    rhs: Vec<Sym>,
}

#[derive(Debug)]
pub struct Recognizer {
    rules: Vec<Rule>,
    rules_of: Vec<Vec<usize>>,
    terminals: Vec<(String, Option<NumberFeature>)>,
    start: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Item {
    rule: usize,
    dot: usize,
    origin: usize,
}

impl Recognizer {
    pub fn new(spec: &GrammarSpec) -> Self {
        let mut nonterminals: HashMap<(String, Option<NumberFeature>), usize> = HashMap::new();
        let mut terminals: Vec<(String, Option<NumberFeature>)> = Vec::new();
        let mut terminal_ids: HashMap<(String, Option<NumberFeature>), usize> = HashMap::new();

        let mut nt_id = |key: (String, Option<NumberFeature>)| -> usize {
            let next = nonterminals.len();
            *nonterminals.entry(key).or_insert(next)
        };

        let mut rules = Vec::new();
        for p in &spec.productions {
            let lhs_values: Vec<Option<NumberFeature>> = match p.lhs.var {
                Some(_) => NUMBERS.iter().copied().map(Some).collect(),
                None => vec![None],
            };
            let fresh = p.fresh_vars();
            for lhs_value in &lhs_values {
                for mask in 0..(1usize << fresh.len()) {
                    let value_of = |var: &Option<String>| -> Option<NumberFeature> {
                        let var = var.as_deref()?;
                        if p.lhs.var.as_deref() == Some(var) {
                            return *lhs_value;
                        }
                        let k = fresh.iter().position(|f| *f == var)?;
                        Some(NUMBERS[(mask >> k) & 1])
                    };
                    let lhs = nt_id((p.lhs.name.clone(), *lhs_value));
                    let rhs = p
                        .rhs
                        .iter()
                        .map(|sym| {
                            let key = (sym.name.clone(), value_of(&sym.var));
                            if spec.is_nonterminal(&sym.name) {
                                Sym::Nonterminal(nt_id(key))
                            } else {
                                let next = terminals.len();
                                let id = *terminal_ids.entry(key.clone()).or_insert(next);
                                if id == next {
                                    terminals.push(key);
                                }
                                Sym::Terminal(id)
                            }
                        })
                        .collect();
                    rules.push(Rule { lhs, rhs });
                }
            }
        }

        let mut rules_of = vec![Vec::new(); nonterminals.len()];
        for (i, r) in rules.iter().enumerate() {
            rules_of[r.lhs].push(i);
        }
        let start = [None, Some(NumberFeature::Singular), Some(NumberFeature::Plural)]
            .into_iter()
            .filter_map(|n| nonterminals.get(&(spec.start.clone(), n)).copied())
            .collect();

        Recognizer {
            rules,
            rules_of,
            terminals,
            start,
        }
    }

    fn matches(&self, terminal: usize, token: (&str, NumberFeature)) -> bool {
        let (category, number) = &self.terminals[terminal];
        category == token.0
            && match number {
                None => true,
                Some(n) => token.1 == *n || token.1 == NumberFeature::Unmarked,
            }
    }

    /// Runs the recognizer and returns the final chart column, or `None`
    /// when the input stops being a viable prefix.
    fn run(&self, tokens: &[(&str, NumberFeature)]) -> Option<(Vec<Item>, bool)> {
        let mut column: Vec<Item> = Vec::new();
        let mut seen: HashSet<Item> = HashSet::new();
        for &s in &self.start {
            for &r in &self.rules_of[s] {
                let item = Item {
                    rule: r,
                    dot: 0,
                    origin: 0,
                };
                if seen.insert(item) {
                    column.push(item);
                }
            }
        }
        let mut chart: Vec<Vec<Item>> = Vec::with_capacity(tokens.len() + 1);

        for position in 0..=tokens.len() {
            // predict + complete to closure
            let mut i = 0;
            let mut predicted: HashSet<usize> = HashSet::new();
            while i < column.len() {
                let item = column[i];
                i += 1;
                let rule = &self.rules[item.rule];
                match rule.rhs.get(item.dot) {
                    Some(Sym::Nonterminal(nt)) => {
                        if predicted.insert(*nt) {
                            for &r in &self.rules_of[*nt] {
                                let next = Item {
                                    rule: r,
                                    dot: 0,
                                    origin: position,
                                };
                                if seen.insert(next) {
                                    column.push(next);
                                }
                            }
                        }
                    }
                    Some(Sym::Terminal(_)) => {}
                    None => {
                        let done = rule.lhs;
                        let parents: Vec<Item> = if item.origin == position {
                            column[..].to_vec()
                        } else {
                            chart[item.origin].clone()
                        };
                        for parent in parents {
                            if self.rules[parent.rule].rhs.get(parent.dot) == Some(&Sym::Nonterminal(done)) {
                                let next = Item {
                                    dot: parent.dot + 1,
                                    ..parent
                                };
                                if seen.insert(next) {
                                    column.push(next);
                                }
                            }
                        }
                    }
                }
            }
            chart.push(column);
            if position == tokens.len() {
                break;
            }
            // scan
            let current = chart.last().unwrap();
            let mut next_column = Vec::new();
            seen = HashSet::new();
            for item in current {
                if let Some(Sym::Terminal(t)) = self.rules[item.rule].rhs.get(item.dot) {
                    if self.matches(*t, tokens[position]) {
                        let next = Item {
                            dot: item.dot + 1,
                            ..*item
                        };
                        if seen.insert(next) {
                            next_column.push(next);
                        }
                    }
                }
            }
            if next_column.is_empty() {
                return None;
            }
            column = next_column;
        }

        let last = chart.pop().unwrap();
        let complete = last.iter().any(|item| {
            item.origin == 0
                && item.dot == self.rules[item.rule].rhs.len()
                && self.start.contains(&self.rules[item.rule].lhs)
        });
        Some((last, complete))
    }

    /// True when the token sequence can be extended to a full sentence.
    pub fn is_viable_prefix(&self, tokens: &[(&str, NumberFeature)]) -> bool {
        self.run(tokens).is_some()
    }

    pub fn is_sentence(&self, tokens: &[(&str, NumberFeature)]) -> bool {
        self.run(tokens).is_some_and(|(_, complete)| complete)
    }

    /// Terminals that may follow the prefix; empty when it is not viable.
    pub fn next_terminals(&self, tokens: &[(&str, NumberFeature)]) -> BTreeSet<(String, Option<NumberFeature>)> {
        let Some((column, _)) = self.run(tokens) else {
            return BTreeSet::new();
        };
        column
            .iter()
            .filter_map(|item| match self.rules[item.rule].rhs.get(item.dot) {
                Some(Sym::Terminal(t)) => Some(self.terminals[*t].clone()),
                _ => None,
            })
            .collect()
    }

    /// Looks up the category and number of each token.
    pub fn categorize<'v>(vocab: &'v Vocabulary, ids: &[TokenId]) -> Vec<(&'v str, NumberFeature)> {
        ids.iter()
            .map(|&id| {
                let info = vocab.token(id);
                (info.category.as_str(), info.number)
            })
            .collect()
    }
}
