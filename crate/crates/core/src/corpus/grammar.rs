//! Weighted context-free grammar with number-agreement variables.
//!
//! Grammar files are line oriented. Settings are `key = value` lines and
//! productions are `LHS -> RHS... @ weight`. A symbol may carry one number
//! variable, written `NP[n]`. A variable that also appears on the left-hand
//! side is inherited; any other variable is fresh and receives its own
//! number when the production is used. Symbols without productions are
//! terminals and name lexicon categories.
//!
//! ```text
//! start = S
//! singular_rate = 0.68
//! S -> NP[s] VP[s] @ 1.0
//! NP[n] -> DET N[n] @ 0.7
//! NP[n] -> DET N[n] PP @ 0.3
//! PP -> P NP[a] @ 1.0
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub var: Option<String>,
}

impl Symbol {
    fn parse(text: &str, line: usize) -> Result<Self> {
        let (name, var) = match text.find('[') {
            Some(open) => {
                if !text.ends_with(']') {
                    return Err(Error::parse(line, format!("unterminated variable in `{text}`")));
                }
                let var = &text[open + 1..text.len() - 1];
                if var.is_empty()
                    || !var
                        .chars()
                        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
                {
                    return Err(Error::parse(line, format!("bad variable name in `{text}`")));
                }
                (&text[..open], Some(var.to_string()))
            }
            None => (text, None),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::parse(line, format!("bad symbol `{text}`")));
        }
        Ok(Symbol {
            name: name.to_string(),
            var,
        })
    }
}

impl std::fmt::Display for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.var {
            Some(v) => write!(f, "{}[{}]", self.name, v),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    pub lhs: Symbol,
    pub rhs: Vec<Symbol>,
    pub weight: f64,
}

impl Production {
    /// Variables introduced by this production, in order of first use.
    pub fn fresh_vars(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for sym in &self.rhs {
            if let Some(v) = &sym.var {
                if self.lhs.var.as_deref() != Some(v.as_str()) && !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GrammarSpec {
    pub start: String,
    pub productions: Vec<Production>,
    /// Probability that a fresh variable is singular.
    pub singular_rate: f64,
    /// Per-variable-name overrides of `singular_rate`.
    pub variable_rates: BTreeMap<String, f64>,
    pub depth_limit: usize,
    /// When false, agreeing terminals draw their number independently of
    /// their controller.
    pub number_agreement: bool,
    /// Lexical choice within a category is proportional to `rank^-zipf_exponent`.
    pub zipf_exponent: f64,
    by_lhs: BTreeMap<String, Vec<usize>>,
}

pub const DEFAULT_DEPTH_LIMIT: usize = 20;
pub const DEFAULT_SINGULAR_RATE: f64 = 0.68;

impl GrammarSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut start = None;
        let mut singular_rate = DEFAULT_SINGULAR_RATE;
        let mut variable_rates = BTreeMap::new();
        let mut depth_limit = DEFAULT_DEPTH_LIMIT;
        let mut number_agreement = true;
        let mut zipf_exponent = 0.0;
        let mut productions = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(at) => &raw[..at],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some((lhs, rest)) = line.split_once("->") {
                let (rhs, weight) = rest
                    .rsplit_once('@')
                    .ok_or_else(|| Error::parse(line_no, "production is missing `@ weight`"))?;
                let weight: f64 = weight
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad weight `{}`", weight.trim())))?;
                if !(weight.is_finite() && weight > 0.0) {
                    return Err(Error::parse(line_no, "weights must be positive"));
                }
                let lhs = Symbol::parse(lhs.trim(), line_no)?;
                let rhs = rhs
                    .split_whitespace()
                    .map(|s| Symbol::parse(s, line_no))
                    .collect::<Result<Vec<_>>>()?;
                if rhs.is_empty() {
                    return Err(Error::parse(line_no, "empty right-hand side"));
                }
                productions.push(Production { lhs, rhs, weight });
            } else if let Some((key, value)) = line.split_once('=') {
                let key = key.trim();
                let value = value.trim();
                let bad = || Error::parse(line_no, format!("bad value `{value}` for `{key}`"));
                match key {
                    "start" => start = Some(value.to_string()),
                    "depth_limit" => depth_limit = value.parse().map_err(|_| bad())?,
                    "singular_rate" => singular_rate = parse_rate(value).ok_or_else(bad)?,
                    "agreement" => number_agreement = value.parse().map_err(|_| bad())?,
                    "zipf_exponent" => zipf_exponent = value.parse().map_err(|_| bad())?,
                    _ => match key.strip_prefix("singular_rate.") {
                        Some(var) => {
                            variable_rates.insert(var.to_string(), parse_rate(value).ok_or_else(bad)?);
                        }
                        None => return Err(Error::parse(line_no, format!("unknown setting `{key}`"))),
                    },
                }
            } else {
                return Err(Error::parse(line_no, "expected `key = value` or a production"));
            }
        }

        let start = match start {
            Some(s) => s,
            None => productions
                .first()
                .map(|p| p.lhs.name.clone())
                .ok_or_else(|| Error::Grammar("no productions".into()))?,
        };
        let spec = GrammarSpec::new(
            start,
            productions,
            singular_rate,
            variable_rates,
            depth_limit,
            number_agreement,
            zipf_exponent,
        )?;
        Ok(spec)
    }

    pub fn new(
        start: String,
        productions: Vec<Production>,
        singular_rate: f64,
        variable_rates: BTreeMap<String, f64>,
        depth_limit: usize,
        number_agreement: bool,
        zipf_exponent: f64,
    ) -> Result<Self> {
        let mut by_lhs: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, p) in productions.iter().enumerate() {
            by_lhs.entry(p.lhs.name.clone()).or_default().push(i);
        }
        let spec = GrammarSpec {
            start,
            productions,
            singular_rate,
            variable_rates,
            depth_limit,
            number_agreement,
            zipf_exponent,
            by_lhs,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !self.by_lhs.contains_key(&self.start) {
            return Err(Error::Grammar(format!(
                "start symbol `{}` has no productions",
                self.start
            )));
        }
        if self.depth_limit == 0 {
            return Err(Error::Grammar("depth_limit must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.singular_rate) {
            return Err(Error::Grammar("singular_rate must lie in [0, 1]".into()));
        }
        for (lhs, ids) in &self.by_lhs {
            let total: f64 = ids.iter().map(|&i| self.productions[i].weight).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Grammar(format!("weights of `{lhs}` sum to {total}, expected 1")));
            }
            let parameterized = self.productions[ids[0]].lhs.var.is_some();
            if ids
                .iter()
                .any(|&i| self.productions[i].lhs.var.is_some() != parameterized)
            {
                return Err(Error::Grammar(format!(
                    "`{lhs}` is used both with and without a number variable"
                )));
            }
        }
        for p in &self.productions {
            for sym in &p.rhs {
                if let Some(ids) = self.by_lhs.get(&sym.name) {
                    let parameterized = self.productions[ids[0]].lhs.var.is_some();
                    if parameterized != sym.var.is_some() {
                        return Err(Error::Grammar(format!(
                            "`{}` in `{} -> ...` must {}carry a number variable",
                            sym,
                            p.lhs,
                            if parameterized { "" } else { "not " }
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_nonterminal(&self, name: &str) -> bool {
        self.by_lhs.contains_key(name)
    }

    pub fn is_parameterized(&self, nonterminal: &str) -> bool {
        self.by_lhs
            .get(nonterminal)
            .is_some_and(|ids| self.productions[ids[0]].lhs.var.is_some())
    }

    /// Indices of the alternatives of a nonterminal.
    pub fn alternatives(&self, nonterminal: &str) -> &[usize] {
        self.by_lhs.get(nonterminal).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = &str> {
        self.by_lhs.keys().map(String::as_str)
    }

    /// Terminal symbols with whether they carry an agreement variable.
    pub fn terminals(&self) -> BTreeSet<(String, bool)> {
        self.productions
            .iter()
            .flat_map(|p| p.rhs.iter())
            .filter(|s| !self.is_nonterminal(&s.name))
            .map(|s| (s.name.clone(), s.var.is_some()))
            .collect()
    }

    pub fn rate_for(&self, var: &str) -> f64 {
        self.variable_rates.get(var).copied().unwrap_or(self.singular_rate)
    }

    /// Minimum derivation depth of every nonterminal; `None` when a
    /// nonterminal cannot derive a terminal string at all.
    pub fn min_depths(&self) -> BTreeMap<String, Option<usize>> {
        let mut depth: BTreeMap<String, Option<usize>> = self.by_lhs.keys().map(|k| (k.clone(), None)).collect();
        loop {
            let mut changed = false;
            for p in &self.productions {
                let mut worst = 0usize;
                let mut ok = true;
                for sym in &p.rhs {
                    if self.is_nonterminal(&sym.name) {
                        match depth[&sym.name] {
                            Some(d) => worst = worst.max(d),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                }
                if ok {
                    let candidate = worst + 1;
                    let slot = depth.get_mut(&p.lhs.name).unwrap();
                    if slot.is_none_or(|d| candidate < d) {
                        *slot = Some(candidate);
                        changed = true;
                    }
                }
            }
            if !changed {
                return depth;
            }
        }
    }

    /// Fails with the name of a nonterminal that cannot finish within the
    /// depth limit.
    pub fn check_termination(&self) -> Result<()> {
        let depths = self.min_depths();
        let mut reachable = BTreeSet::new();
        let mut stack = vec![self.start.clone()];
        while let Some(name) = stack.pop() {
            if !reachable.insert(name.clone()) {
                continue;
            }
            for &i in self.alternatives(&name) {
                for sym in &self.productions[i].rhs {
                    if self.is_nonterminal(&sym.name) {
                        stack.push(sym.name.clone());
                    }
                }
            }
        }
        for name in &reachable {
            if depths[name].is_none() {
                return Err(Error::NoTermination {
                    nonterminal: name.clone(),
                    depth: self.depth_limit,
                });
            }
        }
        if depths[&self.start].is_some_and(|d| d > self.depth_limit) {
            return Err(Error::NoTermination {
                nonterminal: self.start.clone(),
                depth: self.depth_limit,
            });
        }
        Ok(())
    }
}

fn parse_rate(value: &str) -> Option<f64> {
    value.parse::<f64>().ok().filter(|r| (0.0..=1.0).contains(r))
}
