use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of retained word forms in the shipped configuration.
pub const DEFAULT_CUTOFF: usize = 50_000;

/// Surface of the catch-all token used for forms absent from the lexicon.
pub const UNKNOWN_SURFACE: &str = "<unk>";

/// Grammatical number. Nouns and present-tense verbs are marked, every other
/// word class is [`NumberFeature::Unmarked`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NumberFeature {
    Singular,
    Plural,
    Unmarked,
}

impl NumberFeature {
    /// One-letter code used by every text format (`S`, `P`, `-`).
    pub fn code(self) -> &'static str {
        match self {
            NumberFeature::Singular => "S",
            NumberFeature::Plural => "P",
            NumberFeature::Unmarked => "-",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "S" => Some(NumberFeature::Singular),
            "P" => Some(NumberFeature::Plural),
            "-" => Some(NumberFeature::Unmarked),
            _ => None,
        }
    }

    pub fn is_marked(self) -> bool {
        self != NumberFeature::Unmarked
    }

    /// The opposite number; unmarked stays unmarked.
    pub fn opposite(self) -> Self {
        match self {
            NumberFeature::Singular => NumberFeature::Plural,
            NumberFeature::Plural => NumberFeature::Singular,
            NumberFeature::Unmarked => NumberFeature::Unmarked,
        }
    }
}

impl fmt::Display for NumberFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexEntry {
    pub surface: String,
    pub category: String,
    pub number: NumberFeature,
    pub frequency_rank: u32,
}

/// Parses the tab-separated lexicon format
/// `surface<TAB>category<TAB>S|P|-<TAB>rank`. Blank lines and `#` comments
/// are skipped.
pub fn parse_lexicon(text: &str) -> Result<Vec<LexEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let surface = fields[0].trim();
        let category = fields[1].trim();
        if surface.is_empty() || category.is_empty() {
            return Err(Error::parse(line_no, "empty surface or category"));
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(Error::parse(
                line_no,
                format!("surface `{surface}` contains whitespace"),
            ));
        }
        let number = NumberFeature::from_code(fields[2].trim())
            .ok_or_else(|| Error::parse(line_no, format!("bad number code `{}`", fields[2])))?;
        let frequency_rank: u32 = fields[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad frequency rank `{}`", fields[3])))?;
        if frequency_rank == 0 {
            return Err(Error::parse(line_no, "frequency rank must be positive"));
        }
        entries.push(LexEntry {
            surface: surface.to_string(),
            category: category.to_string(),
            number,
            frequency_rank,
        });
    }
    Ok(entries)
}

/// Dense token identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenId(pub u32);

impl TokenId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenInfo {
    pub surface: String,
    pub category: String,
    pub number: NumberFeature,
    pub placeholder: bool,
}

/// Token inventory of a model.
///
/// Id 0 is the unknown-word token, followed by one part-of-speech
/// placeholder per lexicon category (sorted by category name), followed by
/// the retained entries in rank order. Forms ranked beyond the cutoff map to
/// the placeholder of their category.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<LexEntry>,
    tokens: Vec<TokenInfo>,
    id_of: HashMap<String, TokenId>,
    placeholder_of: HashMap<String, TokenId>,
    cutoff: usize,
    noun_categories: BTreeSet<String>,
}

/// Builds a vocabulary that retains the `cutoff` most frequent forms.
pub fn build_vocabulary(entries: &[LexEntry], cutoff: usize) -> Result<Vocabulary> {
    Vocabulary::build(entries, cutoff, ["N"])
}

impl Vocabulary {
    pub fn build<I, S>(entries: &[LexEntry], cutoff: usize, noun_categories: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if cutoff == 0 {
            return Err(Error::Input("vocabulary cutoff must be at least 1".into()));
        }

        // Identical duplicates collapse onto the best rank; anything else is a conflict.
        let mut unique: Vec<LexEntry> = Vec::with_capacity(entries.len());
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for entry in entries {
            match seen.get(entry.surface.as_str()) {
                Some(&at) => {
                    let prior = &mut unique[at];
                    if prior.category != entry.category || prior.number != entry.number {
                        return Err(Error::DuplicateSurface(entry.surface.clone()));
                    }
                    prior.frequency_rank = prior.frequency_rank.min(entry.frequency_rank);
                }
                None => {
                    seen.insert(&entry.surface, unique.len());
                    unique.push(entry.clone());
                }
            }
        }

        let mut order: Vec<usize> = (0..unique.len()).collect();
        order.sort_by_key(|&i| (unique[i].frequency_rank, i));

        let categories: BTreeSet<&str> = unique.iter().map(|e| e.category.as_str()).collect();

        let mut tokens = vec![TokenInfo {
            surface: UNKNOWN_SURFACE.to_string(),
            category: "UNK".to_string(),
            number: NumberFeature::Unmarked,
            placeholder: true,
        }];
        let mut id_of = HashMap::new();
        let mut placeholder_of = HashMap::new();
        id_of.insert(UNKNOWN_SURFACE.to_string(), TokenId(0));
        for category in &categories {
            let id = TokenId(tokens.len() as u32);
            let surface = format!("<{}>", category.to_lowercase());
            tokens.push(TokenInfo {
                surface: surface.clone(),
                category: category.to_string(),
                number: NumberFeature::Unmarked,
                placeholder: true,
            });
            id_of.insert(surface, id);
            placeholder_of.insert(category.to_string(), id);
        }
        for (position, &i) in order.iter().enumerate() {
            let entry = &unique[i];
            let id = if position < cutoff {
                let id = TokenId(tokens.len() as u32);
                tokens.push(TokenInfo {
                    surface: entry.surface.clone(),
                    category: entry.category.clone(),
                    number: entry.number,
                    placeholder: false,
                });
                id
            } else {
                placeholder_of[&entry.category]
            };
            id_of.insert(entry.surface.clone(), id);
        }

        Ok(Vocabulary {
            entries: order.into_iter().map(|i| unique[i].clone()).collect(),
            tokens,
            id_of,
            placeholder_of,
            cutoff,
            noun_categories: noun_categories.into_iter().map(Into::into).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Lexicon entries sorted by frequency rank (file order breaks ties).
    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn token(&self, id: TokenId) -> &TokenInfo {
        &self.tokens[id.index()]
    }

    pub fn tokens(&self) -> &[TokenInfo] {
        &self.tokens
    }

    /// Id of a surface form; rare forms resolve to their placeholder.
    pub fn id(&self, surface: &str) -> Option<TokenId> {
        self.id_of.get(surface).copied()
    }

    /// Like [`Vocabulary::id`] but falls back to the unknown-word token.
    pub fn id_or_unknown(&self, surface: &str) -> TokenId {
        self.id(surface).unwrap_or(TokenId(0))
    }

    pub fn placeholder(&self, category: &str) -> Option<TokenId> {
        self.placeholder_of.get(category).copied()
    }

    pub fn surface(&self, id: TokenId) -> &str {
        &self.tokens[id.index()].surface
    }

    pub fn number(&self, id: TokenId) -> NumberFeature {
        self.tokens[id.index()].number
    }

    pub fn is_noun_category(&self, category: &str) -> bool {
        self.noun_categories.contains(category)
    }

    /// True for retained nouns that carry a number feature.
    pub fn is_noun(&self, id: TokenId) -> bool {
        let info = &self.tokens[id.index()];
        info.number.is_marked() && self.noun_categories.contains(&info.category)
    }

    /// True when the surface is retained as its own token.
    pub fn is_retained(&self, surface: &str) -> bool {
        self.id(surface).is_some_and(|id| !self.tokens[id.index()].placeholder)
    }

    /// Order-sensitive fingerprint of the token inventory (FNV-1a).
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for token in &self.tokens {
            for byte in token
                .surface
                .bytes()
                .chain(std::iter::once(0))
                .chain(token.category.bytes())
                .chain(token.number.code().bytes())
                .chain(std::iter::once(0xff))
            {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        }
        hash
    }
}
