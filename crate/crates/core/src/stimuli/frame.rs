use std::collections::BTreeMap;

use crate::corpus::NumberFeature;
use crate::error::{Error, Result};

/// Lexical fillers for one item. Slots hold space-separated words; noun
/// slots hold a `singular/plural` pair.
///
/// Frames files have one frame per line: an id followed by TAB-separated
/// `slot=value` fields. Blank lines and `#` comments are skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemFrame {
    pub id: String,
    pub slots: BTreeMap<String, String>,
}

impl ItemFrame {
    pub fn new(id: &str, slots: &[(&str, &str)]) -> Self {
        ItemFrame {
            id: id.to_string(),
            slots: slots.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    fn missing(&self, slot: &str) -> Error {
        Error::Frame {
            id: self.id.clone(),
            reason: format!("missing slot `{slot}`"),
        }
    }

    /// Words of an optional slot; empty when absent.
    pub fn words(&self, slot: &str) -> Vec<String> {
        self.slots
            .get(slot)
            .map(|v| v.split_whitespace().map(str::to_string).collect())
            .unwrap_or_default()
    }

    /// Words of a slot that must be present and non-empty.
    pub fn required(&self, slot: &str) -> Result<Vec<String>> {
        let words = self.words(slot);
        if words.is_empty() {
            return Err(self.missing(slot));
        }
        Ok(words)
    }

    /// The form of a `singular/plural` noun slot.
    pub fn noun(&self, slot: &str, number: NumberFeature) -> Result<String> {
        let value = self.slots.get(slot).ok_or_else(|| self.missing(slot))?;
        let (sing, plur) = value.split_once('/').ok_or_else(|| Error::Frame {
            id: self.id.clone(),
            reason: format!("slot `{slot}` must be a singular/plural pair"),
        })?;
        let form = match number {
            NumberFeature::Plural => plur,
            _ => sing,
        }
        .trim();
        if form.is_empty() || form.contains(char::is_whitespace) {
            return Err(Error::Frame {
                id: self.id.clone(),
                reason: format!("slot `{slot}` needs one word per number"),
            });
        }
        Ok(form.to_string())
    }

    /// Every word the frame can contribute to a stimulus.
    pub fn vocabulary(&self) -> Vec<String> {
        self.slots
            .values()
            .flat_map(|v| v.split(|c: char| c == '/' || c.is_whitespace()))
            .filter(|w| !w.is_empty())
            .map(str::to_string)
            .collect()
    }
}

pub fn parse_frames(text: &str) -> Result<Vec<ItemFrame>> {
    let mut frames: Vec<ItemFrame> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let id = fields.next().unwrap_or("").trim();
        if id.is_empty() || id.contains('=') {
            return Err(Error::parse(i + 1, "frame line must start with an id"));
        }
        if frames.iter().any(|f| f.id == id) {
            return Err(Error::parse(i + 1, format!("duplicate frame id `{id}`")));
        }
        let mut slots = BTreeMap::new();
        for field in fields.filter(|f| !f.trim().is_empty()) {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("field `{field}` is not slot=value")))?;
            let k = k.trim();
            if slots.insert(k.to_string(), v.trim().to_lowercase()).is_some() {
                return Err(Error::parse(i + 1, format!("slot `{k}` repeated")));
            }
        }
        frames.push(ItemFrame {
            id: id.to_string(),
            slots,
        });
    }
    Ok(frames)
}

pub fn export_frames(frames: &[ItemFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        out.push_str(&f.id);
        for (k, v) in &f.slots {
            out.push('\t');
            out.push_str(k);
            out.push('=');
            out.push_str(v);
        }
        out.push('\n');
    }
    out
}
