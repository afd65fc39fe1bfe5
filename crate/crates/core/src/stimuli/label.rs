use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The experimental designs the stimulus factories produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Design {
    Exp1,
    Exp2,
    Exp2Reversed,
    RcLengthProbe,
}

impl Design {
    pub const ALL: [Design; 4] = [Design::Exp1, Design::Exp2, Design::Exp2Reversed, Design::RcLengthProbe];

    pub fn id(self) -> &'static str {
        match self {
            Design::Exp1 => "exp1",
            Design::Exp2 => "exp2",
            Design::Exp2Reversed => "exp2rev",
            Design::RcLengthProbe => "rcprobe",
        }
    }

    /// Factor names and their levels, in display order.
    pub fn factors(self) -> &'static [(&'static str, &'static [&'static str])] {
        match self {
            Design::Exp1 => &[
                ("modifier", &["PP", "RC"]),
                ("subjectNumber", &["Sing", "Plur"]),
                ("localMatch", &["Match", "Mismatch"]),
            ],
            Design::Exp2 | Design::Exp2Reversed => &[("n1", &["Absent", "Sing", "Plur"]), ("n2", &["Sing", "Plur"])],
            Design::RcLengthProbe => &[
                ("rcLength", &["Short", "Medium", "Long"]),
                ("probeSite", &["InsideRC", "OutsideRC"]),
            ],
        }
    }

    /// Every condition of the factorial frame, first factor varying slowest.
    pub fn conditions(self) -> Vec<ConditionLabel> {
        let mut out = vec![Vec::new()];
        for (_, levels) in self.factors() {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<&str>| {
                    levels.iter().map(move |l| {
                        let mut next = prefix.clone();
                        next.push(l);
                        next
                    })
                })
                .collect();
        }
        out.into_iter()
            .map(|levels| {
                let factors = self
                    .factors()
                    .iter()
                    .zip(levels)
                    .map(|((f, _), l)| (f.to_string(), l.to_string()))
                    .collect();
                ConditionLabel { design: self, factors }
            })
            .collect()
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Design::ALL
            .into_iter()
            .find(|d| d.id() == s)
            .ok_or_else(|| Error::Input(format!("unknown design `{s}`")))
    }
}

/// A cell of a design's factorial frame.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConditionLabel {
    pub design: Design,
    pub factors: BTreeMap<String, String>,
}

impl ConditionLabel {
    pub fn new(design: Design, levels: &[(&str, &str)]) -> Result<Self> {
        let label = ConditionLabel {
            design,
            factors: levels.iter().map(|(f, l)| (f.to_string(), l.to_string())).collect(),
        };
        label.check()?;
        Ok(label)
    }

    /// Parses the `factor=level;factor=level` form.
    pub fn parse(design: Design, text: &str) -> Result<Self> {
        let mut factors = BTreeMap::new();
        for part in text.split(';').filter(|p| !p.is_empty()) {
            let (f, l) = part
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("condition part `{part}` lacks `=`")))?;
            if factors.insert(f.to_string(), l.to_string()).is_some() {
                return Err(Error::Input(format!("factor `{f}` repeated")));
            }
        }
        let label = ConditionLabel { design, factors };
        label.check()?;
        Ok(label)
    }

    /// Rejects labels whose factors are not exactly the design's frame.
    pub fn check(&self) -> Result<()> {
        let frame = self.design.factors();
        if self.factors.len() != frame.len() {
            return Err(Error::Input(format!(
                "condition `{self}` does not match the {} frame",
                self.design
            )));
        }
        for (factor, levels) in frame {
            match self.factors.get(*factor) {
                Some(l) if levels.contains(&l.as_str()) => {}
                _ => return Err(Error::Input(format!("condition `{self}` needs {factor} in {levels:?}"))),
            }
        }
        Ok(())
    }

    pub fn get(&self, factor: &str) -> Option<&str> {
        self.factors.get(factor).map(String::as_str)
    }

    pub fn is(&self, factor: &str, level: &str) -> bool {
        self.get(factor) == Some(level)
    }
}

impl fmt::Display for ConditionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (factor, _) in self.design.factors() {
            if let Some(level) = self.factors.get(*factor) {
                if !first {
                    f.write_str(";")?;
                }
                write!(f, "{factor}={level}")?;
                first = false;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_counts() {
        assert_eq!(Design::Exp1.conditions().len(), 8);
        assert_eq!(Design::Exp2.conditions().len(), 6);
        assert_eq!(Design::Exp2Reversed.conditions().len(), 6);
        assert_eq!(Design::RcLengthProbe.conditions().len(), 6);
    }

    #[test]
    fn label_round_trip() {
        for design in Design::ALL {
            assert_eq!(design.id().parse::<Design>().unwrap(), design);
            for c in design.conditions() {
                assert_eq!(ConditionLabel::parse(design, &c.to_string()).unwrap(), c);
            }
        }
        let c = &Design::Exp1.conditions()[1];
        assert_eq!(c.to_string(), "modifier=PP;subjectNumber=Sing;localMatch=Mismatch");
    }

    #[test]
    fn extra_or_missing_factors_rejected() {
        assert!(ConditionLabel::parse(Design::Exp2, "n1=Sing").is_err());
        assert!(ConditionLabel::parse(Design::Exp2, "n1=Sing;n2=Sing;modifier=PP").is_err());
        assert!(ConditionLabel::parse(Design::Exp2, "n1=Sing;n2=Many").is_err());
    }
}
