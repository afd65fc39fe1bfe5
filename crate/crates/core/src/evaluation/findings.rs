use serde::{Deserialize, Serialize};

use super::bootstrap::BootstrapConfig;
use super::records::EvalRecord;
use super::stats::{contrast, Contrast};
use crate::stimuli::{ConditionLabel, Design};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Outcome of one directional comparison on an ensemble's records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub id: String,
    pub description: String,
    /// Primary contrast; `None` when the records needed are missing.
    pub contrast: Option<Contrast>,
    pub pass: bool,
    pub detail: String,
}

fn select(records: &[EvalRecord], design: Design, keep: impl Fn(&ConditionLabel) -> bool) -> Vec<&EvalRecord> {
    records
        .iter()
        .filter(|r| r.design == design.id())
        .filter(|r| ConditionLabel::parse(design, &r.condition).is_ok_and(|c| keep(&c)))
        .collect()
}

fn rate(records: &[&EvalRecord]) -> f64 {
    records.iter().filter(|r| r.is_error).count() as f64 / records.len().max(1) as f64
}

struct Ctx<'a> {
    records: &'a [EvalRecord],
    config: &'a BootstrapConfig,
    alpha: f64,
}

impl Ctx<'_> {
    /// A directional finding: A's error exceeds B's (or, when `weak`, is
    /// at least B's) with the paired bootstrap p below alpha.
    fn directional(
        &self,
        id: &str,
        description: &str,
        design: Design,
        a: impl Fn(&ConditionLabel) -> bool,
        b: impl Fn(&ConditionLabel) -> bool,
        weak: bool,
    ) -> Finding {
        let (ra, rb) = (select(self.records, design, a), select(self.records, design, b));
        self.judge(id, description, &ra, &rb, weak)
    }

    fn judge(&self, id: &str, description: &str, a: &[&EvalRecord], b: &[&EvalRecord], weak: bool) -> Finding {
        match contrast(a, b, self.config) {
            Ok(c) => {
                let pass = if weak {
                    c.delta >= 0.0
                } else {
                    c.delta > 0.0 && c.p < self.alpha
                };
                Finding {
                    id: id.into(),
                    description: description.into(),
                    contrast: Some(c),
                    pass,
                    detail: format!("{:.4} vs {:.4}", rate(a), rate(b)),
                }
            }
            Err(e) => missing(id, description, &e.to_string()),
        }
    }
}

fn missing(id: &str, description: &str, why: &str) -> Finding {
    Finding {
        id: id.into(),
        description: description.into(),
        contrast: None,
        pass: false,
        detail: why.into(),
    }
}

/// The six directional comparisons between conditions of the four designs.
pub fn findings(records: &[EvalRecord], config: &BootstrapConfig, alpha: f64) -> Vec<Finding> {
    let cx = Ctx { records, config, alpha };
    let mut out = vec![
        cx.directional(
            "i",
            "attraction: mismatch error exceeds match error",
            Design::Exp1,
            |c| c.is("localMatch", "Mismatch"),
            |c| c.is("localMatch", "Match"),
            false,
        ),
        cx.directional(
            "ii",
            "number asymmetry: singular subject with plural attractor exceeds the reverse",
            Design::Exp1,
            |c| c.is("localMatch", "Mismatch") && c.is("subjectNumber", "Sing"),
            |c| c.is("localMatch", "Mismatch") && c.is("subjectNumber", "Plur"),
            false,
        ),
        cx.directional(
            "iii",
            "RC attractors cause more errors than PP attractors",
            Design::Exp1,
            |c| c.is("localMatch", "Mismatch") && c.is("modifier", "RC"),
            |c| c.is("localMatch", "Mismatch") && c.is("modifier", "PP"),
            false,
        ),
        cx.directional(
            "iv",
            "cumulativity: two plural attractors at least as harmful as one",
            Design::Exp2,
            |c| c.is("n1", "Plur") && c.is("n2", "Plur"),
            |c| c.is("n1", "Plur") && c.is("n2", "Sing"),
            true,
        ),
    ];
    let reversed = select(records, Design::Exp2Reversed, |_| true);
    let original = select(records, Design::Exp2, |_| true);
    let mut rev = cx.judge(
        "v",
        "reversed materials (PP before RC) cause more errors than the originals",
        &reversed,
        &original,
        false,
    );
    if rev.contrast.is_some() {
        let ratio = rate(&reversed) / rate(&original);
        rev.detail = format!("{}; ratio {ratio:.2}", rev.detail);
    }
    out.push(rev);
    out.push(rc_length(&cx));
    out
}

fn rc_length(cx: &Ctx<'_>) -> Finding {
    const ID: &str = "vi";
    const DESCRIPTION: &str =
        "RC length: outside-RC error falls from Short to Long, inside-RC error rises from Short to Long";
    let cell = |site: &str, len: &str| {
        select(cx.records, Design::RcLengthProbe, |c| {
            c.is("probeSite", site) && c.is("rcLength", len)
        })
    };
    let [os, om, ol] = ["Short", "Medium", "Long"].map(|l| cell("OutsideRC", l));
    let (is, il) = (cell("InsideRC", "Short"), cell("InsideRC", "Long"));
    let outside = match contrast(&os, &ol, cx.config) {
        Ok(c) => c,
        Err(e) => return missing(ID, DESCRIPTION, &e.to_string()),
    };
    let inside = match contrast(&il, &is, cx.config) {
        Ok(c) => c,
        Err(e) => return missing(ID, DESCRIPTION, &e.to_string()),
    };
    let (s, m, l) = (rate(&os), rate(&om), rate(&ol));
    let ordered = s > m && m > l;
    let pass = ordered && outside.p < cx.alpha && inside.delta > 0.0 && inside.p < cx.alpha;
    Finding {
        id: ID.into(),
        description: DESCRIPTION.into(),
        contrast: Some(outside),
        pass,
        detail: format!(
            "outside {s:.4} > {m:.4} > {l:.4} ({ordered}); inside long-short {:.4} p={:.4}",
            inside.delta, inside.p
        ),
    }
}
