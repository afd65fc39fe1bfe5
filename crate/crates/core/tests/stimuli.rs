mod common;

use std::collections::BTreeMap;

use agreement_core::corpus::Recognizer;
use agreement_core::stimuli::{annotate_attractors, check_stimuli, generate, parse_frames, Design, StimulusSet};

fn shipped(design: Design) -> StimulusSet {
    let file = match design {
        Design::Exp1 => "frames_exp1.tsv",
        Design::Exp2 | Design::Exp2Reversed => "frames_exp2.tsv",
        Design::RcLengthProbe => "frames_rcprobe.tsv",
    };
    generate(design, &parse_frames(&common::read(file)).unwrap()).unwrap()
}

#[test]
fn shipped_frames_give_complete_sets() {
    for (design, rows) in [
        (Design::Exp1, 256),
        (Design::Exp2, 216),
        (Design::Exp2Reversed, 216),
        (Design::RcLengthProbe, 192),
    ] {
        let set = shipped(design);
        assert_eq!(set.len(), rows, "{design}");
        set.check_complete().unwrap();
        assert_eq!(StimulusSet::parse(&set.to_tsv()).unwrap(), set);
    }
}

#[test]
fn shipped_stimuli_are_licensed_by_the_grammar() {
    let vocab = common::shipped_vocab();
    let recognizer = Recognizer::new(&common::shipped_grammar());
    for design in Design::ALL {
        let problems = check_stimuli(&shipped(design), &recognizer, &vocab);
        assert!(problems.is_empty(), "{design}: {problems:?}");
    }
}

#[test]
fn shipped_attractor_counts() {
    let vocab = common::shipped_vocab();
    for s in &shipped(Design::Exp1).stimuli {
        let k = annotate_attractors(&s.to_preamble(&vocab).unwrap()).count();
        let expected = usize::from(s.condition.is("localMatch", "Mismatch"));
        assert_eq!(k, expected, "{} {}", s.item_id, s.condition);
    }
    for design in [Design::Exp2, Design::Exp2Reversed] {
        for s in &shipped(design).stimuli {
            if s.condition.is("n1", "Plur") && s.condition.is("n2", "Plur") {
                assert_eq!(annotate_attractors(&s.to_preamble(&vocab).unwrap()).count(), 2);
            }
        }
    }
}

#[test]
fn reversal_keeps_noun_numbers() {
    let vocab = common::shipped_vocab();
    let multiset = |set: &StimulusSet| -> BTreeMap<(String, String), Vec<_>> {
        set.stimuli
            .iter()
            .map(|s| {
                let p = s.to_preamble(&vocab).unwrap();
                let mut numbers: Vec<_> = p.noun_positions.iter().map(|&(_, n)| n).collect();
                numbers.sort();
                ((s.item_id.clone(), s.condition.to_string()), numbers)
            })
            .collect()
    };
    let original = multiset(&shipped(Design::Exp2));
    let reversed = multiset(&shipped(Design::Exp2Reversed));
    assert_eq!(original.len(), reversed.len());
    for ((item, cond), numbers) in &original {
        assert_eq!(
            Some(numbers),
            reversed.get(&(item.clone(), cond.clone())),
            "{item} {cond}"
        );
    }
}
