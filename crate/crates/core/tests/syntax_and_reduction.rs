mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{any_sequent, ipl_formula, ipl_goal, state};
use reductive::lang::{parse_formula, parse_sequent, render, Formula, Sequent};
use reductive::reduction::{applicable_bindings, destruct, step_interleave, State, Status};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn formulas_round_trip(f in ipl_formula(5)) {
        prop_assert_eq!(parse_formula(&render(&f)).unwrap(), f);
    }

    #[test]
    fn sequents_round_trip(s in any_sequent()) {
        prop_assert_eq!(parse_sequent(&render(&s)).unwrap(), s.clone());
        prop_assert_eq!(Sequent::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn parser_is_total(text in "[pq()|,>/\\\\TF* -]{0,24}") {
        match parse_sequent(&text) {
            Ok(s) => prop_assert_eq!(parse_sequent(&render(&s)).unwrap(), s),
            Err(e) => {
                if let Some(pos) = e.position() {
                    prop_assert!(pos <= text.len());
                }
            }
        }
        if let Ok(f) = parse_formula(&text) {
            prop_assert_eq!(parse_formula(&render(&f)).unwrap(), f);
        }
    }

    #[test]
    fn destruct_matches_interleaving_on_singletons(g in ipl_goal(7)) {
        let single = State::singleton(g.clone());
        let via_bindings: BTreeSet<BTreeSet<_>> = applicable_bindings(&single)
            .iter()
            .map(|b| step_interleave(&single, b).expect("reported bindings apply").0.into_iter().collect())
            .collect();
        prop_assert_eq!(destruct(&g), via_bindings);
    }

    #[test]
    fn reported_bindings_apply_and_terminals_classify(s in state(3, 6)) {
        let bindings = applicable_bindings(&s);
        for b in &bindings {
            prop_assert!(b.valid_for(&s));
            let next = step_interleave(&s, b);
            prop_assert!(next.is_ok());
            let subgoals = b.operator.apply(&s.0[b.goal]).unwrap().len();
            prop_assert_eq!(next.unwrap().len() + 1, s.len() + subgoals);
        }
        let expected = if s.is_box() {
            Status::ClosedT1
        } else if bindings.is_empty() {
            Status::StuckT2
        } else {
            Status::Open
        };
        prop_assert_eq!(Status::of(&s), expected);
    }
}

#[test]
fn mixed_fragments_are_rejected_with_context() {
    assert!(parse_sequent("p * q |- p -> q").is_err());
    let err = parse_sequent("p |- (q").unwrap_err();
    assert_eq!(err.position(), Some(7));
    assert!(parse_formula("p /\\ (q * r)").is_ok());
    assert_eq!(Formula::star(Formula::atom("p"), Formula::atom("q")).size(), 1);
}
