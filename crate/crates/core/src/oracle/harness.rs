use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::rules::{forward_rules, instances_concluding, is_instance, ForwardRule};
use super::Oracle;
use crate::control::{search, LoopCheck, SearchOutcome, SearchStatus, Strategy, Traversal};
use crate::lang::{render, Goal};
use crate::reduction::reductions;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub sequent: String,
    pub engine_verdict: String,
    pub oracle_verdict: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarnessReport {
    pub checked: usize,
    pub failures: Vec<Disagreement>,
    pub passed: bool,
}

impl HarnessReport {
    fn from_failures(checked: usize, failures: Vec<Disagreement>) -> Self {
        HarnessReport {
            checked,
            passed: failures.is_empty(),
            failures,
        }
    }
}

/// Loop-pruned iterative deepening up to `depth_budget`.
pub fn harness_strategy(depth_budget: usize) -> Strategy {
    Strategy::new(Traversal::IterativeDeepening, LoopCheck::BranchRepeat, depth_budget)
}

pub fn engine_proves(goal: &Goal, depth_budget: usize) -> SearchOutcome {
    search(goal, &harness_strategy(depth_budget))
}

fn describe(out: &SearchOutcome) -> String {
    match out.status {
        SearchStatus::Proved => "reached □".to_string(),
        other => format!("{other} (deepest frontier {})", out.deepest),
    }
}

fn sweep(corpus: &[Goal], check: impl Fn(&Goal) -> Option<Disagreement> + Sync + Send) -> HarnessReport {
    let failures: Vec<Disagreement> = corpus.par_iter().filter_map(&check).collect();
    HarnessReport::from_failures(corpus.len(), failures)
}

fn oracle_valid(goal: &Goal) -> Result<bool, String> {
    Oracle::new().valid(goal).map_err(|e| e.to_string())
}

/// Whenever search reaches `□`, the oracle must find the goal valid.
pub fn check_soundness(corpus: &[Goal], depth_budget: usize) -> HarnessReport {
    sweep(corpus, |g| {
        let out = engine_proves(g, depth_budget);
        if out.status != SearchStatus::Proved {
            return None;
        }
        match oracle_valid(g) {
            Ok(true) => None,
            Ok(false) => Some("invalid".to_string()),
            Err(e) => Some(e),
        }
        .map(|oracle_verdict| Disagreement {
            sequent: render(g),
            engine_verdict: describe(&out),
            oracle_verdict,
        })
    })
}

/// Whenever the oracle finds a goal valid, search must reach `□`.
pub fn check_completeness(corpus: &[Goal], depth_budget: usize) -> HarnessReport {
    sweep(corpus, |g| {
        match oracle_valid(g) {
            Ok(false) => return None,
            Ok(true) => {}
            Err(e) => {
                return Some(Disagreement {
                    sequent: render(g),
                    engine_verdict: "not run".into(),
                    oracle_verdict: e,
                })
            }
        }
        let out = engine_proves(g, depth_budget);
        (out.status != SearchStatus::Proved).then(|| Disagreement {
            sequent: render(g),
            engine_verdict: describe(&out),
            oracle_verdict: "valid".into(),
        })
    })
}

/// A source of operator applications: labelled premiss lists for a goal.
pub type OperatorSource<'a> = dyn Fn(&Goal) -> Vec<(String, Vec<Goal>)> + Sync + 'a;

fn red_source(goal: &Goal) -> Vec<(String, Vec<Goal>)> {
    reductions(goal)
        .into_iter()
        .map(|(op, subs)| (op.to_string(), subs))
        .collect()
}

fn show(goals: &[Goal]) -> String {
    let parts: Vec<String> = goals.iter().map(render).collect();
    format!("[{}]", parts.join("; "))
}

/// Every operator application is an instance of some forward rule.
pub fn check_faithfulness(goals: &[Goal]) -> HarnessReport {
    check_faithfulness_with(goals, &forward_rules(), &red_source)
}

pub fn check_faithfulness_with(goals: &[Goal], rules: &[ForwardRule], ops: &OperatorSource<'_>) -> HarnessReport {
    sweep(goals, |g| {
        ops(g).into_iter().find_map(|(label, premisses)| {
            is_instance(rules, &premisses, g).is_none().then(|| Disagreement {
                sequent: render(g),
                engine_verdict: format!("{label} gives {}", show(&premisses)),
                oracle_verdict: "no rule instance".into(),
            })
        })
    })
}

/// Every forward rule instance is produced by some operator.
pub fn check_adequacy(goals: &[Goal]) -> HarnessReport {
    check_adequacy_with(goals, &forward_rules(), &red_source)
}

pub fn check_adequacy_with(goals: &[Goal], rules: &[ForwardRule], ops: &OperatorSource<'_>) -> HarnessReport {
    sweep(goals, |g| {
        let produced: Vec<BTreeSet<Goal>> = ops(g)
            .into_iter()
            .map(|(_, subs)| subs.into_iter().collect())
            .collect();
        instances_concluding(rules, g).into_iter().find_map(|(name, premisses)| {
            let want: BTreeSet<Goal> = premisses.iter().cloned().collect();
            (!produced.contains(&want)).then(|| Disagreement {
                sequent: render(g),
                engine_verdict: "no operator".into(),
                oracle_verdict: format!("{name} instance {}", show(&premisses)),
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_sequent;

    fn seq(s: &str) -> Goal {
        parse_sequent(s).unwrap()
    }

    #[test]
    fn vacuous_and_empty_corpora() {
        let r = check_soundness(&[seq("p |- q")], 10);
        assert!(r.passed);
        assert_eq!(r.checked, 1);
        let r = check_soundness(&[], 10);
        assert!(r.passed && r.checked == 0);
        assert!(check_completeness(&[seq("p |- p")], 1).passed);
        assert!(check_completeness(&[seq("p -> p |- p")], 10).passed);
    }

    #[test]
    fn completeness_failure_reports_the_frontier() {
        let r = check_completeness(&[seq("p -> q, p |- q /\\ p")], 1);
        assert!(!r.passed);
        assert!(r.failures[0].engine_verdict.contains("deepest"));
    }
}
