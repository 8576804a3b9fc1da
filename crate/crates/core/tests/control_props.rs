mod common;

use proptest::prelude::*;

use common::{ipl_goal, seq};
use reductive::control::{
    io_prove, multiplicative_corpus, naive_split_prove, replay, search, GoalSelection, LoopCheck, ResourceSequent,
    SearchStatus, Strategy, TraceEvent, Traversal,
};
use reductive::corpus::{enumerate, CorpusParams};
use reductive::oracle::Oracle;
use reductive::reduction::Schema;
use reductive::session::Session;

fn strategies(depth: usize) -> Vec<Strategy> {
    let mut reversed = Schema::ALL.to_vec();
    reversed.reverse();
    let mut out = Vec::new();
    for goal_selection in [GoalSelection::Leftmost, GoalSelection::SmallestGoal] {
        for order in [Schema::ALL.to_vec(), reversed.clone()] {
            out.push(Strategy {
                goal_selection,
                operator_order: order,
                ..Strategy::new(Traversal::IterativeDeepening, LoopCheck::BranchRepeat, depth)
            });
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn proved_traces_replay_to_box(g in ipl_goal(6), t in prop::sample::select(vec![Traversal::Dfs, Traversal::Bfs, Traversal::IterativeDeepening])) {
        let out = search(&g, &Strategy { node_budget: 20_000, ..Strategy::new(t, LoopCheck::BranchRepeat, 8) });
        if out.status == SearchStatus::Proved {
            let (end, kept) = replay(&g, &out.trace).expect("trace replays");
            prop_assert!(end.is_box());
            let tree = out.tree.expect("proofs come with a tree");
            prop_assert_eq!(tree.bindings().len(), kept.len());
            prop_assert!(tree.is_certified());
        } else {
            prop_assert!(out.tree.is_none());
        }
    }

    #[test]
    fn loop_pruning_keeps_proofs(g in ipl_goal(5)) {
        let plain = search(&g, &Strategy { node_budget: 20_000, ..Strategy::new(Traversal::IterativeDeepening, LoopCheck::Off, 6) });
        if plain.status == SearchStatus::Proved {
            let pruned = search(&g, &Strategy::new(Traversal::IterativeDeepening, LoopCheck::BranchRepeat, 6));
            prop_assert_eq!(pruned.status, SearchStatus::Proved);
        }
    }

    #[test]
    fn a_proved_trace_drives_a_session_closed(g in ipl_goal(6)) {
        let out = search(&g, &Strategy::new(Traversal::Dfs, LoopCheck::BranchRepeat, 10));
        if out.status == SearchStatus::Proved {
            let mut session = Session::create(g).unwrap();
            for b in out.tree.unwrap().bindings() {
                session.apply(b).unwrap();
            }
            prop_assert_eq!(session.status(), reductive::Status::ClosedT1);
        }
    }
}

#[test]
fn provability_is_independent_of_strategy() {
    let params = CorpusParams {
        max_connectives: 2,
        ..CorpusParams::pinned()
    };
    let mut oracle = Oracle::new();
    for g in enumerate(&params) {
        let valid = oracle.valid(&g).unwrap();
        for s in strategies(20) {
            let out = search(&g, &s);
            assert_eq!(out.status == SearchStatus::Proved, valid, "{g} under {s:?}");
        }
    }
}

#[test]
fn divergent_goal_is_caught_by_the_loop_check() {
    let g = seq("p -> p |- p");
    for k in 2..8 {
        let out = search(&g, &Strategy::new(Traversal::Dfs, LoopCheck::Off, k));
        assert_eq!(out.status, SearchStatus::BudgetExceeded);
        assert_eq!(out.deepest, k);
    }
    let out = search(&g, &Strategy::new(Traversal::IterativeDeepening, LoopCheck::BranchRepeat, 64));
    assert_eq!(out.status, SearchStatus::Exhausted);
    assert!(out.trace.iter().any(|e| matches!(e, TraceEvent::Pruned(_))));
}

#[test]
fn io_and_naive_splitting_agree() {
    let corpus = multiplicative_corpus(3, 2);
    assert!(!corpus.is_empty());
    let provable = corpus.iter().filter(|s| io_prove(s)).count();
    assert!(provable > 0 && provable < corpus.len());
    for s in &corpus {
        assert_eq!(io_prove(s), naive_split_prove(s), "{s}");
    }
    let s: ResourceSequent = "p, q, p |- p * (q * p)".parse().unwrap();
    assert!(io_prove(&s));
    let s: ResourceSequent = "p, q |- p * (q * p)".parse().unwrap();
    assert!(!io_prove(&s));
}
