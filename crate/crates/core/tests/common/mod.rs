//! Generators and small reference implementations shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;

use reductive::lang::{Formula, Goal, Sequent};
use reductive::reduction::{Schema, State};
use reductive::tactic::{Prim, TacticExpr};

pub fn seq(s: &str) -> Goal {
    s.parse().expect("test sequent parses")
}

fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        6 => prop::sample::select(vec!["p", "q", "r"]).prop_map(Formula::atom),
        1 => Just(Formula::Top),
        1 => Just(Formula::Bottom),
    ]
}

/// Intuitionistic formulas with at most `depth` nested connectives.
pub fn ipl_formula(depth: u32) -> impl Strategy<Value = Formula> {
    atom().prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::imp(a, b)),
        ]
    })
}

fn star_formula() -> impl Strategy<Value = Formula> {
    prop::sample::select(vec!["p", "q"])
        .prop_map(Formula::atom)
        .prop_recursive(3, 8, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| Formula::star(a, b)))
}

/// Sequents that stay inside one fragment, as the sequent parser demands.
pub fn any_sequent() -> impl Strategy<Value = Sequent> {
    prop_oneof![
        (prop::collection::vec(ipl_formula(4), 0..4), ipl_formula(4)),
        (prop::collection::vec(star_formula(), 0..4), star_formula()),
    ]
    .prop_map(|(c, g)| Sequent::new(c, g))
}

/// IPL goals whose total connective count is at most `max_size`.
pub fn ipl_goal(max_size: usize) -> impl Strategy<Value = Goal> {
    (prop::collection::vec(ipl_formula(3), 0..4), ipl_formula(3))
        .prop_map(|(c, g)| Sequent::new(c, g))
        .prop_filter("goal too large", move |g| g.size() <= max_size)
}

pub fn state(max_goals: usize, max_size: usize) -> impl Strategy<Value = State> {
    prop::collection::vec(ipl_goal(max_size), 0..=max_goals).prop_map(State)
}

fn prim() -> impl Strategy<Value = Prim> {
    (
        prop::sample::select(Schema::ALL.to_vec()),
        prop::option::weighted(0.25, 0..3usize),
        prop::option::weighted(0.2, 0..2usize),
    )
        .prop_map(|(schema, principal, goal)| Prim {
            schema,
            principal: principal.filter(|_| schema.has_principal()),
            goal,
        })
}

pub fn tactic() -> impl Strategy<Value = TacticExpr> {
    prim().prop_map(TacticExpr::Prim).prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TacticExpr::seq(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TacticExpr::choice(a, b)),
            inner.prop_map(TacticExpr::star),
        ]
    })
}

/// `(p1 + p2 + ...)*` over every schema, left schemas pinned to each
/// principal position below `positions` so that no context formula is out of reach.
pub fn full_tactic(positions: usize) -> TacticExpr {
    let prims = Schema::ALL.into_iter().flat_map(|schema| {
        if schema.has_principal() {
            (0..positions)
                .map(|i| Prim {
                    schema,
                    principal: Some(i),
                    goal: None,
                })
                .collect::<Vec<_>>()
        } else {
            vec![Prim::schema(schema)]
        }
    });
    TacticExpr::star_of_choice(prims).expect("at least one primitive")
}

/// Intuitionistic Kripke models on up to three worlds.
pub mod kripke {
    use super::*;
    use std::collections::BTreeSet;

    pub struct Model {
        pub worlds: usize,
        /// `le[u][v]`: `v` is reachable from `u`.
        pub le: Vec<Vec<bool>>,
        /// Atoms true at each world.
        pub val: Vec<BTreeSet<String>>,
    }

    impl Model {
        pub fn forces(&self, w: usize, f: &Formula) -> bool {
            match f {
                Formula::Atom(a) => self.val[w].contains(a),
                Formula::Top => true,
                Formula::Bottom => false,
                Formula::And(a, b) => self.forces(w, a) && self.forces(w, b),
                Formula::Or(a, b) => self.forces(w, a) || self.forces(w, b),
                Formula::Imp(a, b) => {
                    (0..self.worlds).all(|v| !self.le[w][v] || !self.forces(v, a) || self.forces(v, b))
                }
                Formula::Star(..) => panic!("no Kripke reading for *"),
            }
        }

        pub fn refutes(&self, s: &Sequent) -> bool {
            (0..self.worlds).any(|w| s.context.iter().all(|f| self.forces(w, f)) && !self.forces(w, &s.conclusion))
        }
    }

    fn atoms_of(f: &Formula, out: &mut BTreeSet<String>) {
        match f {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Top | Formula::Bottom => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Star(a, b) => {
                atoms_of(a, out);
                atoms_of(b, out);
            }
        }
    }

    /// A countermodel with at most three worlds, if one exists.
    pub fn countermodel(s: &Sequent) -> Option<Model> {
        let mut atoms = BTreeSet::new();
        s.context.iter().chain([&s.conclusion]).for_each(|f| atoms_of(f, &mut atoms));
        let atoms: Vec<String> = atoms.into_iter().collect();
        for worlds in 1..=3usize {
            let pairs: Vec<(usize, usize)> = (0..worlds)
                .flat_map(|u| (0..worlds).map(move |v| (u, v)))
                .filter(|(u, v)| u != v)
                .collect();
            for rel in 0u32..(1 << pairs.len()) {
                let mut le = vec![vec![false; worlds]; worlds];
                (0..worlds).for_each(|w| le[w][w] = true);
                for (i, (u, v)) in pairs.iter().enumerate() {
                    le[*u][*v] = rel & (1 << i) != 0;
                }
                let transitive = (0..worlds).all(|a| {
                    (0..worlds).all(|b| (0..worlds).all(|c| !(le[a][b] && le[b][c]) || le[a][c]))
                });
                if !transitive {
                    continue;
                }
                let slots = worlds * atoms.len();
                for bits in 0u32..(1 << slots) {
                    let val: Vec<BTreeSet<String>> = (0..worlds)
                        .map(|w| {
                            atoms
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| bits & (1 << (w * atoms.len() + i)) != 0)
                                .map(|(_, a)| a.clone())
                                .collect()
                        })
                        .collect();
                    let monotone = (0..worlds)
                        .all(|u| (0..worlds).all(|v| !le[u][v] || val[u].is_subset(&val[v])));
                    if !monotone {
                        continue;
                    }
                    let m = Model { worlds, le: le.clone(), val };
                    if m.refutes(s) {
                        return Some(m);
                    }
                }
            }
        }
        None
    }
}

/// Deliberately broken inputs the faithfulness and adequacy checks must catch.
pub mod controls {
    use reductive::lang::Goal;
    use reductive::oracle::{forward_rules, CtxOp, ForwardRule, Pat};
    use reductive::reduction::reductions;

    /// The real operators, except that every multi-premiss reduction has its
    /// subgoals swapped and the (new) last one dropped.
    pub fn mutated_source(goal: &Goal) -> Vec<(String, Vec<Goal>)> {
        reductions(goal)
            .into_iter()
            .map(|(op, mut subs)| {
                if subs.len() > 1 {
                    subs.swap(0, 1);
                    subs.pop();
                }
                (op.to_string(), subs)
            })
            .collect()
    }

    /// The forward rules plus one deriving a disjunction from the conjunction
    /// of its sides, which no operator inverts.
    pub fn rules_with_orphan() -> Vec<ForwardRule> {
        let var = |n| Box::new(Pat::Var(n));
        let mut rules = forward_rules();
        rules.push(ForwardRule {
            name: "or-from-and",
            principal: None,
            conclusion: Pat::Or(var("A"), var("B")),
            premises: vec![(CtxOp::Same, Pat::And(var("A"), var("B")))],
        });
        rules
    }
}

/// Randomized session workouts.
pub mod sessions {
    use reductive::corpus::GoalGen;
    use reductive::reduction::{Binding, Operator, Schema};
    use reductive::session::{Session, SessionError, SessionStore};
    use reductive::tactic::parse_tactic;

    pub const TACTICS: [&str; 6] = [
        "(Ax + ImpL)*",
        "AndR",
        "ImpR ; Ax",
        "(Ax + AndL + OrL + ImpR + AndR + TopR + BotL)*",
        "ImpL + OrR1",
        "Ax*",
    ];

    fn same_view(a: &Session, b: &Session) -> bool {
        a.root == b.root && a.current == b.current && a.history == b.history && a.undone == b.undone
    }

    /// Run `steps` random actions on a random goal, checking after each that
    /// history replays to the current state, that apply followed by backtrack
    /// changes nothing, and that failed actions leave the session alone. With a
    /// store, every action is mirrored through the journal and the reloaded
    /// session must match.
    pub fn drive(seed: u64, steps: usize, store: Option<&SessionStore>) -> Result<usize, String> {
        let mut gen = GoalGen::new(seed);
        let goal = gen.goal(6);
        let mut s = Session::create(goal.clone()).map_err(|e| e.to_string())?;
        let journal_id = match store {
            Some(st) => Some(st.create(goal).map_err(|e| e.to_string())?.id),
            None => None,
        };
        let mut checks = 0;
        for step in 0..steps {
            let before = s.clone();
            let bindings = s.bindings();
            let roll = gen.below(100);
            let result: Result<(), SessionError> = if roll < 60 && !bindings.is_empty() {
                let b = bindings[gen.below(bindings.len())];
                s.apply(b).map_err(|e| format!("step {step}: reported binding {b} failed: {e}"))?;
                let after = s.clone();
                s.backtrack().map_err(|e| format!("step {step}: {e}"))?;
                if (&s.current, s.status()) != (&before.current, before.status()) {
                    return Err(format!("step {step}: apply then backtrack changed the view"));
                }
                checks += 1;
                s = after;
                match (store, &journal_id) {
                    (Some(st), Some(id)) => st.apply(id, b).map(|_| ()),
                    _ => Ok(()),
                }
            } else if roll < 65 {
                let stale = Binding::new(Operator::left(Schema::ImpL, 9), gen.below(3));
                match s.apply(stale) {
                    Err(SessionError::StaleBinding { .. }) => Ok(()),
                    other => return Err(format!("stale binding not rejected: {other:?}")),
                }
            } else if roll < 85 {
                let r = s.backtrack().map(|_| ());
                if let (Some(st), Some(id)) = (store, &journal_id) {
                    let mirrored = st.backtrack(id).map(|_| ());
                    if r.is_ok() != mirrored.is_ok() {
                        return Err(format!("journal backtrack disagreed at step {step}"));
                    }
                }
                r
            } else {
                let text = TACTICS[gen.below(TACTICS.len())];
                let expr = parse_tactic(text).expect("built-in tactics parse");
                let budget = gen.below(4);
                let r = s.run_tactic(&expr, budget).map(|_| ());
                if let (Some(st), Some(id)) = (store, &journal_id) {
                    let mirrored = st.run_tactic(id, &expr, budget).map(|_| ());
                    if r.is_ok() != mirrored.is_ok() {
                        return Err(format!("journal tactic disagreed at step {step}"));
                    }
                }
                r
            };
            match result {
                Ok(()) => {}
                Err(SessionError::AtRoot | SessionError::TacticFailed(_) | SessionError::StaleBinding { .. }) => {
                    if !same_view(&s, &before) {
                        return Err(format!("a rejected action changed the session at step {step}"));
                    }
                }
                Err(e) => return Err(format!("step {step}: {e}")),
            }
            if !s.replay_consistent() {
                return Err(format!("history no longer replays at step {step}"));
            }
            checks += 1;
            if let (Some(st), Some(id)) = (store, &journal_id) {
                let loaded = st.load(id).map_err(|e| e.to_string())?;
                if !same_view(&loaded, &s) {
                    return Err(format!("journal replay diverged at step {step}"));
                }
            }
        }
        Ok(checks)
    }
}
