//! Milner's proof-search machine over intuitionistic sequents. Events are
//! valid sequents `Δ ⊢ ψ`; such an event achieves the goal `Γ ▷ φ` when
//! `ψ = φ` and every formula of `Δ` occurs in `Γ`. Procedures are the forward
//! rules of the calculus together with weakening.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use super::{GoalOperator, Procedure, Tactic, TacticalInstance};
use crate::corpus::{enumerate, CorpusParams};
use crate::lang::{Formula, Goal, Sequent};
use crate::oracle::Oracle;
use crate::reduction::{operators_for, Operator, Schema};

/// A consequence `Δ ⊢ ψ`, with `Δ` a set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Consequence {
    pub assumptions: BTreeSet<Formula>,
    pub conclusion: Formula,
}

impl Consequence {
    pub fn new(assumptions: impl IntoIterator<Item = Formula>, conclusion: Formula) -> Self {
        Consequence {
            assumptions: assumptions.into_iter().collect(),
            conclusion,
        }
    }

    pub fn sequent(&self) -> Sequent {
        Sequent::new(self.assumptions.iter().cloned().collect(), self.conclusion.clone())
    }
}

impl fmt::Display for Consequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.sequent().fmt(f)
    }
}

pub struct MilnerInstance {
    atoms: Vec<String>,
    size_bound: usize,
    oracle: Mutex<(Oracle, HashMap<Consequence, bool>)>,
}

/// Goals over the first `atom_bound` atoms with at most `size_bound`
/// connectives and at most two assumptions.
pub fn milner_instance(atom_bound: usize, size_bound: usize) -> MilnerInstance {
    let atoms = (0..atom_bound)
        .map(|i| match "pqrstuvw".chars().nth(i) {
            Some(c) => c.to_string(),
            None => format!("a{i}"),
        })
        .collect();
    MilnerInstance {
        atoms,
        size_bound,
        oracle: Mutex::new((Oracle::new(), HashMap::new())),
    }
}

fn without<'a>(set: &BTreeSet<Formula>, drop: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Formula> {
    let mut out = set.clone();
    for f in drop {
        out.remove(f);
    }
    out
}

fn parts(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => Some((a, b)),
        _ => None,
    }
}

/// The forward rules and weakening, as procedures. Families indexed by a
/// formula carry it in their name.
pub mod procedures {
    use super::*;

    pub fn ax(phi: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("ax[{phi}]"), move |es: &[Consequence]| {
            es.is_empty().then(|| Consequence::new([phi.clone()], phi.clone()))
        })
    }

    pub fn constant(e: Consequence) -> Procedure<Consequence> {
        Procedure::new(format!("const[{e}]"), move |es: &[Consequence]| es.is_empty().then(|| e.clone()))
    }

    pub fn top_intro() -> Procedure<Consequence> {
        Procedure::new("top_intro", |es: &[Consequence]| {
            es.is_empty().then(|| Consequence::new([], Formula::Top))
        })
    }

    pub fn bot_elim(c: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("bot_elim[{c}]"), move |es: &[Consequence]| {
            es.is_empty().then(|| Consequence::new([Formula::Bottom], c.clone()))
        })
    }

    pub fn and_intro() -> Procedure<Consequence> {
        Procedure::new("and_intro", |es: &[Consequence]| match es {
            [a, b] => Some(Consequence::new(
                a.assumptions.union(&b.assumptions).cloned(),
                Formula::and(a.conclusion.clone(), b.conclusion.clone()),
            )),
            _ => None,
        })
    }

    /// From `Δ ⊢ C` to `Δ - {A, B}, A /\ B ⊢ C`.
    pub fn and_elim(ab: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("and_elim[{ab}]"), move |es: &[Consequence]| {
            let [e] = es else { return None };
            let Formula::And(a, b) = &ab else { return None };
            let mut ctx = without(&e.assumptions, [&**a, &**b]);
            ctx.insert(ab.clone());
            Some(Consequence::new(ctx, e.conclusion.clone()))
        })
    }

    /// From `Δ ⊢ A` to `Δ ⊢ A \/ B`.
    pub fn or_intro_left(b: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("or_intro_left[{b}]"), move |es: &[Consequence]| {
            let [e] = es else { return None };
            Some(Consequence::new(e.assumptions.clone(), Formula::or(e.conclusion.clone(), b.clone())))
        })
    }

    /// From `Δ ⊢ B` to `Δ ⊢ A \/ B`.
    pub fn or_intro_right(a: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("or_intro_right[{a}]"), move |es: &[Consequence]| {
            let [e] = es else { return None };
            Some(Consequence::new(e.assumptions.clone(), Formula::or(a.clone(), e.conclusion.clone())))
        })
    }

    /// From `Δ₁ ⊢ C` and `Δ₂ ⊢ C` to `Δ₁ - {A}, Δ₂ - {B}, A \/ B ⊢ C`.
    pub fn or_elim(ab: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("or_elim[{ab}]"), move |es: &[Consequence]| {
            let [e1, e2] = es else { return None };
            let Formula::Or(a, b) = &ab else { return None };
            if e1.conclusion != e2.conclusion {
                return None;
            }
            let mut ctx = without(&e1.assumptions, [&**a]);
            ctx.extend(without(&e2.assumptions, [&**b]));
            ctx.insert(ab.clone());
            Some(Consequence::new(ctx, e1.conclusion.clone()))
        })
    }

    /// From `Δ ⊢ B` to `Δ - {A} ⊢ A -> B`.
    pub fn imp_intro(a: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("imp_intro[{a}]"), move |es: &[Consequence]| {
            let [e] = es else { return None };
            Some(Consequence::new(
                without(&e.assumptions, [&a]),
                Formula::imp(a.clone(), e.conclusion.clone()),
            ))
        })
    }

    /// From `Δ₁ ⊢ A` and `Δ₂ ⊢ C` to `Δ₁, Δ₂ - {B}, A -> B ⊢ C`.
    pub fn imp_elim(ab: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("imp_elim[{ab}]"), move |es: &[Consequence]| {
            let [e1, e2] = es else { return None };
            let Formula::Imp(a, b) = &ab else { return None };
            if e1.conclusion != **a {
                return None;
            }
            let mut ctx = e1.assumptions.clone();
            ctx.extend(without(&e2.assumptions, [&**b]));
            ctx.insert(ab.clone());
            Some(Consequence::new(ctx, e2.conclusion.clone()))
        })
    }

    /// From `Δ ⊢ C` to `Δ, ψ ⊢ C`.
    pub fn weaken(psi: Formula) -> Procedure<Consequence> {
        Procedure::new(format!("weaken[{psi}]"), move |es: &[Consequence]| {
            let [e] = es else { return None };
            let mut ctx = e.assumptions.clone();
            ctx.insert(psi.clone());
            Some(Consequence::new(ctx, e.conclusion.clone()))
        })
    }
}

impl MilnerInstance {
    fn params(&self) -> CorpusParams {
        CorpusParams {
            atoms: self.atoms.clone(),
            max_connectives: self.size_bound,
            max_context: 2,
        }
    }

    /// Formulas over the instance's atoms with at most `size_bound` connectives.
    fn formulas(&self) -> Vec<Formula> {
        let params = CorpusParams {
            max_context: 0,
            ..self.params()
        };
        enumerate(&params).into_iter().map(|s| s.conclusion).collect()
    }

    pub fn valid(&self, e: &Consequence) -> bool {
        let mut guard = self.oracle.lock().expect("oracle lock");
        let (oracle, cache) = &mut *guard;
        if let Some(&v) = cache.get(e) {
            return v;
        }
        let v = oracle.valid(&e.sequent()).unwrap_or(false);
        cache.insert(e.clone(), v);
        v
    }
}

impl TacticalInstance for MilnerInstance {
    type Goal = Goal;
    type Event = Consequence;

    fn goals(&self) -> Vec<Goal> {
        enumerate(&self.params())
    }

    fn is_event(&self, e: &Consequence) -> bool {
        self.valid(e)
    }

    fn achieves(&self, goal: &Goal, e: &Consequence) -> bool {
        e.conclusion == goal.conclusion && e.assumptions.iter().all(|f| goal.context.contains(f)) && self.valid(e)
    }

    /// Every subset of the goal's assumptions that, with its conclusion, is valid.
    fn achieving_events(&self, goal: &Goal) -> Vec<Consequence> {
        let ctx: Vec<Formula> = goal.context_set().into_iter().cloned().collect();
        (0u32..1 << ctx.len())
            .map(|mask| {
                Consequence::new(
                    ctx.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, f)| f.clone()),
                    goal.conclusion.clone(),
                )
            })
            .filter(|e| self.valid(e))
            .collect()
    }

    fn procedures(&self) -> Vec<Procedure<Consequence>> {
        use procedures::*;
        let mut out = vec![top_intro(), and_intro()];
        for f in self.formulas() {
            out.extend([
                ax(f.clone()),
                bot_elim(f.clone()),
                or_intro_left(f.clone()),
                or_intro_right(f.clone()),
                imp_intro(f.clone()),
                weaken(f.clone()),
            ]);
            match f {
                Formula::And(..) => out.push(and_elim(f)),
                Formula::Or(..) => out.push(or_elim(f)),
                Formula::Imp(..) => out.push(imp_elim(f)),
                _ => {}
            }
        }
        out
    }

    /// Only procedures whose output can have the goal's conclusion and stay
    /// inside the goal's assumptions.
    fn candidate_procedures(&self, goal: &Goal) -> Vec<Procedure<Consequence>> {
        use procedures::*;
        let concl = &goal.conclusion;
        let mut out = Vec::new();
        if goal.assumes(concl) {
            out.push(ax(concl.clone()));
        }
        if goal.assumes(&Formula::Bottom) {
            out.push(bot_elim(concl.clone()));
        }
        match concl {
            Formula::Top => out.push(top_intro()),
            Formula::And(..) => out.push(and_intro()),
            Formula::Or(a, b) => {
                out.push(or_intro_left((**b).clone()));
                out.push(or_intro_right((**a).clone()));
            }
            Formula::Imp(a, _) => out.push(imp_intro((**a).clone())),
            _ => {}
        }
        for f in goal.context_set() {
            match f {
                Formula::And(..) => out.push(and_elim(f.clone())),
                Formula::Or(..) => out.push(or_elim(f.clone())),
                Formula::Imp(..) => out.push(imp_elim(f.clone())),
                _ => {}
            }
            out.push(weaken(f.clone()));
        }
        out
    }
}

fn first_operator(goal: &Goal, schema: Schema) -> Option<Operator> {
    operators_for(goal).into_iter().find(|op| op.schema == schema)
}

/// The reduction operator of `schema` at its leftmost principal position.
pub fn milner_operator(schema: Schema) -> GoalOperator<Goal> {
    GoalOperator::new(schema.name(), move |g| {
        first_operator(g, schema).map(|op| op.apply(g).expect("operators_for only yields applicable operators"))
    })
}

/// The reduction operator of `schema` paired with its forward rule. The axiom
/// tactic justifies `Γ ▷ φ` by the constant event `Γ ⊢ φ`.
pub fn milner_tactic(schema: Schema) -> Tactic<Goal, Consequence> {
    use procedures::*;
    Tactic::new(schema.name(), move |g: &Goal| {
        let op = first_operator(g, schema)?;
        let subgoals = op.apply(g).ok()?;
        let principal = op.principal.map(|i| g.context[i].clone());
        let proc = match schema {
            Schema::Ax => constant(Consequence::new(g.context.iter().cloned(), g.conclusion.clone())),
            Schema::BotL => bot_elim(g.conclusion.clone()),
            Schema::TopR => top_intro(),
            Schema::AndR => and_intro(),
            Schema::AndL => and_elim(principal?),
            Schema::OrR1 => or_intro_left(parts(&g.conclusion)?.1.clone()),
            Schema::OrR2 => or_intro_right(parts(&g.conclusion)?.0.clone()),
            Schema::OrL => or_elim(principal?),
            Schema::ImpR => imp_intro(parts(&g.conclusion)?.0.clone()),
            Schema::ImpL => imp_elim(principal?),
        };
        Some((subgoals, proc))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_sequent;
    use crate::tactical::{check_operator_validity, check_tactic_validity, ValidityStatus};

    fn seq(s: &str) -> Goal {
        parse_sequent(s).unwrap()
    }

    fn ev(s: &str) -> Consequence {
        let s = seq(s);
        Consequence::new(s.context, s.conclusion)
    }

    #[test]
    fn achievement() {
        let m = milner_instance(2, 2);
        assert!(m.achieves(&seq("p, q |- p"), &ev("p |- p")));
        assert!(!m.achieves(&seq("p |- p"), &ev("p, q |- p")));
        assert!(!m.achieves(&seq("p |- q"), &ev("p |- p")));
        assert!(!m.achieves(&seq("p, q |- q"), &ev("p |- q")));
    }

    #[test]
    fn small_instance_tactics_are_valid() {
        let m = milner_instance(2, 2);
        for schema in Schema::ALL {
            let v = check_tactic_validity(&m, &milner_tactic(schema), usize::MAX);
            assert_eq!(v.status, ValidityStatus::ValidWithinBound, "{schema}: {:?}", v.witness);
            let v = check_operator_validity(&m, &milner_operator(schema), usize::MAX);
            assert_eq!(v.status, ValidityStatus::ValidWithinBound, "{schema}: {:?}", v.witness);
        }
    }

    #[test]
    fn empty_procedure_set_refutes_everything() {
        struct Bare(MilnerInstance);
        impl TacticalInstance for Bare {
            type Goal = Goal;
            type Event = Consequence;
            fn goals(&self) -> Vec<Goal> {
                self.0.goals()
            }
            fn is_event(&self, e: &Consequence) -> bool {
                self.0.is_event(e)
            }
            fn achieves(&self, g: &Goal, e: &Consequence) -> bool {
                self.0.achieves(g, e)
            }
            fn achieving_events(&self, g: &Goal) -> Vec<Consequence> {
                self.0.achieving_events(g)
            }
            fn procedures(&self) -> Vec<Procedure<Consequence>> {
                Vec::new()
            }
        }
        let v = check_operator_validity(&Bare(milner_instance(2, 1)), &milner_operator(Schema::Ax), 100);
        assert_eq!(v.status, ValidityStatus::Counterexample);
    }
}
