//! Reduction operators for intuitionistic sequents, goal-list states, and the
//! two ways a state can move: one goal at a time, or every goal at once.
//!
//! Left rules add a formula to the context only when it is not already there,
//! and `ImpL` keeps its principal implication in both premisses, so
//! `p -> p |- p` reduces to itself forever. Ending that is the searcher's job.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Formula, Goal, Sequent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("{operator} does not apply to `{goal}`")]
    NotApplicable { operator: Operator, goal: Goal },
    #[error("invalid binding {binding}: {reason}")]
    InvalidBinding { binding: Binding, reason: String },
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
}

/// The ten rule schemas, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Schema {
    Ax,
    BotL,
    TopR,
    AndR,
    AndL,
    OrR1,
    OrR2,
    OrL,
    ImpR,
    ImpL,
}

impl Schema {
    pub const ALL: [Schema; 10] = [
        Schema::Ax,
        Schema::BotL,
        Schema::TopR,
        Schema::AndR,
        Schema::AndL,
        Schema::OrR1,
        Schema::OrR2,
        Schema::OrL,
        Schema::ImpR,
        Schema::ImpL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::Ax => "Ax",
            Schema::BotL => "BotL",
            Schema::TopR => "TopR",
            Schema::AndR => "AndR",
            Schema::AndL => "AndL",
            Schema::OrR1 => "OrR1",
            Schema::OrR2 => "OrR2",
            Schema::OrL => "OrL",
            Schema::ImpR => "ImpR",
            Schema::ImpL => "ImpL",
        }
    }

    /// Schemas acting on a context formula carry a principal position.
    pub fn has_principal(self) -> bool {
        matches!(
            self,
            Schema::Ax | Schema::BotL | Schema::AndL | Schema::OrL | Schema::ImpL
        )
    }

    fn matches_principal(self, formula: &Formula, conclusion: &Formula) -> bool {
        match self {
            Schema::Ax => formula == conclusion,
            Schema::BotL => *formula == Formula::Bottom,
            Schema::AndL => matches!(formula, Formula::And(..)),
            Schema::OrL => matches!(formula, Formula::Or(..)),
            Schema::ImpL => matches!(formula, Formula::Imp(..)),
            _ => false,
        }
    }

    fn matches_conclusion(self, conclusion: &Formula) -> bool {
        match self {
            Schema::TopR => *conclusion == Formula::Top,
            Schema::AndR => matches!(conclusion, Formula::And(..)),
            Schema::OrR1 | Schema::OrR2 => matches!(conclusion, Formula::Or(..)),
            Schema::ImpR => matches!(conclusion, Formula::Imp(..)),
            _ => false,
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schema {
    type Err = ReductionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Schema::ALL
            .into_iter()
            .find(|schema| schema.name() == s)
            .ok_or_else(|| ReductionError::UnknownOperator(s.to_string()))
    }
}

/// The operator schemas making up RED for intuitionistic sequents.
pub fn red_set() -> Vec<Schema> {
    Schema::ALL.to_vec()
}

/// A concrete reduction operator: a schema, plus the context position of its
/// principal formula for left rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operator {
    pub schema: Schema,
    pub principal: Option<usize>,
}

impl Operator {
    pub fn right(schema: Schema) -> Self {
        Operator {
            schema,
            principal: None,
        }
    }

    pub fn left(schema: Schema, principal: usize) -> Self {
        Operator {
            schema,
            principal: Some(principal),
        }
    }

    pub fn applicable(&self, goal: &Goal) -> bool {
        match (self.schema.has_principal(), self.principal) {
            (true, Some(i)) => goal
                .context
                .get(i)
                .is_some_and(|f| self.schema.matches_principal(f, &goal.conclusion)),
            (false, None) => self.schema.matches_conclusion(&goal.conclusion),
            _ => false,
        }
    }

    /// The sufficient premisses for `goal`, in rule order.
    pub fn apply(&self, goal: &Goal) -> Result<Vec<Goal>, ReductionError> {
        if !self.applicable(goal) {
            return Err(ReductionError::NotApplicable {
                operator: *self,
                goal: goal.clone(),
            });
        }
        let ctx = &goal.context;
        let concl = &goal.conclusion;
        let with_ctx = |context: Vec<Formula>, conclusion: &Formula| Sequent::new(context, conclusion.clone());
        let without_principal = || {
            let mut rest = ctx.clone();
            rest.remove(self.principal.expect("left rule"));
            rest
        };
        let principal = self.principal.map(|i| &ctx[i]);
        let subgoals = match (self.schema, principal, concl) {
            (Schema::Ax | Schema::BotL | Schema::TopR, _, _) => vec![],
            (Schema::AndR, _, Formula::And(a, b)) => {
                vec![with_ctx(ctx.clone(), a), with_ctx(ctx.clone(), b)]
            }
            (Schema::OrR1, _, Formula::Or(a, _)) => vec![with_ctx(ctx.clone(), a)],
            (Schema::OrR2, _, Formula::Or(_, b)) => vec![with_ctx(ctx.clone(), b)],
            (Schema::ImpR, _, Formula::Imp(a, b)) => vec![with_ctx(assume(ctx, [&**a]), b)],
            (Schema::AndL, Some(Formula::And(a, b)), _) => {
                vec![with_ctx(assume(&without_principal(), [&**a, &**b]), concl)]
            }
            (Schema::OrL, Some(Formula::Or(a, b)), _) => {
                let rest = without_principal();
                vec![
                    with_ctx(assume(&rest, [&**a]), concl),
                    with_ctx(assume(&rest, [&**b]), concl),
                ]
            }
            (Schema::ImpL, Some(Formula::Imp(a, b)), _) => {
                vec![with_ctx(ctx.clone(), a), with_ctx(assume(ctx, [&**b]), concl)]
            }
            _ => unreachable!("applicability was checked"),
        };
        Ok(subgoals)
    }
}

/// Prepend the formulas not already assumed, keeping their relative order.
fn assume<'a>(ctx: &[Formula], new: impl IntoIterator<Item = &'a Formula>) -> Vec<Formula> {
    let mut added: Vec<Formula> = Vec::new();
    for f in new {
        if !ctx.contains(f) && !added.contains(f) {
            added.push(f.clone());
        }
    }
    added.extend(ctx.iter().cloned());
    added
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.principal {
            Some(i) => write!(f, "{}@{i}", self.schema),
            None => write!(f, "{}", self.schema),
        }
    }
}

impl FromStr for Operator {
    type Err = ReductionError;

    /// `ImpL@2` or `AndR`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ReductionError::UnknownOperator(s.to_string());
        let (name, principal) = match s.split_once('@') {
            Some((name, idx)) => (name, Some(idx.parse::<usize>().map_err(|_| unknown())?)),
            None => (s, None),
        };
        let schema: Schema = name.parse().map_err(|_| unknown())?;
        if schema.has_principal() != principal.is_some() {
            return Err(unknown());
        }
        Ok(Operator { schema, principal })
    }
}

/// Every operator that applies to `goal`, in schema order then principal position.
pub fn operators_for(goal: &Goal) -> Vec<Operator> {
    let mut out = Vec::new();
    for schema in Schema::ALL {
        if schema.has_principal() {
            for (i, f) in goal.context.iter().enumerate() {
                if schema.matches_principal(f, &goal.conclusion) {
                    out.push(Operator::left(schema, i));
                }
            }
        } else if schema.matches_conclusion(&goal.conclusion) {
            out.push(Operator::right(schema));
        }
    }
    out
}

/// Every applicable operator paired with its premisses.
pub fn reductions(goal: &Goal) -> Vec<(Operator, Vec<Goal>)> {
    operators_for(goal)
        .into_iter()
        .map(|op| {
            let subgoals = op.apply(goal).expect("operators_for only yields applicable operators");
            (op, subgoals)
        })
        .collect()
}

/// Apply a named operator; the precondition failing is a usage error.
pub fn apply(op: &Operator, goal: &Goal) -> Result<Vec<Goal>, ReductionError> {
    op.apply(goal)
}

/// A finite list of goals. The empty list is the closed state `□`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Vec<Goal>);

impl State {
    pub fn singleton(goal: Goal) -> Self {
        State(vec![goal])
    }

    pub fn empty() -> Self {
        State(Vec::new())
    }

    pub fn goals(&self) -> &[Goal] {
        &self.0
    }

    pub fn is_box(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a State>) -> State {
        State(parts.into_iter().flat_map(|s| s.0.iter().cloned()).collect())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("□");
        }
        f.write_str("[")?;
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("]")
    }
}

impl From<Vec<Goal>> for State {
    fn from(goals: Vec<Goal>) -> Self {
        State(goals)
    }
}

/// An operator aimed at one goal of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "BindingWire", into = "BindingWire")]
pub struct Binding {
    pub operator: Operator,
    pub goal: usize,
}

#[derive(Serialize, Deserialize)]
struct BindingWire {
    schema: Schema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    principal: Option<usize>,
    goal: usize,
}

impl TryFrom<BindingWire> for Binding {
    type Error = String;

    fn try_from(w: BindingWire) -> Result<Self, Self::Error> {
        if w.schema.has_principal() != w.principal.is_some() {
            return Err(format!(
                "{} {} a principal position",
                w.schema,
                if w.schema.has_principal() { "needs" } else { "takes no" }
            ));
        }
        Ok(Binding {
            operator: Operator {
                schema: w.schema,
                principal: w.principal,
            },
            goal: w.goal,
        })
    }
}

impl From<Binding> for BindingWire {
    fn from(b: Binding) -> Self {
        BindingWire {
            schema: b.operator.schema,
            principal: b.operator.principal,
            goal: b.goal,
        }
    }
}

impl Binding {
    pub fn new(operator: Operator, goal: usize) -> Self {
        Binding { operator, goal }
    }

    pub fn valid_for(&self, state: &State) -> bool {
        state
            .0
            .get(self.goal)
            .is_some_and(|g| self.operator.applicable(g))
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.operator, self.goal)
    }
}

impl FromStr for Binding {
    type Err = ReductionError;

    /// `ImpL@1#0`; a missing `#goal` means goal 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (op, goal) = match s.split_once('#') {
            Some((op, goal)) => (
                op,
                goal.parse()
                    .map_err(|_| ReductionError::UnknownOperator(s.to_string()))?,
            ),
            None => (s, 0),
        };
        Ok(Binding::new(op.parse()?, goal))
    }
}

/// Ordered by goal index, then schema order, then principal position.
pub fn applicable_bindings(state: &State) -> Vec<Binding> {
    state
        .0
        .iter()
        .enumerate()
        .flat_map(|(i, g)| operators_for(g).into_iter().map(move |op| Binding::new(op, i)))
        .collect()
}

/// Replace the bound goal in place by its premisses.
pub fn step_interleave(state: &State, binding: &Binding) -> Result<State, ReductionError> {
    let goal = state.0.get(binding.goal).ok_or_else(|| ReductionError::InvalidBinding {
        binding: *binding,
        reason: format!("state has {} goal(s)", state.len()),
    })?;
    let subgoals = binding
        .operator
        .apply(goal)
        .map_err(|e| ReductionError::InvalidBinding {
            binding: *binding,
            reason: e.to_string(),
        })?;
    let mut goals = Vec::with_capacity(state.len() + subgoals.len());
    goals.extend_from_slice(&state.0[..binding.goal]);
    goals.extend(subgoals);
    goals.extend_from_slice(&state.0[binding.goal + 1..]);
    Ok(State(goals))
}

/// One synchronous step: every goal reduces at once. `□` steps to itself.
pub fn step_sync(state: &State) -> BTreeSet<State> {
    fn go(goals: &[Goal]) -> BTreeSet<Vec<Goal>> {
        let Some((head, tail)) = goals.split_first() else {
            return BTreeSet::from([Vec::new()]);
        };
        let heads: BTreeSet<Vec<Goal>> = reductions(head).into_iter().map(|(_, subs)| subs).collect();
        if heads.is_empty() {
            return BTreeSet::new();
        }
        let tails = go(tail);
        let mut out = BTreeSet::new();
        for h in &heads {
            for t in &tails {
                let mut next = h.clone();
                next.extend(t.iter().cloned());
                out.insert(next);
            }
        }
        out
    }
    go(&state.0).into_iter().map(State).collect()
}

/// The destructor: every subgoal set an applicable operator produces.
pub fn destruct(goal: &Goal) -> BTreeSet<BTreeSet<Goal>> {
    reductions(goal)
        .into_iter()
        .map(|(_, subs)| subs.into_iter().collect())
        .collect()
}

/// How a state stands with respect to termination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Open,
    /// No goals left.
    #[serde(rename = "Closed-T1")]
    ClosedT1,
    /// Goals left, none reducible.
    #[serde(rename = "Stuck-T2")]
    StuckT2,
}

impl Status {
    pub fn of(state: &State) -> Self {
        if state.is_box() {
            Status::ClosedT1
        } else if state.0.iter().all(|g| operators_for(g).is_empty()) {
            Status::StuckT2
        } else {
            Status::Open
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Open => "Open",
            Status::ClosedT1 => "Closed-T1",
            Status::StuckT2 => "Stuck-T2",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_sequent;

    fn seq(s: &str) -> Goal {
        parse_sequent(s).unwrap()
    }

    fn state(goals: &[&str]) -> State {
        State(goals.iter().map(|s| seq(s)).collect())
    }

    #[test]
    fn imp_left_keeps_the_implication() {
        let op = Operator::left(Schema::ImpL, 0);
        assert_eq!(
            op.apply(&seq("p -> p |- p")).unwrap(),
            vec![seq("p -> p |- p"), seq("p, p -> p |- p")]
        );
    }

    #[test]
    fn axiom_closes_when_conclusion_is_assumed() {
        let op = Operator::left(Schema::Ax, 0);
        assert_eq!(op.apply(&seq("phi, phi -> psi |- phi")).unwrap(), vec![]);
    }

    #[test]
    fn imp_right_moves_antecedent_left() {
        assert_eq!(
            Operator::right(Schema::ImpR).apply(&seq("|- p -> q")).unwrap(),
            vec![seq("p |- q")]
        );
    }

    #[test]
    fn and_right_splits() {
        assert_eq!(
            Operator::right(Schema::AndR).apply(&seq("|- p /\\ q")).unwrap(),
            vec![seq("|- p"), seq("|- q")]
        );
    }

    #[test]
    fn left_rules_add_only_missing_formulas() {
        assert_eq!(
            Operator::left(Schema::AndL, 0).apply(&seq("p /\\ q, p |- r")).unwrap(),
            vec![seq("q, p |- r")]
        );
        assert_eq!(
            Operator::left(Schema::OrL, 1).apply(&seq("r, p \\/ q |- r")).unwrap(),
            vec![seq("p, r |- r"), seq("q, r |- r")]
        );
    }

    #[test]
    fn modus_ponens_sequence() {
        let s0 = state(&["phi, phi -> psi |- psi"]);
        let rho1 = Binding::new(Operator::left(Schema::ImpL, 1), 0);
        let s1 = step_interleave(&s0, &rho1).unwrap();
        assert_eq!(s1, state(&["phi, phi -> psi |- phi", "psi, phi, phi -> psi |- psi"]));
        let s2 = step_interleave(&s1, &Binding::new(Operator::left(Schema::Ax, 0), 0)).unwrap();
        assert_eq!(s2, state(&["psi, phi, phi -> psi |- psi"]));
        let s3 = step_interleave(&s2, &Binding::new(Operator::left(Schema::Ax, 0), 0)).unwrap();
        assert!(s3.is_box());
        assert_eq!(Status::of(&s3), Status::ClosedT1);
    }

    #[test]
    fn bindings_of_contraction_root() {
        let b = applicable_bindings(&state(&["phi, phi -> phi |- phi"]));
        assert_eq!(
            b,
            vec![
                Binding::new(Operator::left(Schema::Ax, 0), 0),
                Binding::new(Operator::left(Schema::ImpL, 1), 0)
            ]
        );
        assert!(applicable_bindings(&State::empty()).is_empty());
        assert!(applicable_bindings(&state(&["p |- q"])).is_empty());
        assert_eq!(Status::of(&state(&["p |- q"])), Status::StuckT2);
    }

    #[test]
    fn misapplied_operator_is_an_error() {
        let err = Operator::left(Schema::Ax, 0).apply(&seq("p |- q")).unwrap_err();
        assert!(matches!(err, ReductionError::NotApplicable { .. }));
        let err = step_interleave(&state(&["p |- p"]), &Binding::new(Operator::left(Schema::Ax, 0), 3));
        assert!(matches!(err, Err(ReductionError::InvalidBinding { .. })));
    }

    #[test]
    fn synchronous_step() {
        let s = state(&["phi, phi -> psi |- phi", "psi, phi, phi -> psi |- psi"]);
        assert!(step_sync(&s).contains(&State::empty()));
        assert_eq!(step_sync(&State::empty()), BTreeSet::from([State::empty()]));
        assert!(step_sync(&state(&["p |- q"])).is_empty());
        assert!(step_sync(&state(&["p |- p", "p |- q"])).is_empty());
    }

    #[test]
    fn destructor() {
        let g = seq("phi, phi -> phi |- phi");
        let d = destruct(&g);
        assert_eq!(d.len(), 2);
        assert!(d.contains(&BTreeSet::new()));
        assert!(d.contains(&BTreeSet::from([g.clone()])));
        assert!(destruct(&seq("p |- q")).is_empty());
        assert!(destruct(&seq("phi, q, r |- phi")).contains(&BTreeSet::new()));
    }

    #[test]
    fn operator_names_round_trip() {
        for text in ["ImpL@2", "AndR", "Ax@0", "OrR2"] {
            assert_eq!(text.parse::<Operator>().unwrap().to_string(), text);
        }
        assert!("ImpL".parse::<Operator>().is_err());
        assert!("AndR@1".parse::<Operator>().is_err());
        assert!("Cut".parse::<Operator>().is_err());
        assert_eq!("ImpL@1#2".parse::<Binding>().unwrap().goal, 2);
    }

    #[test]
    fn binding_wire_form() {
        let b = Binding::new(Operator::left(Schema::ImpL, 1), 0);
        let v = serde_json::to_value(b).unwrap();
        assert_eq!(v, serde_json::json!({"schema": "ImpL", "principal": 1, "goal": 0}));
        assert_eq!(serde_json::from_value::<Binding>(v).unwrap(), b);
        let r: Binding = serde_json::from_value(serde_json::json!({"schema": "AndR", "goal": 2})).unwrap();
        assert_eq!(r, Binding::new(Operator::right(Schema::AndR), 2));
        assert!(serde_json::from_value::<Binding>(serde_json::json!({"schema": "ImpL", "goal": 0})).is_err());
    }
}
