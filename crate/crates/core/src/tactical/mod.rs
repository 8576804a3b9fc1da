//! Tactical proof in Milner's sense: goals are witnessed by events, a tactic
//! reduces a goal to subgoals together with a procedure turning events for the
//! subgoals into an event for the goal, and a tactic is valid when that
//! procedure always succeeds.
//!
//! Validity quantifies over every event, so the checkers here are bounded
//! falsifiers: they either exhibit a counterexample or report that none exists
//! within the bound.

mod meeting;
mod milner;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

pub use meeting::{
    evening_tactic, meeting_instance, meeting_operator, meeting_tactic, MeetingEvent, MeetingGoal, MeetingInstance,
    Person, Place, Time,
};
pub use milner::{milner_instance, milner_operator, milner_tactic, Consequence, MilnerInstance};

/// A named partial map from event lists to events.
pub struct Procedure<E> {
    pub name: String,
    run: Arc<dyn Fn(&[E]) -> Option<E> + Send + Sync>,
}

impl<E> Clone for Procedure<E> {
    fn clone(&self) -> Self {
        Procedure {
            name: self.name.clone(),
            run: Arc::clone(&self.run),
        }
    }
}

impl<E> fmt::Debug for Procedure<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Procedure({})", self.name)
    }
}

impl<E> Procedure<E> {
    pub fn new(name: impl Into<String>, run: impl Fn(&[E]) -> Option<E> + Send + Sync + 'static) -> Self {
        Procedure {
            name: name.into(),
            run: Arc::new(run),
        }
    }

    pub fn apply(&self, events: &[E]) -> Option<E> {
        (self.run)(events)
    }
}

/// The data a validity check ranges over.
pub trait TacticalInstance {
    type Goal: Clone + fmt::Debug + fmt::Display;
    type Event: Clone + fmt::Debug + fmt::Display;

    /// The goal universe, in a fixed order.
    fn goals(&self) -> Vec<Self::Goal>;
    fn is_event(&self, e: &Self::Event) -> bool;
    fn achieves(&self, goal: &Self::Goal, e: &Self::Event) -> bool;
    /// Every event achieving `goal`, in a fixed order.
    fn achieving_events(&self, goal: &Self::Goal) -> Vec<Self::Event>;
    /// The whole procedure set.
    fn procedures(&self) -> Vec<Procedure<Self::Event>>;

    /// The procedures that could possibly produce an event achieving `goal`.
    /// Leaving out a procedure is only allowed when it never could.
    fn candidate_procedures(&self, _goal: &Self::Goal) -> Vec<Procedure<Self::Event>> {
        self.procedures()
    }
}

type Reduce<G, E> = dyn Fn(&G) -> Option<(Vec<G>, Procedure<E>)> + Send + Sync;

/// A partial map from a goal to subgoals and the procedure justifying them.
pub struct Tactic<G, E> {
    pub name: String,
    reduce: Arc<Reduce<G, E>>,
}

impl<G, E> Clone for Tactic<G, E> {
    fn clone(&self) -> Self {
        Tactic {
            name: self.name.clone(),
            reduce: Arc::clone(&self.reduce),
        }
    }
}

impl<G: 'static, E: 'static> Tactic<G, E> {
    pub fn new(name: impl Into<String>, reduce: impl Fn(&G) -> Option<(Vec<G>, Procedure<E>)> + Send + Sync + 'static) -> Self {
        Tactic {
            name: name.into(),
            reduce: Arc::new(reduce),
        }
    }

    pub fn apply(&self, goal: &G) -> Option<(Vec<G>, Procedure<E>)> {
        (self.reduce)(goal)
    }

    /// The reduction operator underneath, with the procedure forgotten.
    pub fn operator(&self) -> GoalOperator<G> {
        let reduce = Arc::clone(&self.reduce);
        GoalOperator::new(self.name.clone(), move |g| reduce(g).map(|(subs, _)| subs))
    }

    /// Apply `self`, then `next` to every resulting subgoal. Undefined when
    /// `next` is undefined on any of them.
    pub fn then(&self, next: &Tactic<G, E>) -> Tactic<G, E> {
        let first = Arc::clone(&self.reduce);
        let second = Arc::clone(&next.reduce);
        Tactic::new(format!("{} THEN {}", self.name, next.name), move |g| {
            let (mids, outer) = first(g)?;
            let mut subgoals = Vec::new();
            let mut inner = Vec::with_capacity(mids.len());
            for m in &mids {
                let (subs, proc) = second(m)?;
                inner.push((subs.len(), proc));
                subgoals.extend(subs);
            }
            let name = format!("{}∘[{}]", outer.name, inner.iter().map(|(_, p)| p.name.as_str()).collect::<Vec<_>>().join(","));
            let proc = Procedure::new(name, move |events: &[E]| {
                let mut rest = events;
                let mut mid_events = Vec::with_capacity(inner.len());
                for (n, p) in &inner {
                    if rest.len() < *n {
                        return None;
                    }
                    let (now, later) = rest.split_at(*n);
                    mid_events.push(p.apply(now)?);
                    rest = later;
                }
                if !rest.is_empty() {
                    return None;
                }
                outer.apply(&mid_events)
            });
            Some((subgoals, proc))
        })
    }
}

/// A partial map from a goal to subgoals.
pub struct GoalOperator<G> {
    pub name: String,
    map: Arc<dyn Fn(&G) -> Option<Vec<G>> + Send + Sync>,
}

impl<G> GoalOperator<G> {
    pub fn new(name: impl Into<String>, map: impl Fn(&G) -> Option<Vec<G>> + Send + Sync + 'static) -> Self {
        GoalOperator {
            name: name.into(),
            map: Arc::new(map),
        }
    }

    pub fn apply(&self, goal: &G) -> Option<Vec<G>> {
        (self.map)(goal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ValidityStatus {
    #[serde(rename = "Valid-within-bound")]
    ValidWithinBound,
    Counterexample,
}

#[derive(Debug, Clone)]
pub struct Witness<G, E> {
    pub goal: G,
    pub events: Vec<E>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ValidityVerdict<G, E> {
    pub status: ValidityStatus,
    pub witness: Option<Witness<G, E>>,
    /// Goal and event-tuple pairs examined.
    pub checked: usize,
    /// Goals in the domain examined.
    pub goals: usize,
}

impl<G: fmt::Display, E: fmt::Display> ValidityVerdict<G, E> {
    pub fn is_valid_within_bound(&self) -> bool {
        self.status == ValidityStatus::ValidWithinBound
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status,
            "checked": self.checked,
            "goals": self.goals,
            "witness": self.witness.as_ref().map(|w| json!({
                "goal": w.goal.to_string(),
                "events": w.events.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "reason": w.reason,
            })),
        })
    }
}

/// Every choice of one element per list, in odometer order.
struct Tuples<'a, E> {
    lists: &'a [Vec<E>],
    next: Option<Vec<usize>>,
}

impl<'a, E: Clone> Tuples<'a, E> {
    fn new(lists: &'a [Vec<E>]) -> Self {
        let next = lists.iter().all(|l| !l.is_empty()).then(|| vec![0; lists.len()]);
        Tuples { lists, next }
    }
}

impl<E: Clone> Iterator for Tuples<'_, E> {
    type Item = Vec<E>;

    fn next(&mut self) -> Option<Vec<E>> {
        let idx = self.next.take()?;
        let tuple = idx.iter().zip(self.lists).map(|(&i, l)| l[i].clone()).collect();
        let mut advanced = idx;
        for k in (0..advanced.len()).rev() {
            advanced[k] += 1;
            if advanced[k] < self.lists[k].len() {
                self.next = Some(advanced);
                return Some(tuple);
            }
            advanced[k] = 0;
        }
        Some(tuple)
    }
}

/// Walk the domain of `reduce` up to `bound` goals and, per goal, every tuple
/// of achieving events (at most `bound` per subgoal). `judge` returns a reason
/// when a tuple refutes validity.
fn falsify<I, X>(
    inst: &I,
    bound: usize,
    reduce: impl Fn(&I::Goal) -> Option<(Vec<I::Goal>, X)>,
    judge: impl Fn(&I::Goal, &X, &[I::Event]) -> Option<String>,
) -> ValidityVerdict<I::Goal, I::Event>
where
    I: TacticalInstance + ?Sized,
{
    let mut checked = 0;
    let mut goals = 0;
    for goal in inst.goals() {
        if goals >= bound {
            break;
        }
        let Some((subgoals, x)) = reduce(&goal) else {
            continue;
        };
        goals += 1;
        let lists: Vec<Vec<I::Event>> = subgoals
            .iter()
            .map(|s| {
                let mut events = inst.achieving_events(s);
                events.truncate(bound);
                events
            })
            .collect();
        for tuple in Tuples::new(&lists) {
            checked += 1;
            if let Some(reason) = judge(&goal, &x, &tuple) {
                return ValidityVerdict {
                    status: ValidityStatus::Counterexample,
                    witness: Some(Witness {
                        goal,
                        events: tuple,
                        reason,
                    }),
                    checked,
                    goals,
                };
            }
        }
    }
    ValidityVerdict {
        status: ValidityStatus::ValidWithinBound,
        witness: None,
        checked,
        goals,
    }
}

fn tactic_failure<I: TacticalInstance + ?Sized>(
    inst: &I,
    goal: &I::Goal,
    proc: &Procedure<I::Event>,
    events: &[I::Event],
) -> Option<String> {
    match proc.apply(events) {
        None => Some(format!("{} is undefined on these events", proc.name)),
        Some(e) if !inst.achieves(goal, &e) => Some(format!("{} yields {e}, which does not achieve the goal", proc.name)),
        Some(_) => None,
    }
}

/// Search for a goal and achieving events on which the tactic's procedure
/// fails to produce an event achieving the goal.
pub fn check_tactic_validity<I>(
    inst: &I,
    tactic: &Tactic<I::Goal, I::Event>,
    bound: usize,
) -> ValidityVerdict<I::Goal, I::Event>
where
    I: TacticalInstance + ?Sized,
    I::Goal: 'static,
    I::Event: 'static,
{
    falsify(inst, bound, |g| tactic.apply(g), |g, proc, events| tactic_failure(inst, g, proc, events))
}

/// As [`check_tactic_validity`], but a tuple refutes only when no procedure of
/// the instance turns it into an event achieving the goal.
pub fn check_operator_validity<I>(inst: &I, rho: &GoalOperator<I::Goal>, bound: usize) -> ValidityVerdict<I::Goal, I::Event>
where
    I: TacticalInstance + ?Sized,
{
    falsify(
        inst,
        bound,
        |g| rho.apply(g).map(|subs| (subs, inst.candidate_procedures(g))),
        |g, candidates, events| {
            let rescued = candidates
                .iter()
                .any(|p| p.apply(events).is_some_and(|e| inst.achieves(g, &e)));
            (!rescued).then(|| format!("no procedure among {} candidates succeeds", candidates.len()))
        },
    )
}

fn achieves_pointwise<I: TacticalInstance + ?Sized>(inst: &I, subgoals: &[I::Goal], events: &[I::Event]) -> bool {
    subgoals.len() == events.len()
        && subgoals
            .iter()
            .zip(events)
            .all(|(g, e)| inst.is_event(e) && inst.achieves(g, e))
}

/// Re-evaluate a tactic counterexample from the definition alone.
pub fn recheck_tactic_witness<I>(inst: &I, tactic: &Tactic<I::Goal, I::Event>, w: &Witness<I::Goal, I::Event>) -> bool
where
    I: TacticalInstance + ?Sized,
    I::Goal: 'static,
    I::Event: 'static,
{
    let Some((subgoals, proc)) = tactic.apply(&w.goal) else {
        return false;
    };
    achieves_pointwise(inst, &subgoals, &w.events)
        && match proc.apply(&w.events) {
            None => true,
            Some(e) => !inst.achieves(&w.goal, &e),
        }
}

/// Re-evaluate an operator counterexample against the full procedure set.
pub fn recheck_operator_witness<I>(inst: &I, rho: &GoalOperator<I::Goal>, w: &Witness<I::Goal, I::Event>) -> bool
where
    I: TacticalInstance + ?Sized,
{
    let Some(subgoals) = rho.apply(&w.goal) else {
        return false;
    };
    achieves_pointwise(inst, &subgoals, &w.events)
        && inst
            .procedures()
            .iter()
            .all(|p| p.apply(&w.events).is_none_or(|e| !inst.achieves(&w.goal, &e)))
}
