//! An independent decision procedure for intuitionistic propositional sequents,
//! and the harness that holds the reduction engine up against it.
//!
//! The procedure is Dyckhoff's contraction-free calculus: the only
//! non-invertible steps are choosing a disjunct and the left rule for a nested
//! implication `(A -> B) -> C`, and every rule makes the sequent smaller in a
//! well-founded order, so backward search terminates without loop checks.

mod harness;
mod rules;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::lang::{Formula, LangError, Sequent};

pub use harness::{
    check_adequacy, check_adequacy_with, check_completeness, check_faithfulness, check_faithfulness_with,
    check_soundness, engine_proves, harness_strategy, Disagreement, HarnessReport, OperatorSource,
};
pub use rules::{forward_rules, instances_concluding, is_instance, CtxOp, ForwardRule, Pat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DecisionProcedure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub valid: bool,
    pub method: Method,
    /// An indented derivation in the contraction-free calculus, when valid.
    pub certificate: Option<String>,
}

type Ctx = BTreeSet<Formula>;

/// Memoised prover; reuse one across many queries to share work.
#[derive(Default)]
pub struct Oracle {
    memo: HashMap<(Ctx, Formula), bool>,
}

enum Step {
    Done(&'static str),
    /// All premisses must hold.
    All(&'static str, Vec<(Ctx, Formula)>),
}

fn imp(a: &Formula, b: &Formula) -> Formula {
    Formula::imp(a.clone(), b.clone())
}

fn without(ctx: &Ctx, f: &Formula) -> Ctx {
    let mut c = ctx.clone();
    c.remove(f);
    c
}

fn with(mut ctx: Ctx, fs: impl IntoIterator<Item = Formula>) -> Ctx {
    ctx.extend(fs);
    ctx
}

/// The invertible step applicable to a sequent, if any.
fn invertible(ctx: &Ctx, goal: &Formula) -> Option<Step> {
    if ctx.contains(goal) {
        return Some(Step::Done("id"));
    }
    if ctx.contains(&Formula::Bottom) {
        return Some(Step::Done("bot-left"));
    }
    if *goal == Formula::Top {
        return Some(Step::Done("top-right"));
    }
    for f in ctx {
        let rest = || without(ctx, f);
        let step = match f {
            Formula::Top => Step::All("top-left", vec![(rest(), goal.clone())]),
            Formula::And(a, b) => Step::All("and-left", vec![(with(rest(), [(**a).clone(), (**b).clone()]), goal.clone())]),
            Formula::Or(a, b) => Step::All(
                "or-left",
                vec![
                    (with(rest(), [(**a).clone()]), goal.clone()),
                    (with(rest(), [(**b).clone()]), goal.clone()),
                ],
            ),
            Formula::Imp(a, b) => match &**a {
                Formula::Atom(_) if ctx.contains(&**a) => Step::All("atom-imp-left", vec![(with(rest(), [(**b).clone()]), goal.clone())]),
                Formula::Top => Step::All("top-imp-left", vec![(with(rest(), [(**b).clone()]), goal.clone())]),
                Formula::Bottom => Step::All("bot-imp-left", vec![(rest(), goal.clone())]),
                Formula::And(c, d) => Step::All("and-imp-left", vec![(with(rest(), [imp(c, &imp(d, b))]), goal.clone())]),
                Formula::Or(c, d) => Step::All("or-imp-left", vec![(with(rest(), [imp(c, b), imp(d, b)]), goal.clone())]),
                _ => continue,
            },
            _ => continue,
        };
        return Some(step);
    }
    match goal {
        Formula::And(a, b) => Some(Step::All("and-right", vec![(ctx.clone(), (**a).clone()), (ctx.clone(), (**b).clone())])),
        Formula::Imp(a, b) => Some(Step::All("imp-right", vec![(with(ctx.clone(), [(**a).clone()]), (**b).clone())])),
        _ => None,
    }
}

/// The non-invertible alternatives, each a list of premisses.
fn choices(ctx: &Ctx, goal: &Formula) -> Vec<(&'static str, Vec<(Ctx, Formula)>)> {
    let mut out = Vec::new();
    if let Formula::Or(a, b) = goal {
        out.push(("or-right-1", vec![(ctx.clone(), (**a).clone())]));
        out.push(("or-right-2", vec![(ctx.clone(), (**b).clone())]));
    }
    for f in ctx {
        if let Formula::Imp(ab, c) = f {
            if let Formula::Imp(a, b) = &**ab {
                let rest = without(ctx, f);
                out.push((
                    "imp-imp-left",
                    vec![
                        (with(rest.clone(), [imp(b, c)]), imp(a, b)),
                        (with(rest, [(**c).clone()]), goal.clone()),
                    ],
                ));
            }
        }
    }
    out
}

impl Oracle {
    pub fn new() -> Self {
        Oracle::default()
    }

    fn prove(&mut self, ctx: &Ctx, goal: &Formula) -> bool {
        let key = (ctx.clone(), goal.clone());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = match invertible(ctx, goal) {
            Some(Step::Done(_)) => true,
            Some(Step::All(_, premisses)) => premisses.iter().all(|(c, g)| self.prove(c, g)),
            None => choices(ctx, goal)
                .iter()
                .any(|(_, premisses)| premisses.iter().all(|(c, g)| self.prove(c, g))),
        };
        self.memo.insert(key, v);
        v
    }

    fn certify(&mut self, ctx: &Ctx, goal: &Formula, indent: usize, out: &mut String) {
        let line = |out: &mut String, rule: &str| {
            let ctx_text: Vec<String> = ctx.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{:indent$}{} |- {}   [{rule}]", "", ctx_text.join(", "), goal);
        };
        let premisses = match invertible(ctx, goal) {
            Some(Step::Done(rule)) => {
                line(out, rule);
                return;
            }
            Some(Step::All(rule, premisses)) => (rule, premisses),
            None => choices(ctx, goal)
                .into_iter()
                .find(|(_, ps)| ps.iter().all(|(c, g)| self.prove(c, g)))
                .expect("certify is only called on provable sequents"),
        };
        line(out, premisses.0);
        for (c, g) in &premisses.1 {
            self.certify(c, g, indent + 2, out);
        }
    }

    pub fn valid(&mut self, s: &Sequent) -> Result<bool, LangError> {
        s.require_ipl()?;
        Ok(self.prove(&s.context.iter().cloned().collect(), &s.conclusion))
    }

    pub fn decide(&mut self, s: &Sequent) -> Result<Verdict, LangError> {
        let valid = self.valid(s)?;
        let certificate = valid.then(|| {
            let mut text = String::new();
            self.certify(&s.context.iter().cloned().collect(), &s.conclusion, 0, &mut text);
            text
        });
        Ok(Verdict {
            valid,
            method: Method::DecisionProcedure,
            certificate,
        })
    }
}

/// Decide intuitionistic validity of an IPL sequent.
pub fn decide_ipl(s: &Sequent) -> Result<Verdict, LangError> {
    Oracle::new().decide(s)
}
