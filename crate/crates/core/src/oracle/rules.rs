//! The forward calculus as data: one entry per rule, with its principal formula,
//! conclusion and premisses written as patterns over formula variables.
//! Matching and instantiation here know nothing of how operators are coded.

use std::collections::BTreeMap;

use crate::lang::{Formula, Goal, Sequent};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pat {
    Var(&'static str),
    Top,
    Bottom,
    And(Box<Pat>, Box<Pat>),
    Or(Box<Pat>, Box<Pat>),
    Imp(Box<Pat>, Box<Pat>),
}

fn var(name: &'static str) -> Pat {
    Pat::Var(name)
}

fn and(a: Pat, b: Pat) -> Pat {
    Pat::And(Box::new(a), Box::new(b))
}

fn or(a: Pat, b: Pat) -> Pat {
    Pat::Or(Box::new(a), Box::new(b))
}

fn imp(a: Pat, b: Pat) -> Pat {
    Pat::Imp(Box::new(a), Box::new(b))
}

type Env = BTreeMap<&'static str, Formula>;

impl Pat {
    fn matches(&self, f: &Formula, env: &mut Env) -> bool {
        match (self, f) {
            (Pat::Var(v), f) => match env.get(v) {
                Some(bound) => bound == f,
                None => {
                    env.insert(v, f.clone());
                    true
                }
            },
            (Pat::Top, Formula::Top) | (Pat::Bottom, Formula::Bottom) => true,
            (Pat::And(p, q), Formula::And(a, b)) | (Pat::Or(p, q), Formula::Or(a, b)) | (Pat::Imp(p, q), Formula::Imp(a, b)) => {
                p.matches(a, env) && q.matches(b, env)
            }
            _ => false,
        }
    }

    fn build(&self, env: &Env) -> Formula {
        match self {
            Pat::Var(v) => env[v].clone(),
            Pat::Top => Formula::Top,
            Pat::Bottom => Formula::Bottom,
            Pat::And(a, b) => Formula::and(a.build(env), b.build(env)),
            Pat::Or(a, b) => Formula::or(a.build(env), b.build(env)),
            Pat::Imp(a, b) => Formula::imp(a.build(env), b.build(env)),
        }
    }
}

/// How a premiss context arises from the conclusion's context `Γ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CtxOp {
    Same,
    /// `Γ` with these formulas assumed in front, skipping any already present.
    Extend(Vec<Pat>),
    /// As `Extend`, after deleting the principal formula from `Γ`.
    RemovePrincipalExtend(Vec<Pat>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForwardRule {
    pub name: &'static str,
    /// Pattern for a formula of the conclusion's context, for left rules.
    pub principal: Option<Pat>,
    pub conclusion: Pat,
    pub premises: Vec<(CtxOp, Pat)>,
}

fn rule(name: &'static str, principal: Option<Pat>, conclusion: Pat, premises: Vec<(CtxOp, Pat)>) -> ForwardRule {
    ForwardRule {
        name,
        principal,
        conclusion,
        premises,
    }
}

/// The intuitionistic sequent calculus the reduction operators invert.
pub fn forward_rules() -> Vec<ForwardRule> {
    use CtxOp::*;
    vec![
        rule("id", Some(var("A")), var("A"), vec![]),
        rule("bot-left", Some(Pat::Bottom), var("C"), vec![]),
        rule("top-right", None, Pat::Top, vec![]),
        rule("and-right", None, and(var("A"), var("B")), vec![(Same, var("A")), (Same, var("B"))]),
        rule(
            "and-left",
            Some(and(var("A"), var("B"))),
            var("C"),
            vec![(RemovePrincipalExtend(vec![var("A"), var("B")]), var("C"))],
        ),
        rule("or-right-1", None, or(var("A"), var("B")), vec![(Same, var("A"))]),
        rule("or-right-2", None, or(var("A"), var("B")), vec![(Same, var("B"))]),
        rule(
            "or-left",
            Some(or(var("A"), var("B"))),
            var("C"),
            vec![
                (RemovePrincipalExtend(vec![var("A")]), var("C")),
                (RemovePrincipalExtend(vec![var("B")]), var("C")),
            ],
        ),
        rule("imp-right", None, imp(var("A"), var("B")), vec![(Extend(vec![var("A")]), var("B"))]),
        rule(
            "imp-left",
            Some(imp(var("A"), var("B"))),
            var("C"),
            vec![(Same, var("A")), (Extend(vec![var("B")]), var("C"))],
        ),
    ]
}

fn extended(base: &[Formula], front: &[Formula]) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for f in front {
        if !base.contains(f) && !out.contains(f) {
            out.push(f.clone());
        }
    }
    out.extend_from_slice(base);
    out
}

/// Every instance of `rule` with conclusion `goal`, as premiss lists.
fn instances(rule: &ForwardRule, goal: &Goal) -> Vec<Vec<Goal>> {
    let positions: Vec<Option<usize>> = match rule.principal {
        Some(_) => (0..goal.context.len()).map(Some).collect(),
        None => vec![None],
    };
    let mut out = Vec::new();
    for pos in positions {
        let mut env = Env::new();
        if let (Some(p), Some(i)) = (&rule.principal, pos) {
            if !p.matches(&goal.context[i], &mut env) {
                continue;
            }
        }
        if !rule.conclusion.matches(&goal.conclusion, &mut env) {
            continue;
        }
        let premisses = rule
            .premises
            .iter()
            .map(|(op, concl)| {
                let context = match op {
                    CtxOp::Same => goal.context.clone(),
                    CtxOp::Extend(front) => {
                        extended(&goal.context, &front.iter().map(|p| p.build(&env)).collect::<Vec<_>>())
                    }
                    CtxOp::RemovePrincipalExtend(front) => {
                        let mut rest = goal.context.clone();
                        rest.remove(pos.expect("rule with a principal"));
                        extended(&rest, &front.iter().map(|p| p.build(&env)).collect::<Vec<_>>())
                    }
                };
                Sequent::new(context, concl.build(&env))
            })
            .collect();
        out.push(premisses);
    }
    out
}

/// Every rule instance concluding `goal`, named by rule.
pub fn instances_concluding(rules: &[ForwardRule], goal: &Goal) -> Vec<(&'static str, Vec<Goal>)> {
    rules
        .iter()
        .flat_map(|r| instances(r, goal).into_iter().map(move |ps| (r.name, ps)))
        .collect()
}

/// The name of a rule having `premisses` (in order) over `conclusion`.
pub fn is_instance(rules: &[ForwardRule], premisses: &[Goal], conclusion: &Goal) -> Option<&'static str> {
    rules
        .iter()
        .find(|r| instances(r, conclusion).iter().any(|ps| ps == premisses))
        .map(|r| r.name)
}
