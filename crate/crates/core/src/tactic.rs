//! Tactic expressions `a ::= ρ | a;a | a+a | a*` and their labelled transitions.
//!
//! `transitions` computes every state reachable from a source state by one
//! big-step derivation of an expression, with each `*` allowed a bounded number
//! of unrollings. `derivations` walks the same derivations one at a time, in a
//! fixed order, recording the bindings fired along the way.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use thiserror::Error;

use crate::reduction::{applicable_bindings, step_interleave, step_sync, Binding, Operator, Schema, State};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TacticError {
    #[error("tactic syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
}

impl TacticError {
    pub fn position(&self) -> Option<usize> {
        match self {
            TacticError::Syntax { position, .. } => Some(*position),
            TacticError::UnknownPrimitive(_) => None,
        }
    }
}

/// A primitive action: a schema, optionally pinned to a principal position
/// and/or a goal index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prim {
    pub schema: Schema,
    pub principal: Option<usize>,
    pub goal: Option<usize>,
}

impl Prim {
    pub fn schema(schema: Schema) -> Self {
        Prim {
            schema,
            principal: None,
            goal: None,
        }
    }

    pub fn exact(binding: Binding) -> Self {
        Prim {
            schema: binding.operator.schema,
            principal: binding.operator.principal,
            goal: Some(binding.goal),
        }
    }

    fn admits(&self, b: &Binding) -> bool {
        b.operator.schema == self.schema
            && self.principal.is_none_or(|p| b.operator.principal == Some(p))
            && self.goal.is_none_or(|g| b.goal == g)
    }

    /// The leftmost applicable binding this primitive admits.
    pub fn resolve(&self, state: &State) -> Option<Binding> {
        if let (Some(goal), true) = (self.goal, self.principal.is_some() || !self.schema.has_principal()) {
            let b = Binding::new(
                Operator {
                    schema: self.schema,
                    principal: self.principal,
                },
                goal,
            );
            return b.valid_for(state).then_some(b);
        }
        applicable_bindings(state).into_iter().find(|b| self.admits(b))
    }
}

impl fmt::Display for Prim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.schema)?;
        if let Some(p) = self.principal {
            write!(f, "@{p}")?;
        }
        if let Some(g) = self.goal {
            write!(f, "#{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Prim {
    type Err = TacticError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || TacticError::UnknownPrimitive(s.to_string());
        let (rest, goal) = match s.split_once('#') {
            Some((rest, g)) => (rest, Some(g.parse().map_err(|_| unknown())?)),
            None => (s, None),
        };
        let (name, principal) = match rest.split_once('@') {
            Some((name, p)) => (name, Some(p.parse().map_err(|_| unknown())?)),
            None => (rest, None),
        };
        let schema: Schema = name.parse().map_err(|_| unknown())?;
        if principal.is_some() && !schema.has_principal() {
            return Err(unknown());
        }
        Ok(Prim {
            schema,
            principal,
            goal,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TacticExpr {
    Prim(Prim),
    Seq(Box<TacticExpr>, Box<TacticExpr>),
    Choice(Box<TacticExpr>, Box<TacticExpr>),
    Star(Box<TacticExpr>),
}

impl TacticExpr {
    pub fn prim(schema: Schema) -> Self {
        TacticExpr::Prim(Prim::schema(schema))
    }

    pub fn seq(a: TacticExpr, b: TacticExpr) -> Self {
        TacticExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: TacticExpr, b: TacticExpr) -> Self {
        TacticExpr::Choice(Box::new(a), Box::new(b))
    }

    pub fn star(a: TacticExpr) -> Self {
        TacticExpr::Star(Box::new(a))
    }

    /// `(ρ₁ + … + ρₙ)*` over the given primitives.
    pub fn star_of_choice(prims: impl IntoIterator<Item = Prim>) -> Option<Self> {
        let body = prims
            .into_iter()
            .map(TacticExpr::Prim)
            .reduce(TacticExpr::choice)?;
        Some(TacticExpr::star(body))
    }

    fn precedence(&self) -> u8 {
        match self {
            TacticExpr::Choice(..) => 0,
            TacticExpr::Seq(..) => 1,
            TacticExpr::Star(..) | TacticExpr::Prim(_) => 2,
        }
    }
}

impl fmt::Display for TacticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &TacticExpr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            TacticExpr::Prim(p) => write!(f, "{p}"),
            TacticExpr::Seq(a, b) => {
                wrap(f, a, 1)?;
                f.write_str(" ; ")?;
                wrap(f, b, 2)
            }
            TacticExpr::Choice(a, b) => {
                wrap(f, a, 0)?;
                f.write_str(" + ")?;
                wrap(f, b, 1)
            }
            TacticExpr::Star(a) => {
                wrap(f, a, 2)?;
                f.write_str("*")
            }
        }
    }
}

impl FromStr for TacticExpr {
    type Err = TacticError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tactic(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Semi,
    Plus,
    Star,
    Open,
    Close,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, TacticError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            ';' => Tok::Semi,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '(' => Tok::Open,
            ')' => Tok::Close,
            c if c.is_ascii_alphanumeric() => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '@' || c == '#' || c == '_' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((pos, Tok::Name(name)));
                continue;
            }
            other => {
                return Err(TacticError::Syntax {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        out.push((pos, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn error(&self, expected: &str) -> TacticError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Name(n) => format!("`{n}`"),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Star => "`*`".into(),
            Tok::Open => "`(`".into(),
            Tok::Close => "`)`".into(),
        };
        TacticError::Syntax {
            position: self.pos(),
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn choice(&mut self) -> Result<TacticExpr, TacticError> {
        let mut e = self.seq()?;
        while *self.peek() == Tok::Plus {
            self.at += 1;
            e = TacticExpr::choice(e, self.seq()?);
        }
        Ok(e)
    }

    fn seq(&mut self) -> Result<TacticExpr, TacticError> {
        let mut e = self.postfix()?;
        while *self.peek() == Tok::Semi {
            self.at += 1;
            e = TacticExpr::seq(e, self.postfix()?);
        }
        Ok(e)
    }

    fn postfix(&mut self) -> Result<TacticExpr, TacticError> {
        let mut e = self.atom()?;
        while *self.peek() == Tok::Star {
            self.at += 1;
            e = TacticExpr::star(e);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<TacticExpr, TacticError> {
        match self.peek().clone() {
            Tok::Name(name) => {
                let position = self.pos();
                let prim = name.parse::<Prim>().map_err(|_| TacticError::Syntax {
                    position,
                    message: format!("unknown primitive `{name}`"),
                })?;
                self.at += 1;
                Ok(TacticExpr::Prim(prim))
            }
            Tok::Open => {
                self.at += 1;
                let e = self.choice()?;
                if *self.peek() != Tok::Close {
                    return Err(self.error("`)`"));
                }
                self.at += 1;
                Ok(e)
            }
            _ => Err(self.error("a primitive or `(`")),
        }
    }
}

/// `;` binds tighter than `+`; `*` is postfix; both infix operators associate left.
pub fn parse_tactic(text: &str) -> Result<TacticExpr, TacticError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let e = p.choice()?;
    if *p.peek() != Tok::End {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionReport {
    pub source: State,
    pub label: TacticExpr,
    pub targets: BTreeSet<State>,
    /// Number of distinct derivations, saturating.
    pub derivations: u64,
    /// Some `*` ran out of unrollings while its body could still move.
    pub truncated: bool,
}

type Outcomes = BTreeMap<State, u64>;

struct Semantics<'e> {
    memo: HashMap<(State, *const TacticExpr, usize), (Outcomes, bool)>,
    _exprs: std::marker::PhantomData<&'e TacticExpr>,
}

impl<'e> Semantics<'e> {
    fn run(&mut self, s: &State, a: &'e TacticExpr, budget: usize) -> (Outcomes, bool) {
        match a {
            TacticExpr::Prim(p) => {
                let out = p
                    .resolve(s)
                    .map(|b| (step_interleave(s, &b).expect("resolved bindings are valid"), 1))
                    .into_iter()
                    .collect();
                (out, false)
            }
            TacticExpr::Seq(x, y) => {
                let (mid, mut truncated) = self.run(s, x, budget);
                let mut out = Outcomes::new();
                for (m, c) in mid {
                    let (ends, t) = self.run(&m, y, budget);
                    truncated |= t;
                    for (e, d) in ends {
                        add(&mut out, e, c.saturating_mul(d));
                    }
                }
                (out, truncated)
            }
            TacticExpr::Choice(x, y) => {
                let (mut out, t1) = self.run(s, x, budget);
                let (right, t2) = self.run(s, y, budget);
                for (e, c) in right {
                    add(&mut out, e, c);
                }
                (out, t1 | t2)
            }
            TacticExpr::Star(x) => {
                let key = (s.clone(), a as *const TacticExpr, budget);
                if let Some(hit) = self.memo.get(&key) {
                    return hit.clone();
                }
                let mut out = Outcomes::from([(s.clone(), 1)]);
                let truncated = if budget == 0 {
                    !self.run(s, x, 0).0.is_empty()
                } else {
                    let (mid, mut truncated) = self.run(s, x, budget - 1);
                    for (m, c) in mid {
                        let (ends, t) = self.run(&m, a, budget - 1);
                        truncated |= t;
                        for (e, d) in ends {
                            add(&mut out, e, c.saturating_mul(d));
                        }
                    }
                    truncated
                };
                self.memo.insert(key, (out.clone(), truncated));
                (out, truncated)
            }
        }
    }
}

fn add(out: &mut Outcomes, s: State, c: u64) {
    let slot = out.entry(s).or_insert(0);
    *slot = slot.saturating_add(c);
}

/// All targets of `source` under `label`, each `*` unrolled at most `star_budget`
/// times along any derivation; a `*` at budget `k` runs its body at `k - 1`.
pub fn transitions(source: &State, label: &TacticExpr, star_budget: usize) -> TransitionReport {
    let mut sem = Semantics {
        memo: HashMap::new(),
        _exprs: std::marker::PhantomData,
    };
    let (out, truncated) = sem.run(source, label, star_budget);
    TransitionReport {
        source: source.clone(),
        label: label.clone(),
        derivations: out.values().fold(0u64, |acc, c| acc.saturating_add(*c)),
        targets: out.into_keys().collect(),
        truncated,
    }
}

pub fn reaches_box(goal: &crate::lang::Goal, label: &TacticExpr, star_budget: usize) -> bool {
    transitions(&State::singleton(goal.clone()), label, star_budget)
        .targets
        .contains(&State::empty())
}

/// Enumerate derivations in order: a choice tries its left branch first and a
/// star unrolls before it stops. `visit` sees each end state with the bindings
/// fired to reach it and may stop the walk by returning `Break`.
pub fn derivations(
    source: &State,
    label: &TacticExpr,
    star_budget: usize,
    visit: &mut dyn FnMut(&State, &[Binding]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    type Cont<'c> = &'c mut dyn FnMut(&State, &mut Vec<Binding>) -> ControlFlow<()>;

    fn walk(s: &State, a: &TacticExpr, k: usize, path: &mut Vec<Binding>, cont: Cont<'_>) -> ControlFlow<()> {
        match a {
            TacticExpr::Prim(p) => match p.resolve(s) {
                Some(b) => {
                    let next = step_interleave(s, &b).expect("resolved bindings are valid");
                    path.push(b);
                    let r = cont(&next, path);
                    path.pop();
                    r
                }
                None => ControlFlow::Continue(()),
            },
            TacticExpr::Seq(x, y) => walk(s, x, k, path, &mut |m, path| walk(m, y, k, path, &mut *cont)),
            TacticExpr::Choice(x, y) => {
                walk(s, x, k, path, &mut *cont)?;
                walk(s, y, k, path, cont)
            }
            TacticExpr::Star(x) => {
                if k > 0 {
                    walk(s, x, k - 1, path, &mut |m, path| walk(m, a, k - 1, path, &mut *cont))?;
                }
                cont(s, path)
            }
        }
    }

    walk(source, label, star_budget, &mut Vec::new(), &mut |s, path| visit(s, path))
}

/// How many derivations [`first_run`] inspects before settling for a partial run.
pub const DERIVATION_LIMIT: usize = 1 << 16;

/// The derivation a session commits to: the first reaching `□`, otherwise the
/// first that changes the state. `None` when every derivation is the identity.
pub fn first_run(source: &State, label: &TacticExpr, star_budget: usize) -> Option<Vec<Binding>> {
    let mut first_change: Option<Vec<Binding>> = None;
    let mut closing: Option<Vec<Binding>> = None;
    let mut seen = 0usize;
    let _ = derivations(source, label, star_budget, &mut |s, path| {
        seen += 1;
        if s.is_box() && s != source {
            closing = Some(path.to_vec());
            return ControlFlow::Break(());
        }
        if first_change.is_none() && s != source {
            first_change = Some(path.to_vec());
        }
        if seen >= DERIVATION_LIMIT {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    closing.or(first_change)
}

/// The cartesian product of a list of sets, as a set of choice lists.
pub fn distribute<T: Ord + Clone>(xss: &[BTreeSet<T>]) -> BTreeSet<Vec<T>> {
    let mut acc: BTreeSet<Vec<T>> = BTreeSet::from([Vec::new()]);
    for xs in xss {
        acc = acc
            .iter()
            .flat_map(|prefix| {
                xs.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PentagonFailure {
    pub sample: Vec<State>,
    pub left: BTreeSet<State>,
    pub right: BTreeSet<State>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PentagonReport {
    pub checked: usize,
    pub failures: Vec<PentagonFailure>,
}

impl PentagonReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Both sides of `β∘α = Sα∘λ∘Tβ` with `α` concatenation, `β` the synchronous
/// step and `λ` [`distribute`].
pub fn pentagon_sides(sample: &[State]) -> (BTreeSet<State>, BTreeSet<State>) {
    let left = step_sync(&State::concat(sample));
    let pointwise: Vec<BTreeSet<State>> = sample.iter().map(step_sync).collect();
    let right = distribute(&pointwise)
        .iter()
        .map(|parts| State::concat(parts))
        .collect();
    (left, right)
}

pub fn check_pentagon(samples: &[Vec<State>]) -> PentagonReport {
    let failures = samples
        .iter()
        .filter_map(|sample| {
            let (left, right) = pentagon_sides(sample);
            (left != right).then(|| PentagonFailure {
                sample: sample.clone(),
                left,
                right,
            })
        })
        .collect();
    PentagonReport {
        checked: samples.len(),
        failures,
    }
}
