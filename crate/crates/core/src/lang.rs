//! Formulas and sequents: abstract syntax, the ASCII concrete syntax, and the
//! canonical JSON encoding shared by the CLI, the session service and the UI.
//!
//! Concrete grammar, loosest binding first:
//!
//! ```text
//! sequent := [formula {"," formula}] "|-" formula
//! formula := disj ["->" formula]          (right associative)
//! disj    := conj {"\/" conj}             (left associative)
//! conj    := unit {("/\" | "*") unit}     (left associative, one level)
//! unit    := ident | "T" | "F" | "(" formula ")"
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("fragment mix: `*` cannot occur together with `->`, `/\\` or `\\/`")]
    FragmentMix,
    #[error("{0}")]
    Fragment(String),
    #[error("malformed json: {0}")]
    Json(String),
}

impl LangError {
    fn syntax(position: usize, message: impl Into<String>) -> Self {
        LangError::Syntax {
            position,
            message: message.into(),
        }
    }

    /// Byte offset of a syntax error, if this is one.
    pub fn position(&self) -> Option<usize> {
        match self {
            LangError::Syntax { position, .. } => Some(*position),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Top,
    Bottom,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Star(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn imp(l: Formula, r: Formula) -> Self {
        Formula::Imp(Box::new(l), Box::new(r))
    }

    pub fn star(l: Formula, r: Formula) -> Self {
        Formula::Star(Box::new(l), Box::new(r))
    }

    /// Number of binary connectives.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bottom => 0,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) | Formula::Star(l, r) => {
                1 + l.size() + r.size()
            }
        }
    }

    pub fn contains_star(&self) -> bool {
        match self {
            Formula::Star(..) => true,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.contains_star() || r.contains_star()
            }
            _ => false,
        }
    }

    /// True if an additive connective (`->`, `/\`, `\/`) occurs.
    pub fn contains_additive(&self) -> bool {
        match self {
            Formula::And(..) | Formula::Or(..) | Formula::Imp(..) => true,
            Formula::Star(l, r) => l.contains_additive() || r.contains_additive(),
            _ => false,
        }
    }

    /// Atoms and `*` only: the multiplicative fragment.
    pub fn is_multiplicative(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Star(l, r) => l.is_multiplicative() && r.is_multiplicative(),
            _ => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Imp(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) | Formula::Star(..) => 3,
            _ => 4,
        }
    }

    fn write_prec(&self, out: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            out.write_str("(")?;
        }
        match self {
            Formula::Atom(name) => out.write_str(name)?,
            Formula::Top => out.write_str("T")?,
            Formula::Bottom => out.write_str("F")?,
            Formula::Imp(l, r) => {
                l.write_prec(out, 2)?;
                out.write_str(" -> ")?;
                r.write_prec(out, 1)?;
            }
            Formula::Or(l, r) => {
                l.write_prec(out, 2)?;
                out.write_str(" \\/ ")?;
                r.write_prec(out, 3)?;
            }
            Formula::And(l, r) | Formula::Star(l, r) => {
                l.write_prec(out, 3)?;
                out.write_str(if matches!(self, Formula::And(..)) {
                    " /\\ "
                } else {
                    " * "
                })?;
                r.write_prec(out, 4)?;
            }
        }
        if parens {
            out.write_str(")")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let bin = |op: &str, l: &Formula, r: &Formula| json!({"op": op, "l": l.to_json(), "r": r.to_json()});
        match self {
            Formula::Atom(name) => json!({ "atom": name }),
            Formula::Top => json!({"op": "top"}),
            Formula::Bottom => json!({"op": "bot"}),
            Formula::And(l, r) => bin("and", l, r),
            Formula::Or(l, r) => bin("or", l, r),
            Formula::Imp(l, r) => bin("imp", l, r),
            Formula::Star(l, r) => bin("star", l, r),
        }
    }

    pub fn from_json(value: &Value) -> Result<Self, LangError> {
        let obj = value
            .as_object()
            .ok_or_else(|| LangError::Json("formula must be an object".into()))?;
        if let Some(atom) = obj.get("atom") {
            let name = atom
                .as_str()
                .ok_or_else(|| LangError::Json("atom name must be a string".into()))?;
            if !is_identifier(name) {
                return Err(LangError::Json(format!("invalid atom name `{name}`")));
            }
            return Ok(Formula::atom(name));
        }
        let op = obj
            .get("op")
            .and_then(Value::as_str)
            .ok_or_else(|| LangError::Json("formula needs `atom` or `op`".into()))?;
        let side = |key: &str| -> Result<Box<Formula>, LangError> {
            obj.get(key)
                .ok_or_else(|| LangError::Json(format!("`{op}` node is missing `{key}`")))
                .and_then(Formula::from_json)
                .map(Box::new)
        };
        Ok(match op {
            "top" => Formula::Top,
            "bot" => Formula::Bottom,
            "and" => Formula::And(side("l")?, side("r")?),
            "or" => Formula::Or(side("l")?, side("r")?),
            "imp" => Formula::Imp(side("l")?, side("r")?),
            "star" => Formula::Star(side("l")?, side("r")?),
            other => return Err(LangError::Json(format!("unknown op `{other}`"))),
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

impl FromStr for Formula {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Which logic a sequent belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fragment {
    Ipl,
    Multiplicative,
}

/// `context |- conclusion`. The context is an ordered list; duplicates are kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub context: Vec<Formula>,
    pub conclusion: Formula,
}

/// The goals reduction works over.
pub type Goal = Sequent;

impl Sequent {
    pub fn new(context: Vec<Formula>, conclusion: Formula) -> Self {
        Sequent {
            context,
            conclusion,
        }
    }

    pub fn size(&self) -> usize {
        self.context.iter().map(Formula::size).sum::<usize>() + self.conclusion.size()
    }

    fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.context.iter().chain(std::iter::once(&self.conclusion))
    }

    pub fn fragment(&self) -> Result<Fragment, LangError> {
        let star = self.formulas().any(Formula::contains_star);
        let additive = self.formulas().any(Formula::contains_additive);
        match (star, additive) {
            (true, true) => Err(LangError::FragmentMix),
            (true, false) => Ok(Fragment::Multiplicative),
            (false, _) => Ok(Fragment::Ipl),
        }
    }

    pub fn require_ipl(&self) -> Result<(), LangError> {
        match self.fragment()? {
            Fragment::Ipl => Ok(()),
            Fragment::Multiplicative => Err(LangError::Fragment(format!(
                "`{self}` uses `*`, which is outside intuitionistic propositional logic"
            ))),
        }
    }

    pub fn assumes(&self, formula: &Formula) -> bool {
        self.context.contains(formula)
    }

    /// The context read as a set.
    pub fn context_set(&self) -> BTreeSet<&Formula> {
        self.context.iter().collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ctx": self.context.iter().map(Formula::to_json).collect::<Vec<_>>(),
            "goal": self.conclusion.to_json(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self, LangError> {
        let ctx = value
            .get("ctx")
            .and_then(Value::as_array)
            .ok_or_else(|| LangError::Json("sequent needs a `ctx` array".into()))?;
        let goal = value
            .get("goal")
            .ok_or_else(|| LangError::Json("sequent needs a `goal`".into()))?;
        let context = ctx.iter().map(Formula::from_json).collect::<Result<_, _>>()?;
        Ok(Sequent::new(context, Formula::from_json(goal)?))
    }
}

/// `Δ ⊑ Γ`: every formula of `sub` also occurs in `sup`, ignoring order and multiplicity.
pub fn context_included(sub: &[Formula], sup: &[Formula]) -> bool {
    sub.iter().all(|f| sup.contains(f))
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, formula) in self.context.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{formula}")?;
        }
        if self.context.is_empty() {
            f.write_str("|- ")?;
        } else {
            f.write_str(" |- ")?;
        }
        write!(f, "{}", self.conclusion)
    }
}

impl FromStr for Sequent {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sequent(s)
    }
}

macro_rules! json_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                self.to_json().serialize(serializer)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let value = Value::deserialize(deserializer)?;
                <$ty>::from_json(&value).map_err(D::Error::custom)
            }
        }
    };
}

json_serde!(Formula);
json_serde!(Sequent);

/// Render a formula or sequent in the concrete syntax.
pub fn render<T: fmt::Display + ?Sized>(x: &T) -> String {
    x.to_string()
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && s != "T"
        && s != "F"
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Top,
    Bottom,
    Arrow,
    And,
    Or,
    Star,
    LParen,
    RParen,
    Comma,
    Turnstile,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("`{name}`"),
            Token::Top => "`T`".into(),
            Token::Bottom => "`F`".into(),
            Token::Arrow => "`->`".into(),
            Token::And => "`/\\`".into(),
            Token::Or => "`\\/`".into(),
            Token::Star => "`*`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::Turnstile => "`|-`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, LangError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = bytes.get(i..i + 2);
        let (token, width) = match (c, two) {
            (_, Some(b"->")) => (Token::Arrow, 2),
            (_, Some(b"/\\")) => (Token::And, 2),
            (_, Some(b"\\/")) => (Token::Or, 2),
            (_, Some(b"|-")) => (Token::Turnstile, 2),
            (b'*', _) => (Token::Star, 1),
            (b'(', _) => (Token::LParen, 1),
            (b')', _) => (Token::RParen, 1),
            (b',', _) => (Token::Comma, 1),
            (c, _) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                let mut end = i + 1;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_' || bytes[end] == b'\'')
                {
                    end += 1;
                }
                let word = &text[start..end];
                let token = match word {
                    "T" => Token::Top,
                    "F" => Token::Bottom,
                    _ => Token::Ident(word.to_string()),
                };
                (token, end - start)
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(LangError::syntax(i, format!("unexpected character `{ch}`")));
            }
        };
        tokens.push((i, token));
        i += width;
    }
    tokens.push((text.len(), Token::End));
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, LangError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.pos].1.clone();
        if token != Token::End {
            self.pos += 1;
        }
        token
    }

    fn unexpected(&self, wanted: &str) -> LangError {
        LangError::syntax(
            self.offset(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn formula(&mut self) -> Result<Formula, LangError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Token::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LangError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Token::Or {
            self.bump();
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, LangError> {
        let mut acc = self.unit()?;
        loop {
            match self.peek() {
                Token::And => {
                    self.bump();
                    acc = Formula::and(acc, self.unit()?);
                }
                Token::Star => {
                    self.bump();
                    acc = Formula::star(acc, self.unit()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unit(&mut self) -> Result<Formula, LangError> {
        match self.peek().clone() {
            Token::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Token::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Token::Bottom => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Token::LParen => {
                self.bump();
                let inner = self.formula()?;
                if *self.peek() != Token::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn expect_end(&self) -> Result<(), LangError> {
        if *self.peek() == Token::End {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, LangError> {
    let mut parser = Parser::new(text)?;
    let formula = parser.formula()?;
    parser.expect_end()?;
    Ok(formula)
}

/// Parse a sequent and reject one that mixes `*` with additive connectives.
pub fn parse_sequent(text: &str) -> Result<Sequent, LangError> {
    let mut parser = Parser::new(text)?;
    let mut context = Vec::new();
    if *parser.peek() != Token::Turnstile {
        loop {
            context.push(parser.formula()?);
            match parser.peek() {
                Token::Comma => {
                    parser.bump();
                }
                Token::Turnstile => break,
                _ => return Err(parser.unexpected("`,` or `|-`")),
            }
        }
    }
    parser.bump();
    let conclusion = parser.formula()?;
    parser.expect_end()?;
    let sequent = Sequent::new(context, conclusion);
    sequent.fragment()?;
    Ok(sequent)
}

/// Parse either the concrete syntax (a JSON string) or the canonical JSON object.
pub fn sequent_from_value(value: &Value) -> Result<Sequent, LangError> {
    match value {
        Value::String(text) => parse_sequent(text),
        other => {
            let sequent = Sequent::from_json(other)?;
            sequent.fragment()?;
            Ok(sequent)
        }
    }
}
