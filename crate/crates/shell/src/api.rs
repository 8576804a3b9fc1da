//! Session protocol operations shared by the HTTP service and the command line.
//! Every operation answers with JSON or an [`ApiError`] that knows its HTTP status.

use std::fmt;

use serde_json::{json, Value};

use reductive::lang::{sequent_from_value, LangError};
use reductive::reduction::Binding;
use reductive::session::{Session, SessionError, SessionStore};
use reductive::space::{unfold, Export, ExportFormat, SpaceNode};
use reductive::tactic::{parse_tactic, TacticError};

/// Deepest space a client may request.
pub const MAX_SPACE_DEPTH: usize = 8;
/// Spaces are cut back a layer at a time until they fit in this many nodes.
pub const MAX_SPACE_NODES: usize = 20_000;
pub const DEFAULT_TACTIC_BUDGET: usize = 3;
pub const MAX_TACTIC_BUDGET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: 400.
    Parse,
    /// 404.
    NotFound,
    /// Stale binding or nothing to undo: 409.
    Conflict,
    /// A tactic with no state-changing run: 422.
    TacticFailed,
    /// 500.
    Internal,
}

impl ErrorKind {
    pub fn status(self) -> u16 {
        match self {
            ErrorKind::Parse => 400,
            ErrorKind::NotFound => 404,
            ErrorKind::Conflict => 409,
            ErrorKind::TacticFailed => 422,
            ErrorKind::Internal => 500,
        }
    }

    fn code(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse-error",
            ErrorKind::NotFound => "not-found",
            ErrorKind::Conflict => "conflict",
            ErrorKind::TacticFailed => "tactic-failed",
            ErrorKind::Internal => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub kind: ErrorKind,
    pub message: String,
    /// Byte offset of a syntax error in the offending text.
    pub position: Option<usize>,
}

impl ApiError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        ApiError {
            kind,
            message: message.into(),
            position: None,
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Parse, message)
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({ "error": self.kind.code(), "message": self.message });
        if let Some(p) = self.position {
            body["position"] = json!(p);
        }
        body
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<LangError> for ApiError {
    fn from(e: LangError) -> Self {
        ApiError {
            kind: ErrorKind::Parse,
            position: e.position(),
            message: e.to_string(),
        }
    }
}

impl From<TacticError> for ApiError {
    fn from(e: TacticError) -> Self {
        ApiError {
            kind: ErrorKind::Parse,
            position: e.position(),
            message: e.to_string(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let kind = match &e {
            SessionError::Lang(inner) => return inner.clone().into(),
            SessionError::StaleBinding { .. } | SessionError::AtRoot => ErrorKind::Conflict,
            SessionError::TacticFailed(_) => ErrorKind::TacticFailed,
            SessionError::NotFound(_) => ErrorKind::NotFound,
            SessionError::Corrupt { .. } | SessionError::Io(_) => ErrorKind::Internal,
        };
        ApiError::new(kind, e.to_string())
    }
}

pub type ApiResult = Result<Value, ApiError>;

/// A binding in wire form, or in the `ImpL@1#0` shorthand.
pub fn binding_from_value(value: &Value) -> Result<Binding, ApiError> {
    match value {
        Value::String(text) => text
            .parse()
            .map_err(|e| ApiError::parse(format!("binding `{text}`: {e}"))),
        other => serde_json::from_value(other.clone()).map_err(|e| ApiError::parse(format!("binding: {e}"))),
    }
}

fn field<'a>(body: &'a Value, name: &str) -> Result<&'a Value, ApiError> {
    body.get(name)
        .ok_or_else(|| ApiError::parse(format!("request body needs a `{name}` field")))
}

pub fn create(store: &SessionStore, body: &Value) -> ApiResult {
    let goal = sequent_from_value(field(body, "goal")?)?;
    Ok(store.create(goal)?.to_json())
}

pub fn show(store: &SessionStore, id: &str) -> ApiResult {
    Ok(store.load(id)?.to_json())
}

pub fn apply(store: &SessionStore, id: &str, body: &Value) -> ApiResult {
    let binding = binding_from_value(field(body, "binding")?)?;
    Ok(store.apply(id, binding)?.to_json())
}

pub fn backtrack(store: &SessionStore, id: &str) -> ApiResult {
    Ok(store.backtrack(id)?.to_json())
}

pub fn tactic(store: &SessionStore, id: &str, body: &Value) -> ApiResult {
    let text = field(body, "expr")?
        .as_str()
        .ok_or_else(|| ApiError::parse("`expr` must be a string"))?;
    let expr = parse_tactic(text)?;
    let budget = match body.get("budget") {
        None | Some(Value::Null) => DEFAULT_TACTIC_BUDGET,
        Some(v) => v
            .as_u64()
            .filter(|b| *b as usize <= MAX_TACTIC_BUDGET)
            .ok_or_else(|| ApiError::parse(format!("`budget` must be an integer in 0..={MAX_TACTIC_BUDGET}")))?
            as usize,
    };
    let before = store.load(id)?.history.len();
    let session = store.run_tactic(id, &expr, budget)?;
    let mut view = session.to_json();
    let applied: Vec<Binding> = session.history[before..].iter().map(|f| f.binding).collect();
    view["applied"] = json!(applied);
    Ok(view)
}

/// The goal a space view is rooted at: goal `index` of the current state, or
/// the session root once the state is closed.
fn space_root(session: &Session, index: Option<usize>) -> Result<reductive::Goal, ApiError> {
    match index {
        Some(i) => session.current.0.get(i).cloned().ok_or_else(|| {
            ApiError::new(
                ErrorKind::Conflict,
                format!("the current state has {} goals, no goal {i}", session.current.len()),
            )
        }),
        None => Ok(session.current.0.first().unwrap_or(&session.root).clone()),
    }
}

/// Unfold to `depth`, backing off a layer at a time past [`MAX_SPACE_NODES`].
pub fn bounded_space(goal: &reductive::Goal, depth: usize) -> (SpaceNode, usize) {
    let mut best = (unfold(goal, 0), 0);
    for d in 1..=depth.min(MAX_SPACE_DEPTH) {
        let node = unfold(goal, d);
        if node.node_count() > MAX_SPACE_NODES {
            break;
        }
        best = (node, d);
    }
    best
}

pub fn parse_depth(raw: Option<&str>, default: usize) -> Result<usize, ApiError> {
    match raw {
        None => Ok(default),
        Some(text) => text
            .parse::<usize>()
            .ok()
            .filter(|d| *d <= MAX_SPACE_DEPTH)
            .ok_or_else(|| ApiError::parse(format!("depth must be an integer in 0..={MAX_SPACE_DEPTH}, got `{text}`"))),
    }
}

/// The space below a session goal, with the depth actually materialised.
pub fn space(store: &SessionStore, id: &str, depth: usize, goal: Option<usize>) -> Result<(SpaceNode, usize), ApiError> {
    let session = store.load(id)?;
    Ok(bounded_space(&space_root(&session, goal)?, depth))
}

pub fn export(
    store: &SessionStore,
    id: &str,
    format: &str,
    depth: usize,
    goal: Option<usize>,
) -> Result<(ExportFormat, String), ApiError> {
    let format: ExportFormat = format.parse().map_err(|e: reductive::space::SpaceError| ApiError::parse(e.to_string()))?;
    let (node, _) = space(store, id, depth, goal)?;
    Ok((format, node.export(format)))
}
