//! Human-steered reduction sessions.
//!
//! A session is a root goal plus a stack of applied bindings. On disk it is an
//! append-only JSON-lines journal of what the user did; loading a session
//! replays the journal from the root, so a journal that no longer replays is
//! detected rather than trusted.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;
use uuid::Uuid;

use crate::lang::{Goal, LangError};
use crate::reduction::{applicable_bindings, step_interleave, Binding, State, Status};
use crate::tactic::{first_run, TacticExpr};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("binding {binding} does not apply to the current state: {reason}")]
    StaleBinding { binding: Binding, reason: String },
    #[error("nothing to undo: the session is at its root")]
    AtRoot,
    #[error("tactic `{0}` has no derivation that changes the state")]
    TacticFailed(String),
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("journal for session {id} is corrupt: {reason}")]
    Corrupt { id: String, reason: String },
    #[error("journal i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    /// The state the binding was applied to.
    pub before: State,
    pub binding: Binding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub id: String,
    pub root: Goal,
    pub history: Vec<Frame>,
    pub current: State,
    /// The binding most recently taken back, until the next forward move.
    pub undone: Option<Binding>,
}

/// One line of a session journal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum JournalEntry {
    Create { id: String, goal: Goal },
    Apply { binding: Binding },
    Backtrack,
    Tactic { expr: String, budget: usize, bindings: Vec<Binding> },
}

impl Session {
    pub fn create(goal: Goal) -> Result<Session, SessionError> {
        Self::with_id(Uuid::new_v4().to_string(), goal)
    }

    fn with_id(id: String, goal: Goal) -> Result<Session, SessionError> {
        goal.require_ipl()?;
        Ok(Session {
            id,
            current: State::singleton(goal.clone()),
            root: goal,
            history: Vec::new(),
            undone: None,
        })
    }

    pub fn status(&self) -> Status {
        Status::of(&self.current)
    }

    pub fn bindings(&self) -> Vec<Binding> {
        applicable_bindings(&self.current)
    }

    pub fn apply(&mut self, binding: Binding) -> Result<(), SessionError> {
        let next = step_interleave(&self.current, &binding).map_err(|e| SessionError::StaleBinding {
            binding,
            reason: e.to_string(),
        })?;
        let before = std::mem::replace(&mut self.current, next);
        self.history.push(Frame { before, binding });
        self.undone = None;
        self.debug_check();
        Ok(())
    }

    /// Undo the last applied binding and return it.
    pub fn backtrack(&mut self) -> Result<Binding, SessionError> {
        let frame = self.history.pop().ok_or(SessionError::AtRoot)?;
        self.current = frame.before;
        self.undone = Some(frame.binding);
        self.debug_check();
        Ok(frame.binding)
    }

    /// Commit the tactic's first closing derivation, or failing that its first
    /// state-changing one, one frame per binding.
    pub fn run_tactic(&mut self, expr: &TacticExpr, budget: usize) -> Result<Vec<Binding>, SessionError> {
        let run = first_run(&self.current, expr, budget).ok_or_else(|| SessionError::TacticFailed(expr.to_string()))?;
        let mut next = self.clone();
        for b in &run {
            next.apply(*b)?;
        }
        *self = next;
        Ok(run)
    }

    /// Replaying the history from the root reproduces every frame and the current state.
    pub fn replay_consistent(&self) -> bool {
        let mut state = State::singleton(self.root.clone());
        for frame in &self.history {
            if frame.before != state {
                return false;
            }
            match step_interleave(&state, &frame.binding) {
                Ok(next) => state = next,
                Err(_) => return false,
            }
        }
        state == self.current
    }

    fn debug_check(&self) {
        debug_assert!(self.replay_consistent(), "session {} diverged from its history", self.id);
    }

    fn replay(&mut self, entry: &JournalEntry) -> Result<(), SessionError> {
        match entry {
            JournalEntry::Create { .. } => Err(SessionError::Corrupt {
                id: self.id.clone(),
                reason: "second create entry".into(),
            }),
            JournalEntry::Apply { binding } => self.apply(*binding),
            JournalEntry::Backtrack => self.backtrack().map(|_| ()),
            JournalEntry::Tactic { bindings, .. } => {
                for b in bindings {
                    self.apply(*b)?;
                }
                Ok(())
            }
        }
    }

    /// The protocol view of the session.
    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "root": self.root.to_json(),
            "state": self.current.0.iter().map(Goal::to_json).collect::<Vec<_>>(),
            "rendered": self.current.0.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "status": self.status(),
            "bindings": self.bindings(),
            "history-length": self.history.len(),
            "undone": self.undone,
        })
    }
}

/// Sessions kept as one journal file each under a directory.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, SessionError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf, SessionError> {
        // Ids are uuids, which also keeps paths inside the store.
        Uuid::parse_str(id).map_err(|_| SessionError::NotFound(id.to_string()))?;
        Ok(self.dir.join(format!("{id}.jsonl")))
    }

    fn append(&self, id: &str, entry: &JournalEntry) -> Result<(), SessionError> {
        let mut file = OpenOptions::new().append(true).open(self.path(id)?)?;
        let mut line = serde_json::to_string(entry).expect("journal entries serialize");
        line.push('\n');
        file.write_all(line.as_bytes())?;
        file.sync_data()?;
        Ok(())
    }

    pub fn create(&self, goal: Goal) -> Result<Session, SessionError> {
        let session = Session::create(goal)?;
        let path = self.path(&session.id)?;
        File::create(&path)?;
        self.append(
            &session.id,
            &JournalEntry::Create {
                id: session.id.clone(),
                goal: session.root.clone(),
            },
        )?;
        Ok(session)
    }

    pub fn journal(&self, id: &str) -> Result<Vec<JournalEntry>, SessionError> {
        let path = self.path(id)?;
        let file = File::open(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => SessionError::NotFound(id.to_string()),
            _ => SessionError::Io(e),
        })?;
        let mut out = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| SessionError::Corrupt {
                id: id.to_string(),
                reason: format!("line {}: {e}", n + 1),
            })?);
        }
        Ok(out)
    }

    /// Rebuild a session by replaying its journal.
    pub fn load(&self, id: &str) -> Result<Session, SessionError> {
        let entries = self.journal(id)?;
        let corrupt = |reason: String| SessionError::Corrupt {
            id: id.to_string(),
            reason,
        };
        let Some((JournalEntry::Create { id: stored, goal }, rest)) = entries.split_first() else {
            return Err(corrupt("journal does not start with create".into()));
        };
        if stored != id {
            return Err(corrupt(format!("journal names session {stored}")));
        }
        let mut session = Session::with_id(id.to_string(), goal.clone())?;
        for (n, entry) in rest.iter().enumerate() {
            session
                .replay(entry)
                .map_err(|e| corrupt(format!("entry {}: {e}", n + 2)))?;
        }
        Ok(session)
    }

    pub fn apply(&self, id: &str, binding: Binding) -> Result<Session, SessionError> {
        let mut s = self.load(id)?;
        s.apply(binding)?;
        self.append(id, &JournalEntry::Apply { binding })?;
        Ok(s)
    }

    pub fn backtrack(&self, id: &str) -> Result<Session, SessionError> {
        let mut s = self.load(id)?;
        s.backtrack()?;
        self.append(id, &JournalEntry::Backtrack)?;
        Ok(s)
    }

    pub fn run_tactic(&self, id: &str, expr: &TacticExpr, budget: usize) -> Result<Session, SessionError> {
        let mut s = self.load(id)?;
        let bindings = s.run_tactic(expr, budget)?;
        self.append(
            id,
            &JournalEntry::Tactic {
                expr: expr.to_string(),
                budget,
                bindings,
            },
        )?;
        Ok(s)
    }

    pub fn list(&self) -> Result<Vec<String>, SessionError> {
        let mut ids: Vec<String> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let id = name.strip_suffix(".jsonl")?;
                Uuid::parse_str(id).ok().map(|_| id.to_string())
            })
            .collect();
        ids.sort();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_sequent;
    use crate::tactic::parse_tactic;

    fn seq(s: &str) -> Goal {
        parse_sequent(s).unwrap()
    }

    fn b(s: &str) -> Binding {
        s.parse().unwrap()
    }

    #[test]
    fn creation_reports_status_and_bindings() {
        let s = Session::create(seq("phi, phi -> psi |- psi")).unwrap();
        assert_eq!(s.status(), Status::Open);
        assert_eq!(s.bindings().len(), 1);
        let s = Session::create(seq("p |- q")).unwrap();
        assert_eq!(s.status(), Status::StuckT2);
        let s = Session::create(seq("p |- p")).unwrap();
        assert_eq!(s.bindings().len(), 1);
        assert!(Session::create(seq("p, q |- p * q")).is_err());
    }

    #[test]
    fn modus_ponens_by_hand() {
        let mut s = Session::create(seq("phi, phi -> psi |- psi")).unwrap();
        for x in ["ImpL@1#0", "Ax@0#0", "Ax@0#0"] {
            s.apply(b(x)).unwrap();
        }
        assert_eq!(s.status(), Status::ClosedT1);
        assert!(matches!(s.apply(b("Ax@0#0")), Err(SessionError::StaleBinding { .. })));
    }

    #[test]
    fn contraction_keeps_growing() {
        let mut s = Session::create(seq("p -> p |- p")).unwrap();
        for n in 1..=6 {
            s.apply(b("ImpL@0#0")).unwrap();
            assert_eq!(s.current.len(), n + 1);
            assert_eq!(s.status(), Status::Open);
        }
    }

    #[test]
    fn backtrack_restores_and_records() {
        let mut s = Session::create(seq("phi, phi -> phi |- phi")).unwrap();
        assert!(matches!(s.backtrack(), Err(SessionError::AtRoot)));
        let before = s.current.clone();
        s.apply(b("ImpL@1#0")).unwrap();
        assert_eq!(s.backtrack().unwrap(), b("ImpL@1#0"));
        assert_eq!(s.current, before);
        assert_eq!(s.undone, Some(b("ImpL@1#0")));
        s.apply(b("Ax@0#0")).unwrap();
        assert_eq!(s.status(), Status::ClosedT1);
        assert_eq!(s.undone, None);
    }

    #[test]
    fn tactics_add_backtrackable_frames() {
        let mut s = Session::create(seq("phi, phi -> psi |- psi")).unwrap();
        let run = s.run_tactic(&parse_tactic("(Ax + ImpL)*").unwrap(), 3).unwrap();
        assert_eq!(run.len(), 3);
        assert_eq!(s.status(), Status::ClosedT1);
        s.backtrack().unwrap();
        assert_eq!(s.current.len(), 1);

        let mut stuck = Session::create(seq("p |- q")).unwrap();
        assert!(matches!(stuck.run_tactic(&parse_tactic("Ax").unwrap(), 1), Err(SessionError::TacticFailed(_))));
        let mut s = Session::create(seq("p |- p")).unwrap();
        assert!(matches!(s.run_tactic(&parse_tactic("Ax*").unwrap(), 0), Err(SessionError::TacticFailed(_))));
        assert!(s.history.is_empty());
    }

    #[test]
    fn journal_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let s = store.create(seq("phi, phi -> psi |- psi")).unwrap();
        store.apply(&s.id, b("ImpL@1#0")).unwrap();
        store.backtrack(&s.id).unwrap();
        let live = store.run_tactic(&s.id, &parse_tactic("ImpL ; Ax").unwrap(), 1).unwrap();
        let loaded = store.load(&s.id).unwrap();
        assert_eq!(loaded.current, live.current);
        assert_eq!(loaded.history, live.history);
        assert_eq!(store.journal(&s.id).unwrap().len(), 4);
        assert_eq!(store.list().unwrap(), vec![s.id.clone()]);
        assert!(matches!(store.load("../etc/passwd"), Err(SessionError::NotFound(_))));
        assert!(matches!(store.load(&Uuid::new_v4().to_string()), Err(SessionError::NotFound(_))));
    }

    #[test]
    fn tampered_journal_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let s = store.create(seq("p |- p")).unwrap();
        let mut f = OpenOptions::new().append(true).open(store.path(&s.id).unwrap()).unwrap();
        writeln!(f, "{}", serde_json::to_string(&JournalEntry::Apply { binding: b("AndR#0") }).unwrap()).unwrap();
        assert!(matches!(store.load(&s.id), Err(SessionError::Corrupt { .. })));
    }
}
