//! A reductive-logic engine: reduction operators over intuitionistic sequents,
//! their coinductive reduction spaces, a tactic-combinator language with a
//! small-step semantics, tactical validity checking, an independent decision
//! procedure, search under control régimes, and replayable proof sessions.

pub mod lang;
pub mod oracle;
pub mod reduction;
pub mod control;
pub mod corpus;
pub mod session;
pub mod space;
pub mod tactical;
pub mod tactic;

pub use lang::{parse_formula, parse_sequent, render, Formula, Goal, LangError, Sequent};
pub use reduction::{Binding, Operator, Schema, State, Status};
