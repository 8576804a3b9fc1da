//! Control régimes: which goal to reduce next, which operator to try first,
//! how to traverse the space, when to give up on a branch, and how to back out
//! of a choice. Backtracking shows up in the trace as its own event so that a
//! run can be replayed step by step.

mod resource;
mod search;

pub use resource::{io_prove, multiplicative_corpus, naive_split_prove, ResourceSequent};
pub use search::{
    replay, search, GoalSelection, LoopCheck, SearchOutcome, SearchStatus, Strategy, TraceEvent, Traversal,
};
