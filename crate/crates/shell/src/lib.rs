//! The `reductive` command line and its local HTTP session service.

pub mod api;
pub mod cli;
pub mod server;
