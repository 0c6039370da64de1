//! Library side of the `hsearch` command: configuration, index directory
//! layout and the `ingest` / `index` / `search` / `eval` pipeline steps.

pub mod commands;
pub mod config;
pub mod store;
pub mod synth;

pub use config::{Overrides, RunConfig, SearchMode};
