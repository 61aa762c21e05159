//! Turtle export/import and the persistence event log.

pub mod log;
pub mod turtle;
pub mod turtle_parse;

pub use log::{log_from_graph, open_store, replay_log, replay_records, replay_text, LogEvent, LogRecord, ReplayError, Replayed, StoreError};

pub use turtle::{export_turtle, import_turtle, ExportScope, ImportError, ImportOutcome};
