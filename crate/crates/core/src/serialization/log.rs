//! Append-only event log (`.tlog`).
//!
//! One JSON object per line, `seq` first. Effects of an activity are
//! written as they are staged and closed by an `activity-committed` or
//! `activity-aborted` marker; replay applies only committed groups, so a
//! crash leaves a replayable committed prefix.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::CatalogError;
use crate::ledger::{apply_commit, Catalog, CatalogConfig};
use crate::model::{ActivityRecord, Entity, Graph, IdSource, Iri, Object, Statement, StatementId, UlidSource};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    #[serde(flatten)]
    pub event: LogEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum LogEvent {
    EntityCreated(Entity),
    StatementAsserted(Statement),
    StatementRetracted { id: StatementId, retracted_by: Iri },
    ActivityCommitted { activity: Iri, commit_seq: u64 },
    ActivityAborted { activity: Iri },
}

#[derive(Debug, Error)]
#[error("event log rejected at seq {seq}: {reason}")]
pub struct ReplayError {
    pub seq: u64,
    pub reason: String,
    /// State after the last activity committed before the failure.
    pub recovered: Arc<Graph>,
}

pub fn to_text(records: &[LogRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("log records serialize"));
        out.push('\n');
    }
    out
}

#[derive(Default)]
struct Pending {
    activity: Option<Iri>,
    entities: Vec<Entity>,
    entity_set: HashSet<Iri>,
    statements: Vec<Statement>,
    retractions: Vec<StatementId>,
}

impl Pending {
    fn attribute(&mut self, by: &Iri) -> Result<(), String> {
        match &self.activity {
            None => {
                self.activity = Some(by.clone());
                Ok(())
            }
            Some(a) if a == by => Ok(()),
            Some(a) => Err(format!("record attributed to {by} inside open activity {a}")),
        }
    }
}

/// Incremental replayer; feeds records one at a time.
struct Replayer {
    graph: Graph,
    pending: Pending,
    last_seq: u64,
}

impl Replayer {
    fn exists(&self, iri: &Iri) -> bool {
        self.pending.entity_set.contains(iri) || self.graph.entity(iri).is_some()
    }

    fn class_of(&self, iri: &Iri) -> Option<&str> {
        if let Some(e) = self.pending.entities.iter().rev().find(|e| e.iri == *iri) {
            return Some(&e.class_code);
        }
        self.graph.entity(iri).map(|e| e.class_code.as_str())
    }

    fn apply(&mut self, record: LogRecord) -> Result<(), String> {
        if record.seq != self.last_seq + 1 {
            return Err(format!("expected seq {}, found {}", self.last_seq + 1, record.seq));
        }
        match record.event {
            LogEvent::EntityCreated(entity) => {
                self.pending.attribute(&entity.created_by)?;
                if self.exists(&entity.iri) {
                    return Err(format!("entity {} created twice", entity.iri));
                }
                if self.graph.registry().class(&entity.class_code).is_none() {
                    return Err(format!("unknown class {}", entity.class_code));
                }
                self.pending.entity_set.insert(entity.iri.clone());
                self.pending.entities.push(entity);
            }
            LogEvent::StatementAsserted(st) => {
                self.pending.attribute(&st.asserted_by)?;
                let expected = self.graph.next_statement_id() + self.pending.statements.len() as u64;
                if st.id != expected {
                    return Err(format!("statement id {} out of sequence (expected {expected})", st.id));
                }
                if st.retracted_by.is_some() {
                    return Err("asserted statement already carries a retraction".into());
                }
                if self.graph.registry().property(&st.property).is_none() {
                    return Err(format!("unknown property {}", st.property));
                }
                if !self.exists(&st.subject) {
                    return Err(format!("unknown subject {}", st.subject));
                }
                if let Object::Iri(o) = &st.object {
                    if !self.exists(o) {
                        return Err(format!("unknown object {o}"));
                    }
                }
                if let Some(q) = &st.type_qualifier {
                    if self.class_of(q) != Some("E55") {
                        return Err(format!("qualifier {q} is not an E55"));
                    }
                }
                self.pending.statements.push(st);
            }
            LogEvent::StatementRetracted { id, retracted_by } => {
                self.pending.attribute(&retracted_by)?;
                match self.graph.statement(id) {
                    Some(st) if st.is_live() && !self.pending.retractions.contains(&id) => {}
                    Some(_) => return Err(format!("statement {id} already retracted")),
                    None => return Err(format!("unknown statement {id}")),
                }
                self.pending.retractions.push(id);
            }
            LogEvent::ActivityCommitted { activity, commit_seq } => {
                let pending = std::mem::take(&mut self.pending);
                if pending.activity.as_ref() != Some(&activity) {
                    return Err(format!("commit of {activity} does not match the open activity"));
                }
                if commit_seq != self.graph.next_commit_seq() {
                    return Err(format!("commit sequence {commit_seq} out of order"));
                }
                let record = ActivityRecord::from_effects(
                    &activity,
                    commit_seq,
                    &pending.entities,
                    &pending.statements,
                    pending.retractions.len(),
                );
                if !pending.entity_set.contains(&activity) && self.graph.entity(&activity).is_none() {
                    return Err(format!("activity {activity} never created"));
                }
                apply_commit(
                    &mut self.graph,
                    pending.entities,
                    pending.statements,
                    &pending.retractions,
                    &activity,
                    record,
                );
            }
            LogEvent::ActivityAborted { activity } => {
                if let Some(open) = &self.pending.activity {
                    if *open != activity {
                        return Err(format!("abort of {activity} does not match the open activity {open}"));
                    }
                }
                self.pending = Pending::default();
            }
        }
        self.last_seq = record.seq;
        Ok(())
    }
}

/// Outcome of a successful replay.
#[derive(Debug)]
pub struct Replayed {
    pub catalog: Catalog,
    /// Activity left open at the end of the log (its effects were dropped).
    pub dangling: Option<Iri>,
}

/// Rebuilds a catalog from log records.
pub fn replay_records(
    config: CatalogConfig,
    records: impl IntoIterator<Item = LogRecord>,
) -> Result<Replayed, ReplayError> {
    replay_iter(config, records.into_iter().map(Ok))
}

fn replay_iter(
    config: CatalogConfig,
    records: impl Iterator<Item = Result<LogRecord, (u64, String)>>,
) -> Result<Replayed, ReplayError> {
    let mut replayer = Replayer {
        graph: Graph::new(config.registry.clone(), config.profile, config.base.clone()),
        pending: Pending::default(),
        last_seq: 0,
    };
    let mut kept = Vec::new();
    for item in records {
        let failure = match item {
            Ok(record) => match replayer.apply(record.clone()) {
                Ok(()) => {
                    kept.push(record);
                    continue;
                }
                Err(reason) => (record.seq, reason),
            },
            Err(err) => err,
        };
        return Err(ReplayError {
            seq: failure.0,
            reason: failure.1,
            recovered: Arc::new(replayer.graph),
        });
    }
    let dangling = replayer.pending.activity.take();
    Ok(Replayed {
        catalog: Catalog::from_parts(replayer.graph, kept, Box::new(UlidSource::default())),
        dangling,
    })
}

/// Parses and replays `.tlog` text.
pub fn replay_text(config: CatalogConfig, text: &str) -> Result<Replayed, ReplayError> {
    let mut expected = 1u64;
    let iter = text
        .split_terminator('\n')
        .filter(|l| !l.trim().is_empty())
        .map(move |line| {
            let seq = expected;
            expected += 1;
            serde_json::from_str::<LogRecord>(line).map_err(|e| (seq, format!("corrupt record: {e}")))
        });
    replay_iter(config, iter)
}

/// Convenience wrapper returning the graph only.
pub fn replay_log(config: CatalogConfig, text: &str) -> Result<Graph, ReplayError> {
    replay_text(config, text).map(|r| Arc::unwrap_or_clone(r.catalog.snapshot()))
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access store {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Opens a file-backed catalog: replays the log if present, bootstraps a new
/// one otherwise, and appends all further records to the file.
pub fn open_store(path: &Path, config: CatalogConfig, ids: Box<dyn IdSource>) -> Result<Catalog, StoreError> {
    let io_err = |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    };
    let existing = match File::open(path) {
        Ok(file) => {
            let mut text = String::new();
            for line in BufReader::new(file).lines() {
                text.push_str(&line.map_err(io_err)?);
                text.push('\n');
            }
            Some(text)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(io_err(e)),
    };
    let sink = OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;

    match existing.filter(|t| !t.trim().is_empty()) {
        Some(text) => {
            let Replayed { mut catalog, dangling } = replay_text(config, &text)?;
            catalog.replace_ids(ids);
            catalog.attach_sink(Box::new(sink));
            if let Some(activity) = dangling {
                catalog.write_abort_marker(activity)?;
            }
            Ok(catalog)
        }
        None => {
            let timespan = config.bootstrap_timespan.clone();
            let mut catalog = Catalog::empty(config, ids);
            catalog.attach_sink(Box::new(sink));
            catalog.ensure_vocabulary(&timespan)?;
            Ok(catalog)
        }
    }
}

/// Synthesizes a log that rebuilds `graph` exactly, activity by activity.
pub fn log_from_graph(graph: &Graph) -> Vec<LogRecord> {
    let mut entities: HashMap<&Iri, Vec<&Entity>> = HashMap::new();
    for e in graph.entities() {
        entities.entry(&e.created_by).or_default().push(e);
    }
    let mut asserted: HashMap<&Iri, Vec<&Statement>> = HashMap::new();
    let mut retracted: HashMap<&Iri, Vec<StatementId>> = HashMap::new();
    for s in graph.statements() {
        asserted.entry(&s.asserted_by).or_default().push(s);
        if let Some(r) = &s.retracted_by {
            retracted.entry(r).or_default().push(s.id);
        }
    }
    let mut out = Vec::new();
    let mut push = |event| {
        let seq = out.len() as u64 + 1;
        out.push(LogRecord { seq, event });
    };
    for activity in graph.activities() {
        let mut created = entities.remove(&activity.iri).unwrap_or_default();
        // activity entity first, then its time-span, then the rest by IRI
        created.sort_by_key(|e| {
            let rank = if e.iri == activity.iri {
                0
            } else if activity.scaffold_entities.contains(&e.iri) {
                1
            } else {
                2
            };
            (rank, e.iri.clone())
        });
        for e in created {
            push(LogEvent::EntityCreated(e.clone()));
        }
        for s in asserted.remove(&activity.iri).unwrap_or_default() {
            let mut s = s.clone();
            s.retracted_by = None;
            push(LogEvent::StatementAsserted(s));
        }
        for id in retracted.remove(&activity.iri).unwrap_or_default() {
            push(LogEvent::StatementRetracted {
                id,
                retracted_by: activity.iri.clone(),
            });
        }
        push(LogEvent::ActivityCommitted {
            activity: activity.iri.clone(),
            commit_seq: activity.commit_seq,
        });
    }
    out
}

impl Catalog {
    pub(crate) fn write_abort_marker(&mut self, activity: Iri) -> Result<(), CatalogError> {
        self.write_log(LogEvent::ActivityAborted { activity })?;
        self.flush_sink()
    }
}
