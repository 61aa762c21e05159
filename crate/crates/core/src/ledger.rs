//! Provenance ledger and the single-writer commit path.
//!
//! Every mutation happens inside an activity: an E7 (or subclass) entity
//! with an operator (P14), a time-span (P4 to an E52), a kind (P2) and a
//! scope note (P3). Effects are staged and become visible in one step at
//! commit. Readers take [`Catalog::snapshot`] and never observe staged work.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{CatalogError, Result};
use crate::model::vocabulary::{self, BOOTSTRAP_TERMS};
use crate::model::{
    ActivityRecord, Entity, Graph, IdSource, Iri, Object, Profile, Registry, SequentialIds, Statement,
    StatementId, UlidSource, DEFAULT_BASE,
};
use crate::serialization::log::{LogEvent, LogRecord};

#[derive(Debug, Clone)]
pub struct CatalogConfig {
    pub registry: Arc<Registry>,
    pub profile: Profile,
    pub base: String,
    /// Time-span recorded on the bootstrap activity.
    pub bootstrap_timespan: String,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        CatalogConfig {
            registry: Arc::new(Registry::default_bundle()),
            profile: Profile::Paper,
            base: DEFAULT_BASE.to_string(),
            bootstrap_timespan: "1970-01-01/1970-01-01".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextState {
    Open,
    Committed,
    Aborted,
}

/// Handle to the open unit of work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActivityContext {
    pub activity_iri: Iri,
    pub class_code: String,
    pub operator_iri: Iri,
    pub kind_iri: Iri,
    pub timespan: String,
    pub timespan_iri: Iri,
    pub note: String,
    pub state: ContextState,
}

/// Parameters for [`Catalog::begin_activity`].
#[derive(Debug, Clone)]
pub struct ActivityRequest {
    pub class_code: String,
    pub operator: Iri,
    pub kind: Iri,
    pub timespan: String,
    pub note: String,
}

impl ActivityRequest {
    pub fn new(operator: &Iri, kind: &Iri, timespan: impl Into<String>, note: impl Into<String>) -> Self {
        ActivityRequest {
            class_code: "E7".into(),
            operator: operator.clone(),
            kind: kind.clone(),
            timespan: timespan.into(),
            note: note.into(),
        }
    }

    pub fn with_class(mut self, class_code: &str) -> Self {
        self.class_code = class_code.to_string();
        self
    }
}

/// One committed activity as shown to curators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub activity_iri: Iri,
    pub commit_seq: u64,
    pub activity_class: String,
    pub operator_iri: Option<Iri>,
    pub operator_label: String,
    pub kind_label: String,
    pub timespan: String,
    pub note: String,
    pub entities_created: usize,
    pub statements_asserted: usize,
    pub statements_retracted: usize,
}

/// Result of a workflow together with the audit entry of its activity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Committed<T> {
    pub value: T,
    pub audit: AuditEntry,
}

#[derive(Debug, Default)]
struct Staging {
    activity: Iri,
    entities: Vec<Entity>,
    entity_pos: HashMap<Iri, usize>,
    statements: Vec<Statement>,
    retractions: Vec<StatementId>,
    steps: usize,
}

/// The writer side of the store.
pub struct Catalog {
    pub(crate) graph: Arc<Graph>,
    staging: Option<Staging>,
    ids: Box<dyn IdSource>,
    pub(crate) log: Vec<LogRecord>,
    sink: Option<Box<dyn Write + Send>>,
    fault_at: Option<usize>,
}

impl fmt::Debug for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Catalog")
            .field("entities", &self.graph.entity_count())
            .field("statements", &self.graph.statements().len())
            .field("log", &self.log.len())
            .field("open", &self.staging.as_ref().map(|s| &s.activity))
            .finish()
    }
}

impl Catalog {
    /// A fresh catalog with bootstrap vocabulary, using wall-clock ids.
    pub fn new(config: CatalogConfig) -> Result<Catalog> {
        Catalog::with_ids(config, Box::new(UlidSource::default()))
    }

    /// A fresh catalog with deterministic ids.
    pub fn deterministic(config: CatalogConfig) -> Result<Catalog> {
        Catalog::with_ids(config, Box::new(SequentialIds::default()))
    }

    pub fn with_ids(config: CatalogConfig, ids: Box<dyn IdSource>) -> Result<Catalog> {
        let timespan = config.bootstrap_timespan.clone();
        let mut catalog = Catalog::empty(config, ids);
        catalog.ensure_vocabulary(&timespan)?;
        Ok(catalog)
    }

    /// A catalog with no entities at all (used by import and replay).
    pub fn empty(config: CatalogConfig, ids: Box<dyn IdSource>) -> Catalog {
        Catalog {
            graph: Arc::new(Graph::new(config.registry, config.profile, config.base)),
            staging: None,
            ids,
            log: Vec::new(),
            sink: None,
            fault_at: None,
        }
    }

    pub(crate) fn from_parts(graph: Graph, log: Vec<LogRecord>, ids: Box<dyn IdSource>) -> Catalog {
        Catalog {
            graph: Arc::new(graph),
            staging: None,
            ids,
            log,
            sink: None,
            fault_at: None,
        }
    }

    /// Sends every subsequent log record to `sink` as it is written.
    pub fn attach_sink(&mut self, sink: Box<dyn Write + Send>) {
        self.sink = Some(sink);
    }

    pub fn replace_ids(&mut self, ids: Box<dyn IdSource>) {
        self.ids = ids;
    }

    /// The last committed state, shareable across threads.
    pub fn snapshot(&self) -> Arc<Graph> {
        Arc::clone(&self.graph)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn profile(&self) -> Profile {
        self.graph.profile()
    }

    pub fn set_profile(&mut self, profile: Profile) {
        if self.graph.profile() != profile {
            Arc::make_mut(&mut self.graph).set_profile(profile);
        }
    }

    pub fn log_records(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn log_text(&self) -> String {
        crate::serialization::log::to_text(&self.log)
    }

    pub fn is_open(&self) -> bool {
        self.staging.is_some()
    }

    #[doc(hidden)]
    /// Makes the n-th staging call (1-based) of the next activities fail.
    pub fn set_fault_at(&mut self, step: Option<usize>) {
        self.fault_at = step;
    }

    /// Entity lookup that also sees the open activity's staged entities.
    pub fn lookup(&self, iri: &Iri) -> Option<&Entity> {
        if let Some(st) = &self.staging {
            if let Some(&pos) = st.entity_pos.get(iri) {
                return Some(&st.entities[pos]);
            }
        }
        self.graph.entity(iri)
    }

    fn require(&self, iri: &Iri) -> Result<&Entity> {
        self.lookup(iri).ok_or_else(|| CatalogError::UnknownIri(iri.clone()))
    }

    /// The E55 labelled `label`, staged or committed.
    pub fn type_by_label(&self, label: &str) -> Option<Iri> {
        if let Some(st) = &self.staging {
            if let Some(e) = st
                .entities
                .iter()
                .find(|e| e.class_code == "E55" && e.literal.as_deref() == Some(label))
            {
                return Some(e.iri.clone());
            }
        }
        self.graph.type_by_label(label).cloned()
    }

    /// Returns the E55 for `label`, creating it inside `ctx` on first use.
    pub fn vocab(&mut self, ctx: &ActivityContext, label: &str) -> Result<Iri> {
        let label: String = label.nfc().collect();
        match self.type_by_label(&label) {
            Some(iri) => Ok(iri),
            None => self.create_entity(ctx, "E55", Some(&label)),
        }
    }

    pub fn system_actor(&self) -> Option<&Iri> {
        self.graph
            .entities_with_literal(vocabulary::SYSTEM_ACTOR)
            .find(|e| e.class_code == "E39")
            .map(|e| &e.iri)
    }

    fn mint(&mut self) -> Iri {
        loop {
            let iri = Iri::new(format!("{}{}", self.graph.base(), self.ids.next_suffix()));
            if self.lookup(&iri).is_none() {
                return iri;
            }
        }
    }

    pub(crate) fn write_log(&mut self, event: LogEvent) -> Result<()> {
        let seq = self.log.last().map_or(1, |r| r.seq + 1);
        let record = LogRecord { seq, event };
        if let Some(sink) = self.sink.as_mut() {
            let line = serde_json::to_string(&record).map_err(|e| CatalogError::Log(e.to_string()))?;
            writeln!(sink, "{line}").map_err(|e| CatalogError::Log(e.to_string()))?;
        }
        self.log.push(record);
        Ok(())
    }

    pub(crate) fn flush_sink(&mut self) -> Result<()> {
        if let Some(sink) = self.sink.as_mut() {
            sink.flush().map_err(|e| CatalogError::Log(e.to_string()))?;
        }
        Ok(())
    }

    fn check_ctx(&self, ctx: &ActivityContext) -> Result<()> {
        match &self.staging {
            Some(st) if ctx.state == ContextState::Open && st.activity == ctx.activity_iri => Ok(()),
            _ => Err(CatalogError::ContextClosed),
        }
    }

    fn tick(&mut self) -> Result<()> {
        let st = self.staging.as_mut().expect("checked open");
        st.steps += 1;
        if self.fault_at == Some(st.steps) {
            return Err(CatalogError::FaultInjected(st.steps));
        }
        Ok(())
    }

    fn stage_entity(&mut self, entity: Entity) -> Result<()> {
        self.write_log(LogEvent::EntityCreated(entity.clone()))?;
        let st = self.staging.as_mut().expect("checked open");
        st.entity_pos.insert(entity.iri.clone(), st.entities.len());
        st.entities.push(entity);
        Ok(())
    }

    fn next_statement_id(&self) -> StatementId {
        let staged = self.staging.as_ref().map_or(0, |s| s.statements.len() as u64);
        self.graph.next_statement_id() + staged
    }

    fn stage_statement(&mut self, statement: Statement) -> Result<StatementId> {
        let id = statement.id;
        self.write_log(LogEvent::StatementAsserted(statement.clone()))?;
        self.staging
            .as_mut()
            .expect("checked open")
            .statements
            .push(statement);
        Ok(id)
    }

    /// Opens the exclusive activity window and stages the scaffold.
    pub fn begin_activity(&mut self, req: ActivityRequest) -> Result<ActivityContext> {
        if self.staging.is_some() {
            return Err(CatalogError::ActivityOpen);
        }
        let registry = self.graph.registry_arc().clone();
        if registry.class(&req.class_code).is_none() {
            return Err(CatalogError::UnknownClass(req.class_code));
        }
        if !registry.subsumed(&req.class_code, "E7") {
            return Err(CatalogError::invalid("class", format!("{} is not an activity class", req.class_code)));
        }
        let operator = self.graph.require_entity(&req.operator)?;
        if !registry.subsumed(&operator.class_code, "E39") {
            return Err(CatalogError::WrongClass {
                iri: req.operator.clone(),
                expected: "E39".into(),
                found: operator.class_code.clone(),
            });
        }
        let kind = self.graph.require_entity(&req.kind)?;
        if kind.class_code != "E55" {
            return Err(CatalogError::WrongClass {
                iri: req.kind.clone(),
                expected: "E55".into(),
                found: kind.class_code.clone(),
            });
        }
        if !crate::model::is_valid_timespan(&req.timespan) {
            return Err(CatalogError::InvalidTimeSpan(req.timespan));
        }
        let note: String = req.note.trim().nfc().collect();
        if note.is_empty() {
            return Err(CatalogError::invalid("note", "a scope note is required"));
        }

        let activity = self.mint();
        self.staging = Some(Staging {
            activity: activity.clone(),
            ..Staging::default()
        });
        let timespan_iri = self.mint();
        let ctx = ActivityContext {
            activity_iri: activity.clone(),
            class_code: req.class_code.clone(),
            operator_iri: req.operator.clone(),
            kind_iri: req.kind.clone(),
            timespan: req.timespan.clone(),
            timespan_iri: timespan_iri.clone(),
            note: note.clone(),
            state: ContextState::Open,
        };
        let result = self.stage_scaffold(&ctx, Vec::new());
        if let Err(e) = result {
            self.staging = None;
            return Err(e);
        }
        Ok(ctx)
    }

    /// Stages the activity entity, its time-span, `extra` entities and the
    /// four scaffold statements.
    fn stage_scaffold(&mut self, ctx: &ActivityContext, extra: Vec<Entity>) -> Result<()> {
        let activity = &ctx.activity_iri;
        self.stage_entity(Entity {
            iri: activity.clone(),
            class_code: ctx.class_code.clone(),
            literal: None,
            created_by: activity.clone(),
        })?;
        self.stage_entity(Entity {
            iri: ctx.timespan_iri.clone(),
            class_code: "E52".into(),
            literal: Some(ctx.timespan.clone()),
            created_by: activity.clone(),
        })?;
        for e in extra {
            self.stage_entity(e)?;
        }
        let scaffold = [
            ("P14", Object::Iri(ctx.operator_iri.clone())),
            ("P4", Object::Iri(ctx.timespan_iri.clone())),
            ("P2", Object::Iri(ctx.kind_iri.clone())),
            ("P3", Object::Literal(ctx.note.clone())),
        ];
        for (property, object) in scaffold {
            let id = self.next_statement_id();
            self.stage_statement(Statement {
                id,
                subject: activity.clone(),
                property: property.into(),
                object,
                type_qualifier: None,
                asserted_by: activity.clone(),
                retracted_by: None,
            })?;
        }
        Ok(())
    }

    /// Creates the system actor and any missing vocabulary terms in one
    /// bootstrap activity. Does nothing when all are present.
    pub fn ensure_vocabulary(&mut self, timespan: &str) -> Result<Option<AuditEntry>> {
        if self.staging.is_some() {
            return Err(CatalogError::ActivityOpen);
        }
        let missing: Vec<&str> = BOOTSTRAP_TERMS
            .iter()
            .copied()
            .filter(|t| self.graph.type_by_label(t).is_none())
            .collect();
        let system = self.system_actor().cloned();
        if missing.is_empty() && system.is_some() {
            return Ok(None);
        }
        if !crate::model::is_valid_timespan(timespan) {
            return Err(CatalogError::InvalidTimeSpan(timespan.to_string()));
        }

        let activity = self.mint();
        self.staging = Some(Staging {
            activity: activity.clone(),
            ..Staging::default()
        });
        let timespan_iri = self.mint();
        let mut extra = Vec::new();
        let operator = match system {
            Some(iri) => iri,
            None => {
                let iri = self.mint();
                extra.push(Entity {
                    iri: iri.clone(),
                    class_code: "E39".into(),
                    literal: Some(vocabulary::SYSTEM_ACTOR.into()),
                    created_by: activity.clone(),
                });
                iri
            }
        };
        let mut kind = self.graph.type_by_label(vocabulary::BOOTSTRAP).cloned();
        for term in &missing {
            let iri = self.mint();
            if *term == vocabulary::BOOTSTRAP {
                kind = Some(iri.clone());
            }
            extra.push(Entity {
                iri,
                class_code: "E55".into(),
                literal: Some(term.to_string()),
                created_by: activity.clone(),
            });
        }
        let mut ctx = ActivityContext {
            activity_iri: activity,
            class_code: "E7".into(),
            operator_iri: operator,
            kind_iri: kind.expect("bootstrap kind present or created"),
            timespan: timespan.to_string(),
            timespan_iri,
            note: "catalog bootstrap".into(),
            state: ContextState::Open,
        };
        if let Err(e) = self.stage_scaffold(&ctx, extra) {
            self.abort_activity(&mut ctx)?;
            return Err(e);
        }
        self.commit_activity(&mut ctx).map(Some)
    }

    pub fn create_entity(&mut self, ctx: &ActivityContext, class_code: &str, literal: Option<&str>) -> Result<Iri> {
        self.check_ctx(ctx)?;
        self.tick()?;
        let literal: Option<String> = literal.map(|l| l.nfc().collect());
        self.graph.check_entity_shape(class_code, literal.as_deref())?;
        if class_code == "E42" {
            let value = literal.as_deref().unwrap_or_default();
            let staged_dup = self.staging.as_ref().is_some_and(|s| {
                s.entities
                    .iter()
                    .any(|e| e.class_code == "E42" && e.literal.as_deref() == Some(value))
            });
            let committed_dup = self
                .graph
                .entities_with_literal(value)
                .any(|e| e.class_code == "E42");
            if staged_dup || committed_dup {
                return Err(CatalogError::DuplicateIdentifier(value.to_string()));
            }
        }
        let iri = self.mint();
        self.stage_entity(Entity {
            iri: iri.clone(),
            class_code: class_code.to_string(),
            literal,
            created_by: ctx.activity_iri.clone(),
        })?;
        Ok(iri)
    }

    pub fn assert_statement(
        &mut self,
        ctx: &ActivityContext,
        subject: &Iri,
        property: &str,
        object: impl Into<Object>,
        type_qualifier: Option<&Iri>,
    ) -> Result<StatementId> {
        self.check_ctx(ctx)?;
        self.tick()?;
        let object = match object.into() {
            Object::Literal(text) => {
                let text: String = text.nfc().collect();
                if text.trim().is_empty() {
                    return Err(CatalogError::invalid("object", "literal object must be non-empty"));
                }
                Object::Literal(text)
            }
            o => o,
        };
        let subject_class = self.require(subject)?.class_code.clone();
        let def = self
            .graph
            .registry()
            .property(property)
            .ok_or_else(|| CatalogError::UnknownProperty(property.to_string()))?;
        let allows_qualifier = def.allows_type_qualifier;
        let object_class = match &object {
            Object::Iri(o) => Some(self.require(o)?.class_code.clone()),
            Object::Literal(_) => None,
        };
        self.graph
            .check_signature(self.graph.profile(), &subject_class, property, object_class.as_deref())?;
        if let Some(q) = type_qualifier {
            if !allows_qualifier {
                return Err(CatalogError::QualifierNotAllowed(property.to_string()));
            }
            if self.require(q)?.class_code != "E55" {
                return Err(CatalogError::QualifierNotType(q.clone()));
            }
        }
        let id = self.next_statement_id();
        self.stage_statement(Statement {
            id,
            subject: subject.clone(),
            property: property.to_string(),
            object,
            type_qualifier: type_qualifier.cloned(),
            asserted_by: ctx.activity_iri.clone(),
            retracted_by: None,
        })
    }

    /// Convenience for entity-to-entity statements without a qualifier.
    pub fn link(&mut self, ctx: &ActivityContext, subject: &Iri, property: &str, object: &Iri) -> Result<StatementId> {
        self.assert_statement(ctx, subject, property, object, None)
    }

    pub fn retract_statement(&mut self, ctx: &ActivityContext, id: StatementId) -> Result<Statement> {
        self.check_ctx(ctx)?;
        self.tick()?;
        let staging = self.staging.as_ref().expect("checked open");
        if staging.statements.iter().any(|s| s.id == id) {
            return Err(CatalogError::RetractOwnAssertion(id));
        }
        let st = self
            .graph
            .statement(id)
            .ok_or(CatalogError::UnknownStatement(id))?;
        if !st.is_live() || staging.retractions.contains(&id) {
            return Err(CatalogError::AlreadyRetracted(id));
        }
        if self
            .graph
            .activity(&st.subject)
            .is_some_and(|a| a.scaffold_statements.contains(&id))
        {
            return Err(CatalogError::invalid("statement", "ledger scaffold statements cannot be retracted"));
        }
        let mut updated = st.clone();
        updated.retracted_by = Some(ctx.activity_iri.clone());
        self.write_log(LogEvent::StatementRetracted {
            id,
            retracted_by: ctx.activity_iri.clone(),
        })?;
        self.staging
            .as_mut()
            .expect("checked open")
            .retractions
            .push(id);
        Ok(updated)
    }

    /// Publishes all staged effects atomically.
    pub fn commit_activity(&mut self, ctx: &mut ActivityContext) -> Result<AuditEntry> {
        self.check_ctx(ctx)?;
        let staging = self.staging.as_ref().expect("checked open");
        let commit_seq = self.graph.next_commit_seq();
        let record = ActivityRecord::from_effects(
            &staging.activity,
            commit_seq,
            &staging.entities,
            &staging.statements,
            staging.retractions.len(),
        );
        if record.effect_count() == 0 {
            return Err(CatalogError::EmptyActivity);
        }
        self.write_log(LogEvent::ActivityCommitted {
            activity: ctx.activity_iri.clone(),
            commit_seq,
        })?;
        self.flush_sink()?;
        let staging = self.staging.take().expect("checked open");
        apply_commit(
            Arc::make_mut(&mut self.graph),
            staging.entities,
            staging.statements,
            &staging.retractions,
            &staging.activity,
            record,
        );
        ctx.state = ContextState::Committed;
        Ok(audit_entry(&self.graph, &ctx.activity_iri).expect("just committed"))
    }

    /// Discards staged effects, leaving an abort marker in the log.
    pub fn abort_activity(&mut self, ctx: &mut ActivityContext) -> Result<()> {
        self.check_ctx(ctx)?;
        self.staging = None;
        ctx.state = ContextState::Aborted;
        self.write_log(LogEvent::ActivityAborted {
            activity: ctx.activity_iri.clone(),
        })?;
        self.flush_sink()
    }

    /// Runs `body` inside one activity: commit on success, abort on error.
    pub fn run_activity<T>(
        &mut self,
        req: ActivityRequest,
        body: impl FnOnce(&mut Catalog, &ActivityContext) -> Result<T>,
    ) -> Result<Committed<T>> {
        let mut ctx = self.begin_activity(req)?;
        let outcome = body(self, &ctx).and_then(|value| {
            let audit = self.commit_activity(&mut ctx)?;
            Ok(Committed { value, audit })
        });
        if outcome.is_err() && ctx.state == ContextState::Open {
            // the original error is more useful than a failed abort marker
            let _ = self.abort_activity(&mut ctx);
        }
        outcome
    }

    /// Resolves an activity kind label to its E55.
    pub fn kind(&self, label: &str) -> Result<Iri> {
        self.graph.type_by_label(label).cloned().ok_or_else(|| {
            CatalogError::invalid("kind", format!("vocabulary term {label:?} is missing; bootstrap the store"))
        })
    }
}

/// Applies one committed activity to the graph.
pub(crate) fn apply_commit(
    graph: &mut Graph,
    entities: Vec<Entity>,
    statements: Vec<Statement>,
    retractions: &[StatementId],
    activity: &Iri,
    record: ActivityRecord,
) {
    for e in entities {
        graph.insert_entity(e);
    }
    for s in statements {
        graph.insert_statement(s);
    }
    for id in retractions {
        graph.retract(*id, activity);
    }
    graph.push_activity(record);
}

/// Display label: own literal, else first live P1 appellation, else class label.
pub fn label_of(graph: &Graph, iri: &Iri) -> String {
    let Some(entity) = graph.entity(iri) else {
        return iri.to_string();
    };
    if let Some(l) = &entity.literal {
        return l.clone();
    }
    if let Some(name) = graph
        .out_statements(iri, Some("P1"))
        .filter_map(|s| s.object_iri())
        .filter_map(|o| graph.entity(o))
        .find_map(|o| o.literal.clone())
    {
        return name;
    }
    graph
        .registry()
        .class(&entity.class_code)
        .map_or_else(|| entity.class_code.clone(), |c| c.label.clone())
}

/// Builds the audit entry of a committed activity from its scaffold.
pub fn audit_entry(graph: &Graph, activity: &Iri) -> Option<AuditEntry> {
    let record = graph.activity(activity)?;
    let entity = graph.entity(activity)?;
    let mut operator = None;
    let mut kind_label = String::new();
    let mut timespan = String::new();
    let mut note = String::new();
    for id in &record.scaffold_statements {
        let Some(st) = graph.statement(*id) else { continue };
        match (st.property.as_str(), &st.object) {
            ("P14", Object::Iri(o)) => operator = Some(o.clone()),
            ("P2", Object::Iri(o)) => kind_label = label_of(graph, o),
            ("P4", Object::Iri(o)) => {
                timespan = graph.entity(o).and_then(|e| e.literal.clone()).unwrap_or_default()
            }
            ("P3", Object::Literal(text)) => note = text.clone(),
            _ => {}
        }
    }
    Some(AuditEntry {
        activity_iri: activity.clone(),
        commit_seq: record.commit_seq,
        activity_class: entity.class_code.clone(),
        operator_label: operator.as_ref().map(|o| label_of(graph, o)).unwrap_or_default(),
        operator_iri: operator,
        kind_label,
        timespan,
        note,
        entities_created: record.entities_created,
        statements_asserted: record.statements_asserted,
        statements_retracted: record.statements_retracted,
    })
}

/// Every activity that created `iri` or asserted/retracted a statement
/// touching it, in commit order.
pub fn audit_trail(graph: &Graph, iri: &Iri) -> Result<Vec<AuditEntry>> {
    let entity = graph.require_entity(iri)?;
    let mut touching = std::collections::HashSet::new();
    touching.insert(entity.created_by.clone());
    for st in graph.statements() {
        let touches = st.subject == *iri || st.object_iri() == Some(iri);
        if touches {
            touching.insert(st.asserted_by.clone());
            if let Some(r) = &st.retracted_by {
                touching.insert(r.clone());
            }
        }
    }
    Ok(graph
        .activities()
        .iter()
        .filter(|a| touching.contains(&a.iri))
        .filter_map(|a| audit_entry(graph, &a.iri))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> (Catalog, Iri) {
        let mut cat = Catalog::deterministic(CatalogConfig::default()).unwrap();
        let system = cat.system_actor().unwrap().clone();
        let kind = cat.kind(vocabulary::REGISTRATION).unwrap();
        let volunteer = cat
            .run_activity(ActivityRequest::new(&system, &kind, "2024-05-01/2024-05-01", "add volunteer"), |c, ctx| {
                c.create_entity(ctx, "E39", Some("Volunteer"))
            })
            .unwrap()
            .value;
        (cat, volunteer)
    }

    fn accession_request(cat: &Catalog, operator: &Iri) -> ActivityRequest {
        ActivityRequest::new(
            operator,
            &cat.kind(vocabulary::ACCESSION).unwrap(),
            "2024-05-01T10:00/2024-05-01T10:20",
            "intake",
        )
    }

    #[test]
    fn begin_stages_scaffold() {
        let (mut cat, volunteer) = catalog();
        let req = accession_request(&cat, &volunteer);
        let ctx = cat.begin_activity(req).unwrap();
        let staging = cat.staging.as_ref().unwrap();
        assert_eq!(staging.statements.len(), 4);
        assert_eq!(staging.entities.len(), 2);
        assert!(staging
            .statements
            .iter()
            .all(|s| s.asserted_by == ctx.activity_iri && s.subject == ctx.activity_iri));
        // nothing visible to readers yet
        assert!(cat.graph().entity(&ctx.activity_iri).is_none());
    }

    #[test]
    fn begin_while_open_fails() {
        let (mut cat, volunteer) = catalog();
        let _ctx = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap();
        let err = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap_err();
        assert_eq!(err, CatalogError::ActivityOpen);
    }

    #[test]
    fn operator_must_be_actor() {
        let (mut cat, volunteer) = catalog();
        let object = cat
            .run_activity(accession_request(&cat, &volunteer), |c, ctx| c.create_entity(ctx, "E22", None))
            .unwrap()
            .value;
        let err = cat.begin_activity(accession_request(&cat, &object)).unwrap_err();
        assert!(matches!(err, CatalogError::WrongClass { .. }));
    }

    #[test]
    fn commit_counts_effects() {
        let (mut cat, volunteer) = catalog();
        let mut ctx = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap();
        cat.create_entity(&ctx, "E22", None).unwrap();
        let audit = cat.commit_activity(&mut ctx).unwrap();
        assert_eq!(audit.entities_created, 1);
        assert_eq!(audit.statements_asserted, 0);
        assert_eq!(audit.operator_label, "Volunteer");
        assert_eq!(audit.kind_label, "accession");
        assert_eq!(audit.note, "intake");
        assert_eq!(audit.timespan, "2024-05-01T10:00/2024-05-01T10:20");
        assert_eq!(
            cat.commit_activity(&mut ctx).unwrap_err(),
            CatalogError::ContextClosed
        );
    }

    #[test]
    fn empty_activity_rejected() {
        let (mut cat, volunteer) = catalog();
        let mut ctx = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap();
        assert_eq!(cat.commit_activity(&mut ctx).unwrap_err(), CatalogError::EmptyActivity);
        cat.abort_activity(&mut ctx).unwrap();
    }

    #[test]
    fn abort_discards_and_releases() {
        let (mut cat, volunteer) = catalog();
        let before = cat.snapshot();
        let mut ctx = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap();
        cat.create_entity(&ctx, "E22", None).unwrap();
        cat.create_entity(&ctx, "E22", None).unwrap();
        cat.abort_activity(&mut ctx).unwrap();
        assert_eq!(*before, *cat.snapshot());
        assert_eq!(cat.abort_activity(&mut ctx).unwrap_err(), CatalogError::ContextClosed);
        assert!(cat.begin_activity(accession_request(&cat, &volunteer)).is_ok());
        assert!(matches!(
            cat.log_records().iter().rev().nth(6).map(|r| &r.event),
            Some(LogEvent::ActivityAborted { .. })
        ));
    }

    #[test]
    fn literal_rules() {
        let (mut cat, volunteer) = catalog();
        let ctx = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap();
        assert!(matches!(
            cat.create_entity(&ctx, "E42", Some("")),
            Err(CatalogError::LiteralMissing { .. })
        ));
        assert!(matches!(
            cat.create_entity(&ctx, "E22", Some("x")),
            Err(CatalogError::LiteralForbidden { .. })
        ));
        assert!(matches!(
            cat.create_entity(&ctx, "E99", None),
            Err(CatalogError::UnknownClass(_))
        ));
        let ts = cat.create_entity(&ctx, "E52", Some("2024-05-01/..")).unwrap();
        assert_eq!(cat.lookup(&ts).unwrap().literal.as_deref(), Some("2024-05-01/.."));
    }

    #[test]
    fn literals_are_nfc_normalized() {
        let (mut cat, volunteer) = catalog();
        let ctx = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap();
        // "e" + combining acute
        let iri = cat.create_entity(&ctx, "E41", Some("Cafe\u{301}")).unwrap();
        assert_eq!(cat.lookup(&iri).unwrap().literal.as_deref(), Some("Caf\u{e9}"));
    }

    #[test]
    fn assert_checks_profiles() {
        let (mut cat, volunteer) = catalog();
        let ctx = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap();
        let set = cat.create_entity(&ctx, "E22", None).unwrap();
        let id = cat.create_entity(&ctx, "E42", Some("FHKD-0001")).unwrap();
        let info = cat.create_entity(&ctx, "E73", None).unwrap();
        let typ = cat.create_entity(&ctx, "E55", Some("x")).unwrap();
        let ts = cat.create_entity(&ctx, "E52", Some("2024/2024")).unwrap();
        assert!(cat.link(&ctx, &set, "P1", &id).is_ok());
        assert!(cat.link(&ctx, &info, "P62", &set).is_ok());
        assert!(matches!(
            cat.link(&ctx, &typ, "P4", &ts),
            Err(CatalogError::DomainViolation { .. })
        ));
        assert!(matches!(
            cat.assert_statement(&ctx, &set, "P1", &id, Some(&typ)),
            Err(CatalogError::QualifierNotAllowed(_))
        ));
        assert!(cat.assert_statement(&ctx, &info, "P62", &set, Some(&typ)).is_ok());
    }

    #[test]
    fn retraction_rules() {
        let (mut cat, volunteer) = catalog();
        let set_part = cat
            .run_activity(accession_request(&cat, &volunteer), |c, ctx| {
                let set = c.create_entity(ctx, "E22", None)?;
                let part = c.create_entity(ctx, "E22", None)?;
                c.link(ctx, &set, "P106", &part)
            })
            .unwrap()
            .value;
        let history = cat.graph().statements().len();
        let retracted = cat
            .run_activity(accession_request(&cat, &volunteer), |c, ctx| c.retract_statement(ctx, set_part))
            .unwrap();
        assert_eq!(retracted.value.retracted_by.as_ref(), Some(&retracted.audit.activity_iri));
        assert_eq!(cat.graph().statements().len(), history + 4);
        assert!(!cat.graph().statement(set_part).unwrap().is_live());

        let ctx = cat.begin_activity(accession_request(&cat, &volunteer)).unwrap();
        assert_eq!(
            cat.retract_statement(&ctx, set_part).unwrap_err(),
            CatalogError::AlreadyRetracted(set_part)
        );
        assert_eq!(
            cat.retract_statement(&ctx, 1_000_000).unwrap_err(),
            CatalogError::UnknownStatement(1_000_000)
        );
        let boot = cat.graph().activities()[0].scaffold_statements[0];
        assert!(matches!(
            cat.retract_statement(&ctx, boot),
            Err(CatalogError::Invalid { field: "statement", .. })
        ));
    }

    #[test]
    fn bootstrap_trail_has_one_entry() {
        let (cat, _) = catalog();
        let term = cat.kind(vocabulary::MISMATCH).unwrap();
        let trail = audit_trail(cat.graph(), &term).unwrap();
        assert_eq!(trail.len(), 1);
        assert_eq!(trail[0].kind_label, "bootstrap");
    }

    #[test]
    fn retracting_activity_appears_in_trail() {
        let (mut cat, volunteer) = catalog();
        let (part, edge) = cat
            .run_activity(accession_request(&cat, &volunteer), |c, ctx| {
                let set = c.create_entity(ctx, "E22", None)?;
                let part = c.create_entity(ctx, "E22", None)?;
                Ok((part.clone(), c.link(ctx, &set, "P106", &part)?))
            })
            .unwrap()
            .value;
        let retraction = cat
            .run_activity(accession_request(&cat, &volunteer), |c, ctx| c.retract_statement(ctx, edge))
            .unwrap()
            .audit;
        let trail = audit_trail(cat.graph(), &part).unwrap();
        assert_eq!(trail.len(), 2);
        assert_eq!(trail[1], retraction);
        assert!(trail[0].commit_seq < trail[1].commit_seq);
    }

    #[test]
    fn ensure_vocabulary_is_idempotent() {
        let (mut cat, _) = catalog();
        assert_eq!(cat.ensure_vocabulary("2024/2024").unwrap(), None);
    }
}
