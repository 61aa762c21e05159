//! Operations shared by the command line and the HTTP service, so both
//! surfaces drive the store through identical calls.

use std::str::FromStr;

use crmcat_core::ledger::label_of;
use crmcat_core::model::{Direction, Entity, Graph, IdSource, SequentialIds, UlidSource};
use crmcat_core::query::{self, Report, ReportRow, TraversalPattern, TraversalStep};
use crmcat_core::serialization::{open_store, LogEvent};
use crmcat_core::tosec::{ingest_batch, BatchSummary};
use crmcat_core::workflows::*;
use crmcat_core::{audit_trail, AuditEntry, Catalog, CatalogConfig, Committed, Iri, Object, Profile, StatementId};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Config;
use crate::envelope::AppError;

pub const DEFAULT_PAGE: usize = 100;
pub const MAX_PAGE: usize = 1000;

pub fn catalog_config(config: &Config) -> CatalogConfig {
    CatalogConfig {
        profile: config.profile,
        base: config.base.clone(),
        ..CatalogConfig::default()
    }
}

fn id_source(config: &Config) -> Box<dyn IdSource> {
    match config.id_epoch {
        Some(epoch) => Box::new(SequentialIds::new(epoch)),
        None => Box::new(UlidSource::default()),
    }
}

/// Opens (or creates) the store named by `config`.
pub fn open(config: &Config) -> Result<Catalog, AppError> {
    let mut cat = open_store(&config.store, catalog_config(config), id_source(config))?;
    if config.id_epoch.is_some() {
        let minted = cat.log_records().iter().filter_map(|r| match &r.event {
            LogEvent::EntityCreated(e) => Some(&e.iri),
            _ => None,
        });
        if let Some(ids) = SequentialIds::resume(minted) {
            cat.replace_ids(Box::new(ids));
        }
    }
    cat.set_profile(config.profile);
    Ok(cat)
}

/// One workflow invocation, as posted to the service or built from flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Workflow {
    Accession(CassetteAccessionSpec),
    RegisterOperator(RegisterOperatorSpec),
    RegisterObject(RegisterObjectSpec),
    Holding(HoldingSpec),
    Regroup(RegroupSpec),
    Digitize(DigitizationSpec),
    Photo(PhotographSpec),
    Decompose(DecomposeSpec),
    Link(LinkSpec),
    Verify(VerificationSpec),
}

/// A workflow's own result next to the audit entry of its activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowOutcome {
    pub result: Value,
    pub audit: AuditEntry,
}

fn outcome<T: Serialize>(c: Committed<T>) -> WorkflowOutcome {
    WorkflowOutcome {
        result: serde_json::to_value(c.value).expect("workflow results serialize"),
        audit: c.audit,
    }
}

impl Workflow {
    /// Route segment under `/api/workflows/`; also the CLI subcommand name.
    pub const NAMES: [&'static str; 10] = [
        "accession",
        "operator",
        "object",
        "holding",
        "regroup",
        "digitize",
        "photo",
        "decompose",
        "link",
        "verify",
    ];

    /// Builds the workflow named `name` from a JSON body.
    pub fn from_json(name: &str, body: &[u8]) -> Result<Workflow, AppError> {
        fn parse<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, AppError> {
            serde_json::from_slice(body).map_err(|e| AppError::bad_body(&e))
        }
        Ok(match name {
            "accession" => Workflow::Accession(parse(body)?),
            "operator" => Workflow::RegisterOperator(parse(body)?),
            "object" => Workflow::RegisterObject(parse(body)?),
            "holding" => Workflow::Holding(parse(body)?),
            "regroup" => Workflow::Regroup(parse(body)?),
            "digitize" => Workflow::Digitize(parse(body)?),
            "photo" => Workflow::Photo(parse(body)?),
            "decompose" => Workflow::Decompose(parse(body)?),
            "link" => Workflow::Link(parse(body)?),
            "verify" => Workflow::Verify(parse(body)?),
            other => return Err(AppError::not_found(format!("workflow {other:?}")).with_field("workflow")),
        })
    }

    pub fn run(&self, cat: &mut Catalog) -> Result<WorkflowOutcome, AppError> {
        Ok(match self {
            Workflow::Accession(s) => outcome(accession_cassette(cat, s)?),
            Workflow::RegisterOperator(s) => outcome(register_operator(cat, s)?),
            Workflow::RegisterObject(s) => outcome(register_object(cat, s)?),
            Workflow::Holding(s) => outcome(create_holding(cat, s)?),
            Workflow::Regroup(s) => outcome(regroup_part(cat, s)?),
            Workflow::Digitize(s) => outcome(record_digitization(cat, s)?),
            Workflow::Photo(s) => outcome(record_photograph(cat, s)?),
            Workflow::Decompose(s) => outcome(decompose_inlay(cat, s)?),
            Workflow::Link(s) => outcome(link_external_reference(cat, s)?),
            Workflow::Verify(s) => outcome(record_verification(cat, s)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TosecBatch {
    pub filenames: Vec<String>,
    #[serde(flatten)]
    pub by: Attribution,
}

pub fn ingest(cat: &mut Catalog, batch: &TosecBatch) -> BatchSummary {
    ingest_batch(cat, &batch.filenames, &batch.by)
}

/// Entity summary used in every read response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityView {
    pub iri: Iri,
    pub class: String,
    pub class_label: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal: Option<String>,
    pub types: Vec<String>,
    pub created_by: Iri,
}

fn entity_view(g: &Graph, e: &Entity) -> EntityView {
    EntityView {
        iri: e.iri.clone(),
        class: e.class_code.clone(),
        class_label: g.registry().class(&e.class_code).map(|c| c.label.clone()).unwrap_or_default(),
        label: label_of(g, &e.iri),
        literal: e.literal.clone(),
        types: g.type_labels(&e.iri).into_iter().map(str::to_string).collect(),
        created_by: e.created_by.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborView {
    pub statement: StatementId,
    pub property: String,
    pub property_label: String,
    /// `out` when the focus is the subject.
    pub direction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
    pub asserted_by: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<EntityView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub entity: EntityView,
    pub neighbors: Vec<NeighborView>,
}

pub fn parse_direction(text: Option<&str>) -> Result<Direction, AppError> {
    match text.unwrap_or("both") {
        "out" => Ok(Direction::Out),
        "in" => Ok(Direction::In),
        "both" => Ok(Direction::Both),
        other => Err(AppError::usage(format!("direction must be out, in or both, not {other:?}")).with_field("direction")),
    }
}

/// An entity with its live statements in the requested direction.
pub fn neighborhood(g: &Graph, iri: &Iri, direction: Direction, property: Option<&str>) -> Result<Neighborhood, AppError> {
    let entity = g.entity(iri).ok_or_else(|| AppError::not_found(iri))?;
    let neighbors = g
        .neighbors(iri, direction, property)?
        .into_iter()
        .map(|n| {
            let st = &n.statement;
            let def = g.registry().property(&st.property);
            let outward = &st.subject == iri && direction != Direction::In;
            let property_label = def
                .map(|d| {
                    if outward {
                        d.forward_label.clone()
                    } else {
                        d.inverse_label.clone().unwrap_or_else(|| d.forward_label.clone())
                    }
                })
                .unwrap_or_default();
            let (other, literal) = match &n.other {
                Object::Iri(o) => (g.entity(o).map(|e| entity_view(g, e)), None),
                Object::Literal(l) => (None, Some(l.clone())),
            };
            NeighborView {
                statement: st.id,
                property: st.property.clone(),
                property_label,
                direction: if outward { "out" } else { "in" }.to_string(),
                qualifier: st.type_qualifier.as_ref().map(|q| label_of(g, q)),
                asserted_by: st.asserted_by.clone(),
                other,
                literal,
            }
        })
        .collect();
    Ok(Neighborhood {
        entity: entity_view(g, entity),
        neighbors,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraverseRequest {
    pub start: Iri,
    pub steps: Vec<TraversalStep>,
    #[serde(default)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraverseHit {
    pub end: EntityView,
    pub path: Vec<StatementId>,
}

pub fn traverse(g: &Graph, req: &TraverseRequest) -> Result<Vec<TraverseHit>, AppError> {
    if g.entity(&req.start).is_none() {
        return Err(AppError::not_found(&req.start).with_field("start"));
    }
    let pattern = TraversalPattern {
        steps: req.steps.clone(),
        limit: req.limit.unwrap_or(DEFAULT_PAGE).min(MAX_PAGE),
    };
    Ok(query::traverse(g, &req.start, &pattern)?
        .into_iter()
        .filter_map(|hit| {
            Some(TraverseHit {
                end: entity_view(g, g.entity(&hit.end)?),
                path: hit.path,
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Backlog,
    Unverified,
    Consistency,
}

impl FromStr for ReportKind {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self, AppError> {
        match s {
            "backlog" => Ok(ReportKind::Backlog),
            "unverified" => Ok(ReportKind::Unverified),
            "consistency" => Ok(ReportKind::Consistency),
            other => Err(AppError::not_found(format!("report {other:?}")).with_field("kind")),
        }
    }
}

pub fn report(g: &Graph, kind: ReportKind, profile: Option<Profile>) -> Report {
    match kind {
        ReportKind::Backlog => query::report_backlog(g),
        ReportKind::Unverified => query::report_unverified(g),
        ReportKind::Consistency => query::report_consistency(g, profile.unwrap_or(g.profile())),
    }
}

/// A slice of report rows with the total before paging.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportPage {
    pub kind: String,
    pub generated_at: String,
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub rows: Vec<ReportRow>,
}

pub fn page(report: Report, offset: usize, limit: Option<usize>) -> ReportPage {
    let limit = limit.unwrap_or(DEFAULT_PAGE).clamp(1, MAX_PAGE);
    let total = report.rows.len();
    ReportPage {
        kind: report.kind,
        generated_at: report.generated_at,
        total,
        offset,
        limit,
        rows: report.rows.into_iter().skip(offset).take(limit).collect(),
    }
}

pub fn audit(g: &Graph, iri: &Iri) -> Result<Vec<AuditEntry>, AppError> {
    if g.entity(iri).is_none() {
        return Err(AppError::not_found(iri));
    }
    Ok(audit_trail(g, iri)?)
}

/// Entities carrying an identifier literal, or typed with a label.
pub fn search(g: &Graph, identifier: Option<&str>, type_label: Option<&str>, class: Option<&str>) -> Vec<EntityView> {
    let iris = match (identifier, type_label) {
        (Some(id), _) => query::find_by_identifier(g, id),
        (None, Some(label)) => query::find_by_type(g, label, class),
        (None, None) => Vec::new(),
    };
    iris.iter().filter_map(|i| g.entity(i)).map(|e| entity_view(g, e)).collect()
}
