//! Read-only lookups, traversals and curator reports over a graph snapshot.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CatalogError, Result};
use crate::ledger::label_of;
use crate::model::vocabulary as v;
use crate::model::{Graph, Iri, Profile, StatementId};

/// Owners of every E42/E41 whose literal equals `value` exactly.
pub fn find_by_identifier(graph: &Graph, value: &str) -> Vec<Iri> {
    let owners: BTreeSet<Iri> = graph
        .entities_with_literal(value)
        .filter(|e| e.class_code == "E42" || e.class_code == "E41")
        .flat_map(|e| graph.in_statements(&e.iri, Some("P1")))
        .map(|s| s.subject.clone())
        .collect();
    owners.into_iter().collect()
}

/// Entities carrying a live P2 to the type labelled `label`, optionally
/// restricted to subclasses of `class`.
pub fn find_by_type(graph: &Graph, label: &str, class: Option<&str>) -> Vec<Iri> {
    let Some(t) = graph.type_by_label(label) else {
        return Vec::new();
    };
    let found: BTreeSet<Iri> = graph
        .in_statements(t, Some("P2"))
        .map(|s| &s.subject)
        .filter(|iri| class.is_none_or(|c| graph.entity_is_a(iri, c)))
        .cloned()
        .collect();
    found.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepDirection {
    Out,
    In,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraversalStep {
    pub property: String,
    pub direction: StepDirection,
    #[serde(default)]
    pub qualifier: Option<String>,
    #[serde(default)]
    pub target_class: Option<String>,
}

impl TraversalStep {
    pub fn out(property: &str) -> Self {
        TraversalStep {
            property: property.to_string(),
            direction: StepDirection::Out,
            qualifier: None,
            target_class: None,
        }
    }

    pub fn inward(property: &str) -> Self {
        TraversalStep {
            direction: StepDirection::In,
            ..TraversalStep::out(property)
        }
    }

    pub fn qualified(mut self, label: &str) -> Self {
        self.qualifier = Some(label.to_string());
        self
    }

    pub fn to_class(mut self, class: &str) -> Self {
        self.target_class = Some(class.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraversalPattern {
    pub steps: Vec<TraversalStep>,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathHit {
    pub end: Iri,
    /// Statement followed at each step.
    pub path: Vec<StatementId>,
}

/// Applies the steps breadth-first over live statements. Paths are ordered
/// by the statement ids taken at each step; at most `limit` are returned.
pub fn traverse(graph: &Graph, start: &Iri, pattern: &TraversalPattern) -> Result<Vec<PathHit>> {
    if pattern.steps.is_empty() {
        return Err(CatalogError::invalid("steps", "at least one step is required"));
    }
    if pattern.limit == 0 {
        return Err(CatalogError::invalid("limit", "must be positive"));
    }
    graph.require_entity(start)?;
    for step in &pattern.steps {
        if graph.registry().property(&step.property).is_none() {
            return Err(CatalogError::UnknownProperty(step.property.clone()));
        }
        if let Some(c) = &step.target_class {
            if graph.registry().class(c).is_none() {
                return Err(CatalogError::UnknownClass(c.clone()));
            }
        }
    }

    let mut frontier = vec![PathHit {
        end: start.clone(),
        path: Vec::new(),
    }];
    for (i, step) in pattern.steps.iter().enumerate() {
        let last = i + 1 == pattern.steps.len();
        let qualifier = match &step.qualifier {
            Some(label) => match graph.type_by_label(label) {
                Some(q) => Some(q),
                None => return Ok(Vec::new()),
            },
            None => None,
        };
        let mut next = Vec::new();
        'hits: for hit in &frontier {
            let candidates: Vec<_> = match step.direction {
                StepDirection::Out => graph.out_statements(&hit.end, Some(&step.property)).collect(),
                StepDirection::In => graph.in_statements(&hit.end, Some(&step.property)).collect(),
            };
            for st in candidates {
                if qualifier.is_some() && st.type_qualifier.as_ref() != qualifier {
                    continue;
                }
                let other = match step.direction {
                    StepDirection::Out => match st.object_iri() {
                        Some(o) => o,
                        None => continue,
                    },
                    StepDirection::In => &st.subject,
                };
                if let Some(c) = &step.target_class {
                    if !graph.entity_is_a(other, c) {
                        continue;
                    }
                }
                let mut path = hit.path.clone();
                path.push(st.id);
                next.push(PathHit {
                    end: other.clone(),
                    path,
                });
                if last && next.len() == pattern.limit {
                    break 'hits;
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(frontier)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub iri: Iri,
    pub label: String,
    pub detail: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub rows: Vec<ReportRow>,
    pub generated_at: String,
}

impl Report {
    fn new(kind: &str, rows: BTreeMap<Iri, BTreeMap<String, String>>, graph: &Graph) -> Report {
        Report {
            kind: kind.to_string(),
            rows: rows
                .into_iter()
                .map(|(iri, detail)| ReportRow {
                    label: label_of(graph, &iri),
                    iri,
                    detail,
                })
                .collect(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn iris(&self) -> Vec<&Iri> {
        self.rows.iter().map(|r| &r.iri).collect()
    }

    /// One tab-separated line per row.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(row.iri.as_str());
            out.push('\t');
            out.push_str(&row.label);
            for (k, val) in &row.detail {
                out.push_str(&format!("\t{k}={val}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Tapes with a live P16 from an E65 typed "digitization".
pub fn digitized_tapes(graph: &Graph) -> BTreeSet<Iri> {
    find_by_type(graph, v::MAGNETIC_TAPE, Some("E22"))
        .into_iter()
        .filter(|tape| {
            graph
                .in_statements(tape, Some("P16"))
                .any(|s| graph.entity_is_a(&s.subject, "E65") && graph.has_type(&s.subject, v::DIGITIZATION))
        })
        .collect()
}

/// Accessioned tapes still waiting for digitization.
pub fn report_backlog(graph: &Graph) -> Report {
    let done = digitized_tapes(graph);
    let rows = find_by_type(graph, v::MAGNETIC_TAPE, Some("E22"))
        .into_iter()
        .filter(|t| !done.contains(t))
        .map(|t| (t, BTreeMap::new()))
        .collect();
    Report::new("backlog", rows, graph)
}

fn qualifier_label<'g>(graph: &'g Graph, q: Option<&Iri>) -> Option<&'g str> {
    graph.entity(q?)?.literal.as_deref()
}

/// Binaries and captures without a confirmed emulator match.
pub fn report_unverified(graph: &Graph) -> Report {
    let mut rows = BTreeMap::new();
    for label in [v::SOFTWARE_IMAGE, v::RAW_AUDIO] {
        for iri in find_by_type(graph, label, Some("E73")) {
            let outcomes: Vec<&str> = graph
                .out_statements(&iri, Some("P67"))
                .filter_map(|s| qualifier_label(graph, s.type_qualifier.as_ref()))
                .collect();
            if outcomes.contains(&v::CONFIRMED_MATCH) {
                continue;
            }
            let status = if outcomes.contains(&v::MISMATCH) { "mismatch" } else { "unchecked" };
            let mut detail = BTreeMap::new();
            detail.insert("status".to_string(), status.to_string());
            detail.insert("type".to_string(), label.to_string());
            rows.insert(iri, detail);
        }
    }
    Report::new("unverified", rows, graph)
}

/// Profile violations, untyped identifiers and entities whose creating
/// activity is not in the ledger.
pub fn report_consistency(graph: &Graph, profile: Profile) -> Report {
    let mut rows: BTreeMap<Iri, BTreeMap<String, String>> = BTreeMap::new();
    for violation in graph.validate(profile) {
        if let Some(st) = graph.statement(violation.statement) {
            rows.entry(st.subject.clone())
                .or_default()
                .insert(format!("statement {}", st.id), violation.constraint.to_string());
        }
    }
    for iri in graph.entities_of_class("E42") {
        if graph.out_statements(iri, Some("P2")).next().is_none() {
            rows.entry(iri.clone())
                .or_default()
                .insert("identifier".into(), "no type".into());
        }
    }
    for e in graph.entities() {
        if graph.activity(&e.created_by).is_none() {
            rows.entry(e.iri.clone())
                .or_default()
                .insert("created_by".into(), format!("{} is not a committed activity", e.created_by));
        }
    }
    Report::new("consistency", rows, graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{ActivityRequest, Catalog, CatalogConfig};
    use crate::model::Entity;
    use crate::workflows::*;

    const TS: &str = "2024-05-02/2024-05-02";

    struct Fixture {
        cat: Catalog,
        op: Iri,
        tapes: Vec<Iri>,
        recorder: Iri,
    }

    fn fixture() -> Fixture {
        let mut cat = Catalog::deterministic(CatalogConfig::default()).unwrap();
        let op = register_operator(
            &mut cat,
            &RegisterOperatorSpec { name: "Volunteer".into(), operator: None, timespan: TS.into() },
        )
        .unwrap()
        .value;
        let mut tapes = Vec::new();
        for id in ["FHKD-0001", "FHKD-0002"] {
            let acc = accession_cassette(
                &mut cat,
                &CassetteAccessionSpec {
                    inventory_id: id.into(),
                    parts: vec![PartSpec::new(PartKind::Tape)],
                    source: None,
                    by: Attribution::new(&op, TS),
                },
            )
            .unwrap()
            .value;
            tapes.push(acc.parts[0].clone());
        }
        let recorder = register_object(
            &mut cat,
            &RegisterObjectSpec {
                type_label: v::TAPE_RECORDER.into(),
                name: None,
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap()
        .value;
        Fixture { cat, op, tapes, recorder }
    }

    fn digitize(f: &mut Fixture, tape: usize) -> (Iri, Iri) {
        let done = record_digitization(
            &mut f.cat,
            &DigitizationSpec {
                tape: f.tapes[tape].clone(),
                recorder: f.recorder.clone(),
                file_path: format!("/captures/{tape}.wav"),
                storage_place: "nas01".into(),
                by: Attribution::new(&f.op, TS),
            },
        )
        .unwrap();
        (done.audit.activity_iri, done.value)
    }

    #[test]
    fn identifier_and_type_lookup() {
        let f = fixture();
        let g = f.cat.graph();
        let sets = find_by_identifier(g, "FHKD-0001");
        assert_eq!(sets.len(), 1);
        assert!(g.has_type(&sets[0], v::CASSETTE_SET));
        assert!(find_by_identifier(g, "FHKD-9999").is_empty());
        assert_eq!(find_by_type(g, v::MAGNETIC_TAPE, None), f.tapes);
        assert!(find_by_type(g, "never used", None).is_empty());
        assert!(find_by_type(g, v::MAGNETIC_TAPE, Some("E73")).is_empty());
    }

    #[test]
    fn shared_appellation_returns_both_owners() {
        let mut f = fixture();
        for _ in 0..2 {
            register_object(
                &mut f.cat,
                &RegisterObjectSpec {
                    type_label: v::TAPE_RECORDER.into(),
                    name: Some("Datassette".into()),
                    by: Attribution::new(&f.op, TS),
                },
            )
            .unwrap();
        }
        assert_eq!(find_by_identifier(f.cat.graph(), "Datassette").len(), 2);
    }

    #[test]
    fn recorder_traversal_and_limit() {
        let mut f = fixture();
        let (_, a) = digitize(&mut f, 0);
        let (_, b) = digitize(&mut f, 1);
        let pattern = TraversalPattern {
            steps: vec![TraversalStep::inward("P16"), TraversalStep::out("P94").to_class("E73")],
            limit: 10,
        };
        let g = f.cat.graph();
        let hits = traverse(g, &f.recorder, &pattern).unwrap();
        let ends: Vec<_> = hits.iter().map(|h| h.end.clone()).collect();
        assert_eq!(ends, vec![a, b]);
        assert!(hits.iter().all(|h| h.path.len() == 2));
        let one = traverse(g, &f.recorder, &TraversalPattern { limit: 1, ..pattern.clone() }).unwrap();
        assert_eq!(one.len(), 1);
        let none = traverse(g, &f.tapes[0], &TraversalPattern { steps: vec![TraversalStep::out("P94")], limit: 5 }).unwrap();
        assert!(none.is_empty());
        assert!(matches!(
            traverse(g, &Iri::new("urn:crmcat:nope"), &pattern),
            Err(CatalogError::UnknownIri(_))
        ));
        assert!(traverse(g, &f.recorder, &TraversalPattern { steps: vec![], limit: 1 }).is_err());
    }

    #[test]
    fn backlog_tracks_live_digitizations() {
        let mut f = fixture();
        assert_eq!(report_backlog(f.cat.graph()).rows.len(), 2);
        let (activity, _) = digitize(&mut f, 0);
        let report = report_backlog(f.cat.graph());
        assert_eq!(report.iris(), vec![&f.tapes[1]]);

        // retract the P16 to the tape; it returns to the backlog
        let edge = f
            .cat
            .graph()
            .out_statements(&activity, Some("P16"))
            .find(|s| s.object_iri() == Some(&f.tapes[0]))
            .unwrap()
            .id;
        let kind = f.cat.kind(v::DIGITIZATION).unwrap();
        f.cat
            .run_activity(ActivityRequest::new(&f.op, &kind, TS, "capture was unusable"), |c, ctx| {
                c.retract_statement(ctx, edge).map(|_| ())
            })
            .unwrap();
        assert_eq!(report_backlog(f.cat.graph()).rows.len(), 2);
    }

    #[test]
    fn unverified_statuses() {
        let mut f = fixture();
        let (_, a) = digitize(&mut f, 0);
        let (_, b) = digitize(&mut f, 1);
        let report = report_unverified(f.cat.graph());
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.detail["status"] == "unchecked"));
        for (bin, outcome) in [(&a, Outcome::Confirmed), (&b, Outcome::Mismatch)] {
            let other = if bin == &a { b.clone() } else { a.clone() };
            record_verification(
                &mut f.cat,
                &VerificationSpec {
                    binary: bin.clone(),
                    title: other,
                    outcome,
                    by: Attribution::new(&f.op, TS),
                },
            )
            .unwrap();
        }
        let report = report_unverified(f.cat.graph());
        assert_eq!(report.iris(), vec![&b]);
        assert_eq!(report.rows[0].detail["status"], "mismatch");
    }

    #[test]
    fn consistency_findings() {
        let mut f = fixture();
        assert!(report_consistency(f.cat.graph(), Profile::Paper).rows.is_empty());
        digitize(&mut f, 0);
        let strict = report_consistency(f.cat.graph(), Profile::Strict);
        assert!(strict.rows.iter().any(|r| r.detail.values().any(|v| v.contains("P53"))));

        let mut graph = (*f.cat.snapshot()).clone();
        let bogus = Iri::new("urn:crmcat:injected");
        graph.inject_raw_entity(Entity {
            iri: bogus.clone(),
            class_code: "E42".into(),
            literal: Some("X-1".into()),
            created_by: Iri::new("urn:crmcat:ghost"),
        });
        let report = report_consistency(&graph, Profile::Paper);
        assert_eq!(report.iris(), vec![&bogus]);
        assert_eq!(report.rows[0].detail.len(), 2);
    }
}
