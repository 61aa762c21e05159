//! Archivist workflows. Each call runs in exactly one activity and either
//! commits its whole pattern or leaves the store untouched.

use serde::{Deserialize, Serialize};

use crate::error::{CatalogError, Result};
use crate::ledger::{ActivityRequest, Catalog, Committed};
use crate::model::vocabulary as v;
use crate::model::{is_absolute_iri, Iri, StatementId};

/// Who performed a workflow, and when.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribution {
    pub operator: Iri,
    pub timespan: String,
    #[serde(default)]
    pub note: Option<String>,
}

impl Attribution {
    pub fn new(operator: &Iri, timespan: impl Into<String>) -> Self {
        Attribution {
            operator: operator.clone(),
            timespan: timespan.into(),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn request(&self, cat: &Catalog, kind: &str, default_note: String) -> Result<ActivityRequest> {
        let note = self
            .note
            .clone()
            .filter(|n| !n.trim().is_empty())
            .unwrap_or(default_note);
        Ok(ActivityRequest::new(&self.operator, &cat.kind(kind)?, &self.timespan, note))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartKind {
    Tape,
    Inlay,
    Other,
}

impl PartKind {
    pub fn type_label(self) -> &'static str {
        match self {
            PartKind::Tape => v::MAGNETIC_TAPE,
            PartKind::Inlay => v::PAPER_INLAY,
            PartKind::Other => v::OTHER_PART,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartSpec {
    pub kind: PartKind,
    #[serde(default)]
    pub description: Option<String>,
}

impl PartSpec {
    pub fn new(kind: PartKind) -> Self {
        PartSpec { kind, description: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub name: String,
    #[serde(default)]
    pub address: Option<String>,
    /// Label of the E55 distinguishing the kind of source, e.g. "donor".
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassetteAccessionSpec {
    pub inventory_id: String,
    pub parts: Vec<PartSpec>,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(flatten)]
    pub by: Attribution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessionResult {
    pub set: Iri,
    pub parts: Vec<Iri>,
    pub identifier: Iri,
    pub source: Option<Iri>,
}

fn non_empty(field: &'static str, value: &str) -> Result<()> {
    if value.trim().is_empty() {
        Err(CatalogError::invalid(field, "must not be empty"))
    } else {
        Ok(())
    }
}

fn require_class(cat: &Catalog, iri: &Iri, class: &str) -> Result<()> {
    let entity = cat.lookup(iri).ok_or_else(|| CatalogError::UnknownIri(iri.clone()))?;
    if cat.graph().registry().subsumed(&entity.class_code, class) {
        Ok(())
    } else {
        Err(CatalogError::WrongClass {
            iri: iri.clone(),
            expected: class.to_string(),
            found: entity.class_code.clone(),
        })
    }
}

fn require_type(cat: &Catalog, iri: &Iri, label: &str) -> Result<()> {
    if cat.lookup(iri).is_none() {
        return Err(CatalogError::UnknownIri(iri.clone()));
    }
    if cat.graph().has_type(iri, label) {
        Ok(())
    } else {
        Err(CatalogError::MissingType {
            iri: iri.clone(),
            label: label.to_string(),
        })
    }
}

/// Intake of a cassette: the box set, its identifier, its parts and,
/// optionally, the source it came from.
pub fn accession_cassette(cat: &mut Catalog, spec: &CassetteAccessionSpec) -> Result<Committed<AccessionResult>> {
    non_empty("inventory_id", &spec.inventory_id)?;
    if spec.parts.is_empty() {
        return Err(CatalogError::invalid("parts", "at least one part is required"));
    }
    if cat
        .graph()
        .entities_with_literal(spec.inventory_id.trim())
        .any(|e| e.class_code == "E42")
    {
        return Err(CatalogError::DuplicateIdentifier(spec.inventory_id.trim().to_string()));
    }
    if let Some(source) = &spec.source {
        non_empty("source.name", &source.name)?;
        non_empty("source.kind", &source.kind)?;
    }
    let req = spec
        .by
        .request(cat, v::ACCESSION, format!("accession of {}", spec.inventory_id.trim()))?;
    cat.run_activity(req, |c, ctx| {
        let set = c.create_entity(ctx, "E22", None)?;
        let set_type = c.vocab(ctx, v::CASSETTE_SET)?;
        c.link(ctx, &set, "P2", &set_type)?;

        let identifier = c.create_entity(ctx, "E42", Some(spec.inventory_id.trim()))?;
        c.link(ctx, &set, "P1", &identifier)?;
        let id_type = c.vocab(ctx, v::INVENTORY_ID)?;
        c.link(ctx, &identifier, "P2", &id_type)?;

        let mut parts = Vec::with_capacity(spec.parts.len());
        for part in &spec.parts {
            let iri = c.create_entity(ctx, "E22", None)?;
            c.link(ctx, &set, "P106", &iri)?;
            let part_type = c.vocab(ctx, part.kind.type_label())?;
            c.link(ctx, &iri, "P2", &part_type)?;
            if let Some(desc) = part.description.as_deref().filter(|d| !d.trim().is_empty()) {
                c.assert_statement(ctx, &iri, "P3", crate::model::Object::Literal(desc.to_string()), None)?;
            }
            parts.push(iri);
        }

        let source = match &spec.source {
            Some(src) => {
                let actor = c.create_entity(ctx, "E39", None)?;
                let mut names = vec![(v::NAME, src.name.as_str())];
                if let Some(addr) = src.address.as_deref().filter(|a| !a.trim().is_empty()) {
                    names.push((v::ADDRESS, addr));
                }
                for (label, text) in names {
                    let appellation = c.create_entity(ctx, "E41", Some(text.trim()))?;
                    c.link(ctx, &actor, "P1", &appellation)?;
                    let t = c.vocab(ctx, label)?;
                    c.link(ctx, &appellation, "P2", &t)?;
                }
                let kind = c.vocab(ctx, src.kind.trim())?;
                c.link(ctx, &actor, "P2", &kind)?;
                Some(actor)
            }
            None => None,
        };

        c.link(ctx, &ctx.activity_iri, "P16", &set)?;
        Ok(AccessionResult {
            set,
            parts,
            identifier,
            source,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterOperatorSpec {
    pub name: String,
    /// Registering actor; the system actor when absent.
    #[serde(default)]
    pub operator: Option<Iri>,
    pub timespan: String,
}

/// Adds an E39 that can later be named as the operator of activities.
pub fn register_operator(cat: &mut Catalog, spec: &RegisterOperatorSpec) -> Result<Committed<Iri>> {
    non_empty("name", &spec.name)?;
    let operator = match &spec.operator {
        Some(o) => o.clone(),
        None => cat
            .system_actor()
            .cloned()
            .ok_or_else(|| CatalogError::invalid("operator", "store has no system actor"))?,
    };
    let req = ActivityRequest::new(
        &operator,
        &cat.kind(v::REGISTRATION)?,
        &spec.timespan,
        format!("register operator {}", spec.name.trim()),
    );
    cat.run_activity(req, |c, ctx| c.create_entity(ctx, "E39", Some(spec.name.trim())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterObjectSpec {
    /// E55 label classifying the object, e.g. "tape recorder".
    pub type_label: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub by: Attribution,
}

/// Registers a stand-alone E22 such as a tape recorder.
pub fn register_object(cat: &mut Catalog, spec: &RegisterObjectSpec) -> Result<Committed<Iri>> {
    non_empty("type_label", &spec.type_label)?;
    let req = spec
        .by
        .request(cat, v::REGISTRATION, format!("register {}", spec.type_label.trim()))?;
    cat.run_activity(req, |c, ctx| {
        let object = c.create_entity(ctx, "E22", None)?;
        let t = c.vocab(ctx, spec.type_label.trim())?;
        c.link(ctx, &object, "P2", &t)?;
        if let Some(name) = spec.name.as_deref().filter(|n| !n.trim().is_empty()) {
            let appellation = c.create_entity(ctx, "E41", Some(name.trim()))?;
            c.link(ctx, &object, "P1", &appellation)?;
            let name_type = c.vocab(ctx, v::NAME)?;
            c.link(ctx, &appellation, "P2", &name_type)?;
        }
        Ok(object)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldingSpec {
    pub label: String,
    pub members: Vec<Iri>,
    #[serde(flatten)]
    pub by: Attribution,
}

/// Groups objects that arrived together into an E78 Curated Holding.
pub fn create_holding(cat: &mut Catalog, spec: &HoldingSpec) -> Result<Committed<Iri>> {
    non_empty("label", &spec.label)?;
    if spec.members.is_empty() {
        return Err(CatalogError::invalid("members", "at least one member is required"));
    }
    for m in &spec.members {
        require_class(cat, m, "E22")?;
    }
    let req = spec
        .by
        .request(cat, v::HOLDING_CURATION, format!("create holding {}", spec.label.trim()))?;
    cat.run_activity(req, |c, ctx| {
        let holding = c.create_entity(ctx, "E78", None)?;
        let label = c.create_entity(ctx, "E41", Some(spec.label.trim()))?;
        c.link(ctx, &holding, "P1", &label)?;
        for m in &spec.members {
            c.link(ctx, &holding, "P106", m)?;
        }
        Ok(holding)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegroupSpec {
    pub part: Iri,
    pub from: Iri,
    pub to: Iri,
    #[serde(flatten)]
    pub by: Attribution,
}

/// Moves a part to another set: retracts the old P106, asserts the new one.
pub fn regroup_part(cat: &mut Catalog, spec: &RegroupSpec) -> Result<Committed<StatementId>> {
    if spec.from == spec.to {
        return Err(CatalogError::invalid("to", "part already belongs to that set"));
    }
    if spec.part == spec.to {
        return Err(CatalogError::invalid("to", "a part cannot contain itself"));
    }
    cat.graph().require_entity(&spec.to)?;
    let edge = cat
        .graph()
        .out_statements(&spec.from, Some("P106"))
        .find(|s| s.object_iri() == Some(&spec.part))
        .map(|s| s.id)
        .ok_or_else(|| CatalogError::invalid("from", "no live P106 edge from this set to the part"))?;
    let req = spec.by.request(cat, v::REGROUPING, "regroup mispaired part".to_string())?;
    cat.run_activity(req, |c, ctx| {
        c.retract_statement(ctx, edge)?;
        c.link(ctx, &spec.to, "P106", &spec.part)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitizationSpec {
    pub tape: Iri,
    pub recorder: Iri,
    pub file_path: String,
    pub storage_place: String,
    #[serde(flatten)]
    pub by: Attribution,
}

/// Records a tape capture: the recorder and tape used, the audio file made,
/// its path and where it is stored.
pub fn record_digitization(cat: &mut Catalog, spec: &DigitizationSpec) -> Result<Committed<Iri>> {
    if spec.tape == spec.recorder {
        return Err(CatalogError::invalid("recorder", "recorder must differ from the tape"));
    }
    non_empty("file_path", &spec.file_path)?;
    non_empty("storage_place", &spec.storage_place)?;
    require_type(cat, &spec.tape, v::MAGNETIC_TAPE)?;
    require_type(cat, &spec.recorder, v::TAPE_RECORDER)?;
    let req = spec
        .by
        .request(cat, v::DIGITIZATION, format!("digitize to {}", spec.file_path.trim()))?
        .with_class("E65");
    cat.run_activity(req, |c, ctx| {
        let activity = &ctx.activity_iri;
        c.link(ctx, activity, "P16", &spec.tape)?;
        c.link(ctx, activity, "P16", &spec.recorder)?;
        let audio = c.create_entity(ctx, "E73", None)?;
        let audio_type = c.vocab(ctx, v::RAW_AUDIO)?;
        c.link(ctx, &audio, "P2", &audio_type)?;
        c.link(ctx, activity, "P94", &audio)?;
        attach_file_location(c, ctx, &audio, &spec.file_path, &spec.storage_place)?;
        Ok(audio)
    })
}

fn attach_file_location(
    c: &mut Catalog,
    ctx: &crate::ledger::ActivityContext,
    file: &Iri,
    path: &str,
    place: &str,
) -> Result<()> {
    let path_iri = c.create_entity(ctx, "E41", Some(path.trim()))?;
    let path_type = c.vocab(ctx, v::FILE_PATH)?;
    c.link(ctx, &path_iri, "P2", &path_type)?;
    c.link(ctx, file, "P1", &path_iri)?;
    let place_iri = c.create_entity(ctx, "E53", Some(place.trim()))?;
    c.link(ctx, file, "P53", &place_iri)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotographSpec {
    pub subject: Iri,
    pub file_path: String,
    pub place: String,
    #[serde(flatten)]
    pub by: Attribution,
}

/// Records a documentary photo of `subject`. Cameras are not modelled.
pub fn record_photograph(cat: &mut Catalog, spec: &PhotographSpec) -> Result<Committed<Iri>> {
    non_empty("file_path", &spec.file_path)?;
    non_empty("place", &spec.place)?;
    cat.graph().require_entity(&spec.subject)?;
    let req = spec
        .by
        .request(cat, v::PHOTOGRAPHY, format!("photograph {}", spec.file_path.trim()))?
        .with_class("E65");
    cat.run_activity(req, |c, ctx| {
        let photo = c.create_entity(ctx, "E73", None)?;
        let photo_type = c.vocab(ctx, v::PHOTOGRAPH)?;
        c.link(ctx, &photo, "P2", &photo_type)?;
        c.link(ctx, &ctx.activity_iri, "P94", &photo)?;
        c.link(ctx, &photo, "P62", &spec.subject)?;
        attach_file_location(c, ctx, &photo, &spec.file_path, &spec.place)?;
        Ok(photo)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn type_label(self) -> &'static str {
        match self {
            Side::A => v::SIDE_A,
            Side::B => v::SIDE_B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InlayTitle {
    pub side: Side,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecomposeSpec {
    pub photo: Iri,
    pub titles: Vec<InlayTitle>,
    #[serde(flatten)]
    pub by: Attribution,
}

/// Transcribes the titles written on an inlay photo into one E73 each.
pub fn decompose_inlay(cat: &mut Catalog, spec: &DecomposeSpec) -> Result<Committed<Vec<Iri>>> {
    if spec.titles.is_empty() {
        return Err(CatalogError::invalid("titles", "at least one title is required"));
    }
    for t in &spec.titles {
        non_empty("titles", &t.title)?;
    }
    require_type(cat, &spec.photo, v::PHOTOGRAPH)?;
    let req = spec.by.request(
        cat,
        v::TRANSCRIPTION,
        format!("transcribe {} titles from inlay", spec.titles.len()),
    )?;
    cat.run_activity(req, |c, ctx| {
        let title_type = c.vocab(ctx, v::TITLE)?;
        let qualifier = c.vocab(ctx, v::TRANSCRIBED_FROM)?;
        let mut out = Vec::with_capacity(spec.titles.len());
        for t in &spec.titles {
            let title = c.create_entity(ctx, "E73", None)?;
            c.link(ctx, &title, "P2", &title_type)?;
            let side = c.vocab(ctx, t.side.type_label())?;
            c.link(ctx, &title, "P2", &side)?;
            let text = c.create_entity(ctx, "E41", Some(t.title.trim()))?;
            c.link(ctx, &title, "P1", &text)?;
            c.assert_statement(ctx, &title, "P67", &spec.photo, Some(&qualifier))?;
            out.push(title);
        }
        Ok(out)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub subject: Iri,
    pub external_iri: String,
    /// Label of the E55 qualifying the P67 link.
    pub relation: String,
    #[serde(flatten)]
    pub by: Attribution,
}

/// Points an information object at a resource in another knowledge base.
/// The external resource is held as an opaque E73 shared by all links.
pub fn link_external_reference(cat: &mut Catalog, spec: &LinkSpec) -> Result<Committed<StatementId>> {
    let external = spec.external_iri.trim();
    if !is_absolute_iri(external) {
        return Err(CatalogError::invalid("external_iri", format!("{external:?} is not an absolute IRI")));
    }
    non_empty("relation", &spec.relation)?;
    cat.graph().require_entity(&spec.subject)?;
    let existing = cat
        .graph()
        .entities_with_literal(external)
        .find(|e| e.class_code == "E73" && cat.graph().has_type(&e.iri, v::EXTERNAL_RESOURCE))
        .map(|e| e.iri.clone());
    let req = spec
        .by
        .request(cat, v::REFERENCE_LINKING, format!("link to {external}"))?;
    cat.run_activity(req, |c, ctx| {
        let target = match existing {
            Some(iri) => iri,
            None => {
                let iri = c.create_entity(ctx, "E73", Some(external))?;
                let t = c.vocab(ctx, v::EXTERNAL_RESOURCE)?;
                c.link(ctx, &iri, "P2", &t)?;
                iri
            }
        };
        let relation = c.vocab(ctx, spec.relation.trim())?;
        c.assert_statement(ctx, &spec.subject, "P67", &target, Some(&relation))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Confirmed,
    Mismatch,
}

impl Outcome {
    pub fn qualifier_label(self) -> &'static str {
        match self {
            Outcome::Confirmed => v::CONFIRMED_MATCH,
            Outcome::Mismatch => v::MISMATCH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationSpec {
    pub binary: Iri,
    pub title: Iri,
    pub outcome: Outcome,
    #[serde(flatten)]
    pub by: Attribution,
}

/// Records whether a decoded binary, loaded in an emulator, matches the
/// title claimed for it.
pub fn record_verification(cat: &mut Catalog, spec: &VerificationSpec) -> Result<Committed<StatementId>> {
    if spec.binary == spec.title {
        return Err(CatalogError::invalid("title", "a binary cannot verify itself"));
    }
    require_class(cat, &spec.binary, "E73")?;
    require_class(cat, &spec.title, "E73")?;
    let req = spec.by.request(
        cat,
        v::VERIFICATION,
        format!("emulator check: {}", spec.outcome.qualifier_label()),
    )?;
    cat.run_activity(req, |c, ctx| {
        let qualifier = c.vocab(ctx, spec.outcome.qualifier_label())?;
        c.assert_statement(ctx, &spec.binary, "P67", &spec.title, Some(&qualifier))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::CatalogConfig;
    use crate::model::{Direction, Profile};

    const TS: &str = "2024-05-01T10:00/2024-05-01T10:20";

    fn setup() -> (Catalog, Iri) {
        let mut cat = Catalog::deterministic(CatalogConfig::default()).unwrap();
        let op = register_operator(
            &mut cat,
            &RegisterOperatorSpec {
                name: "Volunteer".into(),
                operator: None,
                timespan: TS.into(),
            },
        )
        .unwrap()
        .value;
        (cat, op)
    }

    fn accession(cat: &mut Catalog, op: &Iri, id: &str) -> AccessionResult {
        accession_cassette(
            cat,
            &CassetteAccessionSpec {
                inventory_id: id.into(),
                parts: vec![PartSpec::new(PartKind::Tape), PartSpec::new(PartKind::Inlay)],
                source: None,
                by: Attribution::new(op, TS),
            },
        )
        .unwrap()
        .value
    }

    fn recorder(cat: &mut Catalog, op: &Iri) -> Iri {
        register_object(
            cat,
            &RegisterObjectSpec {
                type_label: v::TAPE_RECORDER.into(),
                name: Some("Recorder A".into()),
                by: Attribution::new(op, TS),
            },
        )
        .unwrap()
        .value
    }

    #[test]
    fn accession_rejects_duplicates_and_empty_parts() {
        let (mut cat, op) = setup();
        accession(&mut cat, &op, "FHKD-0001");
        let mut spec = CassetteAccessionSpec {
            inventory_id: "FHKD-0001".into(),
            parts: vec![PartSpec::new(PartKind::Tape)],
            source: None,
            by: Attribution::new(&op, TS),
        };
        assert_eq!(
            accession_cassette(&mut cat, &spec).unwrap_err(),
            CatalogError::DuplicateIdentifier("FHKD-0001".into())
        );
        spec.inventory_id = "FHKD-0002".into();
        spec.parts.clear();
        assert!(matches!(
            accession_cassette(&mut cat, &spec),
            Err(CatalogError::Invalid { field: "parts", .. })
        ));
    }

    #[test]
    fn set_neighbors_are_parts() {
        let (mut cat, op) = setup();
        let acc = accession(&mut cat, &op, "FHKD-0001");
        let out: Vec<_> = cat
            .graph()
            .neighbors(&acc.set, Direction::Out, Some("P106"))
            .unwrap()
            .into_iter()
            .map(|n| n.other.as_iri().unwrap().clone())
            .collect();
        assert_eq!(out, acc.parts);
        let up = cat.graph().neighbors(&acc.parts[0], Direction::In, Some("P106")).unwrap();
        assert_eq!(up.len(), 1);
        assert_eq!(up[0].other.as_iri(), Some(&acc.set));
    }

    #[test]
    fn holding_over_three_tapes() {
        let (mut cat, op) = setup();
        let tapes: Vec<Iri> = (1..=3)
            .map(|i| accession(&mut cat, &op, &format!("FHKD-000{i}")).parts[0].clone())
            .collect();
        let holding = create_holding(
            &mut cat,
            &HoldingSpec {
                label: "Donation 2024/05".into(),
                members: tapes.clone(),
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap()
        .value;
        assert_eq!(cat.graph().out_statements(&holding, Some("P106")).count(), 3);

        let err = create_holding(
            &mut cat,
            &HoldingSpec {
                label: "empty".into(),
                members: vec![],
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap_err();
        assert!(matches!(err, CatalogError::Invalid { field: "members", .. }));
    }

    #[test]
    fn holding_fails_atomically_under_strict() {
        let (mut cat, op) = setup();
        let tape = accession(&mut cat, &op, "FHKD-0001").parts[0].clone();
        cat.set_profile(Profile::Strict);
        let before = cat.snapshot();
        let err = create_holding(
            &mut cat,
            &HoldingSpec {
                label: "Donation".into(),
                members: vec![tape],
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap_err();
        assert!(matches!(err, CatalogError::DomainViolation { ref property, .. } if property == "P106"));
        assert_eq!(*before, *cat.snapshot());
        assert!(!cat.is_open());
    }

    #[test]
    fn regroup_moves_part() {
        let (mut cat, op) = setup();
        let a = accession(&mut cat, &op, "FHKD-0001");
        let b = accession(&mut cat, &op, "FHKD-0002");
        let tape = a.parts[0].clone();
        let history_before = cat.graph().statements().iter().filter(|s| s.property == "P106").count();
        let moved = regroup_part(
            &mut cat,
            &RegroupSpec {
                part: tape.clone(),
                from: a.set.clone(),
                to: b.set.clone(),
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap();
        let incoming: Vec<_> = cat.graph().in_statements(&tape, Some("P106")).collect();
        assert_eq!(incoming.len(), 1);
        assert_eq!(incoming[0].subject, b.set);
        assert_eq!(incoming[0].id, moved.value);
        let history_after = cat.graph().statements().iter().filter(|s| s.property == "P106").count();
        assert_eq!(history_after, history_before + 1);
        let old = cat
            .graph()
            .statements()
            .iter()
            .find(|s| s.property == "P106" && s.subject == a.set && s.object_iri() == Some(&tape))
            .unwrap();
        assert_eq!(old.retracted_by.as_ref(), Some(&moved.audit.activity_iri));

        // same set and missing edge
        let same = RegroupSpec {
            part: tape.clone(),
            from: b.set.clone(),
            to: b.set.clone(),
            by: Attribution::new(&op, TS),
        };
        assert!(matches!(regroup_part(&mut cat, &same), Err(CatalogError::Invalid { .. })));
        let missing = RegroupSpec {
            part: tape,
            from: a.set.clone(),
            to: b.set,
            by: Attribution::new(&op, TS),
        };
        assert!(matches!(
            regroup_part(&mut cat, &missing),
            Err(CatalogError::Invalid { field: "from", .. })
        ));
    }

    #[test]
    fn digitization_pattern() {
        let (mut cat, op) = setup();
        let acc = accession(&mut cat, &op, "FHKD-0001");
        let rec = recorder(&mut cat, &op);
        let spec = DigitizationSpec {
            tape: acc.parts[0].clone(),
            recorder: rec.clone(),
            file_path: "/captures/FHKD-0001-A.wav".into(),
            storage_place: "nas01:/archive".into(),
            by: Attribution::new(&op, TS),
        };
        let done = record_digitization(&mut cat, &spec).unwrap();
        let g = cat.graph();
        assert_eq!(done.audit.activity_class, "E65");
        assert!(g.has_type(&done.value, v::RAW_AUDIO));
        let act = &done.audit.activity_iri;
        // recorder -> activity -> audio file
        let via_recorder: Vec<_> = g
            .in_statements(&rec, Some("P16"))
            .flat_map(|s| g.out_statements(&s.subject, Some("P94")))
            .filter_map(|s| s.object_iri().cloned())
            .collect();
        assert_eq!(via_recorder, vec![done.value.clone()]);
        assert_eq!(g.out_statements(act, Some("P16")).count(), 2);

        let mut bad = spec.clone();
        bad.recorder = bad.tape.clone();
        assert!(matches!(
            record_digitization(&mut cat, &bad),
            Err(CatalogError::Invalid { field: "recorder", .. })
        ));
        let mut untyped = spec.clone();
        untyped.tape = acc.parts[1].clone();
        assert!(matches!(
            record_digitization(&mut cat, &untyped),
            Err(CatalogError::MissingType { .. })
        ));

        cat.set_profile(Profile::Strict);
        let before = cat.snapshot();
        assert!(matches!(
            record_digitization(&mut cat, &spec),
            Err(CatalogError::DomainViolation { ref property, .. }) if property == "P53"
        ));
        assert_eq!(*before, *cat.snapshot());
    }

    #[test]
    fn photograph_rules() {
        let (mut cat, op) = setup();
        let acc = accession(&mut cat, &op, "FHKD-0001");
        let spec = PhotographSpec {
            subject: acc.set.clone(),
            file_path: "/photos/FHKD-0001.jpg".into(),
            place: "nas01:/photos".into(),
            by: Attribution::new(&op, TS),
        };
        let photo = record_photograph(&mut cat, &spec).unwrap().value;
        let depicts: Vec<_> = cat.graph().out_statements(&photo, Some("P62")).collect();
        assert_eq!(depicts[0].object_iri(), Some(&acc.set));

        let mut of_photo = spec.clone();
        of_photo.subject = photo.clone();
        assert!(record_photograph(&mut cat, &of_photo).is_ok());

        let mut empty = spec;
        empty.file_path = " ".into();
        assert!(matches!(
            record_photograph(&mut cat, &empty),
            Err(CatalogError::Invalid { field: "file_path", .. })
        ));
    }

    fn photo(cat: &mut Catalog, op: &Iri) -> Iri {
        let acc = accession(cat, op, "FHKD-0009");
        record_photograph(
            cat,
            &PhotographSpec {
                subject: acc.parts[1].clone(),
                file_path: "/photos/inlay.jpg".into(),
                place: "nas01".into(),
                by: Attribution::new(op, TS),
            },
        )
        .unwrap()
        .value
    }

    #[test]
    fn decompose_titles() {
        let (mut cat, op) = setup();
        let photo = photo(&mut cat, &op);
        let titles = vec![
            InlayTitle { side: Side::A, title: "River Raid".into() },
            InlayTitle { side: Side::A, title: "River Raid".into() },
            InlayTitle { side: Side::B, title: "Boulder Dash".into() },
        ];
        let out = decompose_inlay(
            &mut cat,
            &DecomposeSpec {
                photo: photo.clone(),
                titles,
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap()
        .value;
        assert_eq!(out.len(), 3);
        assert_ne!(out[0], out[1]);
        let g = cat.graph();
        let refs: Vec<_> = g.in_statements(&photo, Some("P67")).collect();
        assert_eq!(refs.len(), 3);
        let q = g.type_by_label(v::TRANSCRIBED_FROM).unwrap();
        assert!(refs.iter().all(|s| s.type_qualifier.as_ref() == Some(q)));
        assert!(g.has_type(&out[2], v::SIDE_B));

        let err = decompose_inlay(
            &mut cat,
            &DecomposeSpec {
                photo,
                titles: vec![],
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap_err();
        assert!(matches!(err, CatalogError::Invalid { field: "titles", .. }));
    }

    #[test]
    fn external_links_share_one_entity() {
        let (mut cat, op) = setup();
        let photo = photo(&mut cat, &op);
        let titles = decompose_inlay(
            &mut cat,
            &DecomposeSpec {
                photo,
                titles: vec![InlayTitle { side: Side::A, title: "Zorro".into() }],
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap()
        .value;
        let spec = LinkSpec {
            subject: titles[0].clone(),
            external_iri: "https://www.atarimania.com/game-atari-400-800-xl-xe-zorro_5954.html".into(),
            relation: "game description".into(),
            by: Attribution::new(&op, TS),
        };
        let first = link_external_reference(&mut cat, &spec).unwrap().value;
        let second = link_external_reference(&mut cat, &spec).unwrap().value;
        let g = cat.graph();
        let a = g.statement(first).unwrap().object_iri().unwrap().clone();
        let b = g.statement(second).unwrap().object_iri().unwrap().clone();
        assert_eq!(a, b);
        assert_eq!(g.entities_with_literal(&spec.external_iri).count(), 1);

        let mut bad = spec;
        bad.external_iri = "not a iri".into();
        assert!(matches!(
            link_external_reference(&mut cat, &bad),
            Err(CatalogError::Invalid { field: "external_iri", .. })
        ));
    }

    #[test]
    fn verification_edges() {
        let (mut cat, op) = setup();
        let photo = photo(&mut cat, &op);
        let titles = decompose_inlay(
            &mut cat,
            &DecomposeSpec {
                photo,
                titles: vec![
                    InlayTitle { side: Side::A, title: "Zorro".into() },
                    InlayTitle { side: Side::B, title: "Bruce Lee".into() },
                ],
                by: Attribution::new(&op, TS),
            },
        )
        .unwrap()
        .value;
        let spec = VerificationSpec {
            binary: titles[0].clone(),
            title: titles[1].clone(),
            outcome: Outcome::Confirmed,
            by: Attribution::new(&op, TS),
        };
        let id = record_verification(&mut cat, &spec).unwrap().value;
        let g = cat.graph();
        let st = g.statement(id).unwrap();
        assert_eq!(
            g.entity(st.type_qualifier.as_ref().unwrap()).unwrap().literal.as_deref(),
            Some(v::CONFIRMED_MATCH)
        );
        let mut mismatch = spec.clone();
        mismatch.outcome = Outcome::Mismatch;
        let id = record_verification(&mut cat, &mismatch).unwrap().value;
        let q = cat.graph().statement(id).unwrap().type_qualifier.clone().unwrap();
        assert_eq!(cat.graph().entity(&q).unwrap().literal.as_deref(), Some(v::MISMATCH));

        let mut selfcheck = spec;
        selfcheck.title = selfcheck.binary.clone();
        assert!(matches!(
            record_verification(&mut cat, &selfcheck),
            Err(CatalogError::Invalid { field: "title", .. })
        ));
    }
}
