//! The committed entity/statement store and its live-view indexes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CatalogError, Result};
use crate::model::registry::{LiteralRule, Profile, RangeSpec, Registry};
use crate::model::types::{is_valid_timespan, Entity, Iri, Object, Statement, StatementId};

/// Properties that make up an activity's own scaffold, in assertion order.
pub const SCAFFOLD_PROPERTIES: [&str; 4] = ["P14", "P4", "P2", "P3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
    Both,
}

/// One live statement seen from a focus entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Neighbor {
    pub statement: Statement,
    pub other: Object,
}

/// A committed activity in the ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub iri: Iri,
    pub commit_seq: u64,
    pub scaffold_entities: Vec<Iri>,
    pub scaffold_statements: Vec<StatementId>,
    pub entities_created: usize,
    pub statements_asserted: usize,
    pub statements_retracted: usize,
}

impl ActivityRecord {
    /// Derives scaffold membership and effect counts from the records an
    /// activity produced. The scaffold is the activity entity, the E52 its
    /// first P4 points at, and the first P14/P4/P2/P3 with the activity as
    /// subject.
    pub fn from_effects<'a>(
        iri: &Iri,
        commit_seq: u64,
        entities: impl IntoIterator<Item = &'a Entity>,
        asserted: impl IntoIterator<Item = &'a Statement>,
        retracted: usize,
    ) -> ActivityRecord {
        let entities: Vec<&Entity> = entities.into_iter().collect();
        let mut asserted: Vec<&Statement> = asserted.into_iter().collect();
        asserted.sort_by_key(|s| s.id);

        let mut scaffold_statements = Vec::new();
        let mut timespan: Option<&Iri> = None;
        for prop in SCAFFOLD_PROPERTIES {
            if let Some(st) = asserted
                .iter()
                .find(|s| s.subject == *iri && s.property == prop)
            {
                scaffold_statements.push(st.id);
                if prop == "P4" {
                    timespan = st.object_iri();
                }
            }
        }
        scaffold_statements.sort_unstable();

        let mut scaffold_entities = Vec::new();
        if entities.iter().any(|e| e.iri == *iri) {
            scaffold_entities.push(iri.clone());
        }
        if let Some(ts) = timespan {
            if entities.iter().any(|e| e.iri == *ts) {
                scaffold_entities.push(ts.clone());
            }
        }

        ActivityRecord {
            iri: iri.clone(),
            commit_seq,
            entities_created: entities.len() - scaffold_entities.len(),
            statements_asserted: asserted.len() - scaffold_statements.len(),
            statements_retracted: retracted,
            scaffold_entities,
            scaffold_statements,
        }
    }

    pub fn effect_count(&self) -> usize {
        self.entities_created + self.statements_asserted + self.statements_retracted
    }
}

/// A constraint broken by a stored statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Constraint {
    Domain { property: String, class: String },
    Range { property: String, class: String },
    ObjectKind { property: String },
    UnknownProperty { property: String },
    Dangling { iri: Iri },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Domain { property, class } => {
                write!(f, "{property} domain excludes {class}")
            }
            Constraint::Range { property, class } => write!(f, "{property} range excludes {class}"),
            Constraint::ObjectKind { property } => write!(f, "{property} object kind mismatch"),
            Constraint::UnknownProperty { property } => write!(f, "unknown property {property}"),
            Constraint::Dangling { iri } => write!(f, "dangling reference {iri}"),
        }
    }
}

impl From<Constraint> for CatalogError {
    fn from(c: Constraint) -> Self {
        match c {
            Constraint::Domain { property, class } => CatalogError::DomainViolation { property, class },
            Constraint::Range { property, class } => CatalogError::RangeViolation { property, class },
            Constraint::ObjectKind { property } => {
                let expected = if property == "P3" { "literal" } else { "entity" };
                CatalogError::ObjectKind { property, expected }
            }
            Constraint::UnknownProperty { property } => CatalogError::UnknownProperty(property),
            Constraint::Dangling { iri } => CatalogError::UnknownIri(iri),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub statement: StatementId,
    pub constraint: Constraint,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Indexes {
    by_subject: HashMap<Iri, BTreeSet<StatementId>>,
    by_object: HashMap<Iri, BTreeSet<StatementId>>,
    by_property: HashMap<String, BTreeSet<StatementId>>,
    by_class: HashMap<String, BTreeSet<Iri>>,
    by_literal: HashMap<String, BTreeSet<Iri>>,
}

impl Indexes {
    fn add_statement(&mut self, st: &Statement) {
        self.by_subject.entry(st.subject.clone()).or_default().insert(st.id);
        if let Object::Iri(o) = &st.object {
            self.by_object.entry(o.clone()).or_default().insert(st.id);
        }
        self.by_property.entry(st.property.clone()).or_default().insert(st.id);
    }

    fn remove_statement(&mut self, st: &Statement) {
        fn drop_id<K: std::hash::Hash + Eq>(map: &mut HashMap<K, BTreeSet<StatementId>>, key: &K, id: StatementId) {
            if let Some(set) = map.get_mut(key) {
                set.remove(&id);
                if set.is_empty() {
                    map.remove(key);
                }
            }
        }
        drop_id(&mut self.by_subject, &st.subject, st.id);
        if let Object::Iri(o) = &st.object {
            drop_id(&mut self.by_object, o, st.id);
        }
        drop_id(&mut self.by_property, &st.property, st.id);
    }
}

/// Committed store: entities, the full statement history and the ledger of
/// committed activities. Indexes cover the live view only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    registry: Arc<Registry>,
    profile: Profile,
    base: String,
    entities: BTreeMap<Iri, Entity>,
    statements: Vec<Statement>,
    activities: Vec<ActivityRecord>,
    activity_index: HashMap<Iri, usize>,
    idx: Indexes,
}

impl Graph {
    pub fn new(registry: Arc<Registry>, profile: Profile, base: impl Into<String>) -> Graph {
        Graph {
            registry,
            profile,
            base: base.into(),
            entities: BTreeMap::new(),
            statements: Vec::new(),
            activities: Vec::new(),
            activity_index: HashMap::new(),
            idx: Indexes::default(),
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn registry_arc(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub(crate) fn set_profile(&mut self, profile: Profile) {
        self.profile = profile;
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn entity(&self, iri: &Iri) -> Option<&Entity> {
        self.entities.get(iri)
    }

    pub fn require_entity(&self, iri: &Iri) -> Result<&Entity> {
        self.entity(iri).ok_or_else(|| CatalogError::UnknownIri(iri.clone()))
    }

    /// Entities ordered by IRI.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn statement(&self, id: StatementId) -> Option<&Statement> {
        self.statements
            .binary_search_by_key(&id, |s| s.id)
            .ok()
            .map(|i| &self.statements[i])
    }

    /// Full statement history ordered by id.
    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn live_statements(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter().filter(|s| s.is_live())
    }

    pub fn next_statement_id(&self) -> StatementId {
        self.statements.last().map_or(1, |s| s.id + 1)
    }

    /// Committed activities in commit order.
    pub fn activities(&self) -> &[ActivityRecord] {
        &self.activities
    }

    pub fn activity(&self, iri: &Iri) -> Option<&ActivityRecord> {
        self.activity_index.get(iri).map(|&i| &self.activities[i])
    }

    pub fn next_commit_seq(&self) -> u64 {
        self.activities.last().map_or(1, |a| a.commit_seq + 1)
    }

    pub fn is_subclass_of(&self, a: &str, b: &str) -> Result<bool> {
        Ok(self.registry.is_subclass_of(a, b)?)
    }

    pub fn entity_is_a(&self, iri: &Iri, class: &str) -> bool {
        self.entity(iri)
            .is_some_and(|e| self.registry.subsumed(&e.class_code, class))
    }

    /// Entities registered with exactly this class code.
    pub fn entities_of_class(&self, code: &str) -> impl Iterator<Item = &Iri> {
        self.idx.by_class.get(code).into_iter().flatten()
    }

    /// Entities whose literal equals `value`.
    pub fn entities_with_literal(&self, value: &str) -> impl Iterator<Item = &Entity> {
        self.idx
            .by_literal
            .get(value)
            .into_iter()
            .flatten()
            .filter_map(|iri| self.entities.get(iri))
    }

    /// The E55 type whose label is `label` (lowest IRI wins on duplicates).
    pub fn type_by_label(&self, label: &str) -> Option<&Iri> {
        self.entities_with_literal(label)
            .find(|e| e.class_code == "E55")
            .map(|e| &e.iri)
    }

    fn live_ids<'a>(
        &'a self,
        index: &'a HashMap<Iri, BTreeSet<StatementId>>,
        iri: &Iri,
        property: Option<&'a str>,
    ) -> impl Iterator<Item = &'a Statement> + 'a {
        index
            .get(iri)
            .into_iter()
            .flatten()
            .filter_map(move |id| self.statement(*id))
            .filter(move |s| property.is_none_or(|p| s.property == p))
    }

    /// Live statements with `iri` as subject, ordered by id.
    pub fn out_statements<'a>(
        &'a self,
        iri: &Iri,
        property: Option<&'a str>,
    ) -> impl Iterator<Item = &'a Statement> + 'a {
        self.live_ids(&self.idx.by_subject, iri, property)
    }

    /// Live statements with `iri` as object, ordered by id.
    pub fn in_statements<'a>(
        &'a self,
        iri: &Iri,
        property: Option<&'a str>,
    ) -> impl Iterator<Item = &'a Statement> + 'a {
        self.live_ids(&self.idx.by_object, iri, property)
    }

    /// Live statements using `property`, ordered by id.
    pub fn statements_with_property<'a>(&'a self, property: &str) -> impl Iterator<Item = &'a Statement> + 'a {
        self.idx
            .by_property
            .get(property)
            .into_iter()
            .flatten()
            .filter_map(|id| self.statement(*id))
    }

    pub fn neighbors(&self, iri: &Iri, direction: Direction, property: Option<&str>) -> Result<Vec<Neighbor>> {
        self.require_entity(iri)?;
        let mut ids = BTreeSet::new();
        if matches!(direction, Direction::Out | Direction::Both) {
            ids.extend(self.out_statements(iri, property).map(|s| s.id));
        }
        if matches!(direction, Direction::In | Direction::Both) {
            ids.extend(self.in_statements(iri, property).map(|s| s.id));
        }
        Ok(ids
            .into_iter()
            .filter_map(|id| self.statement(id))
            .map(|st| {
                let other = if st.subject == *iri && direction != Direction::In {
                    st.object.clone()
                } else {
                    Object::Iri(st.subject.clone())
                };
                Neighbor {
                    statement: st.clone(),
                    other,
                }
            })
            .collect())
    }

    /// Type labels attached to `iri` through live P2 statements.
    pub fn type_labels(&self, iri: &Iri) -> Vec<&str> {
        self.out_statements(iri, Some("P2"))
            .filter_map(|s| s.object_iri())
            .filter_map(|t| self.entity(t))
            .filter_map(|t| t.literal.as_deref())
            .collect()
    }

    pub fn has_type(&self, iri: &Iri, label: &str) -> bool {
        self.type_labels(iri).contains(&label)
    }

    /// Checks one (subject class, property, object) triple against a profile.
    pub fn check_signature(
        &self,
        profile: Profile,
        subject_class: &str,
        property: &str,
        object_class: Option<&str>,
    ) -> std::result::Result<(), Constraint> {
        let def = self.registry.property(property).ok_or_else(|| Constraint::UnknownProperty {
            property: property.to_string(),
        })?;
        let sig = def.signature(profile);
        if !self.registry.subsumed_by_any(subject_class, &sig.domain) {
            return Err(Constraint::Domain {
                property: property.to_string(),
                class: subject_class.to_string(),
            });
        }
        match (&sig.range, object_class) {
            (RangeSpec::Literal, None) => Ok(()),
            (RangeSpec::Classes(range), Some(oc)) => {
                if self.registry.subsumed_by_any(oc, range) {
                    Ok(())
                } else {
                    Err(Constraint::Range {
                        property: property.to_string(),
                        class: oc.to_string(),
                    })
                }
            }
            _ => Err(Constraint::ObjectKind {
                property: property.to_string(),
            }),
        }
    }

    fn check_stored(&self, profile: Profile, st: &Statement) -> std::result::Result<(), Constraint> {
        let subject = self.entity(&st.subject).ok_or_else(|| Constraint::Dangling {
            iri: st.subject.clone(),
        })?;
        let object_class = match &st.object {
            Object::Iri(o) => Some(
                self.entity(o)
                    .ok_or_else(|| Constraint::Dangling { iri: o.clone() })?
                    .class_code
                    .as_str(),
            ),
            Object::Literal(_) => None,
        };
        self.check_signature(profile, &subject.class_code, &st.property, object_class)
    }

    /// Re-checks every live statement under `profile`.
    pub fn validate(&self, profile: Profile) -> Vec<Violation> {
        self.live_statements()
            .filter_map(|st| {
                self.check_stored(profile, st).err().map(|constraint| Violation {
                    statement: st.id,
                    constraint,
                })
            })
            .collect()
    }

    /// Checks a prospective entity's class and literal against the registry.
    pub fn check_entity_shape(&self, class_code: &str, literal: Option<&str>) -> Result<()> {
        let def = self
            .registry
            .class(class_code)
            .ok_or_else(|| CatalogError::UnknownClass(class_code.to_string()))?;
        let rule = def.literal;
        match (rule, literal) {
            (LiteralRule::Required, None) => Err(CatalogError::LiteralMissing {
                class: class_code.to_string(),
            }),
            (LiteralRule::Required | LiteralRule::Optional, Some(l)) if l.trim().is_empty() => {
                Err(CatalogError::LiteralMissing {
                    class: class_code.to_string(),
                })
            }
            (LiteralRule::Forbidden, Some(_)) => Err(CatalogError::LiteralForbidden {
                class: class_code.to_string(),
            }),
            _ => {
                if class_code == "E52" {
                    let l = literal.unwrap_or_default();
                    if !is_valid_timespan(l) {
                        return Err(CatalogError::InvalidTimeSpan(l.to_string()));
                    }
                }
                Ok(())
            }
        }
    }

    pub(crate) fn insert_entity(&mut self, entity: Entity) {
        self.idx
            .by_class
            .entry(entity.class_code.clone())
            .or_default()
            .insert(entity.iri.clone());
        if let Some(lit) = &entity.literal {
            self.idx
                .by_literal
                .entry(lit.clone())
                .or_default()
                .insert(entity.iri.clone());
        }
        self.entities.insert(entity.iri.clone(), entity);
    }

    /// Appends a statement; ids must arrive in increasing order.
    pub(crate) fn insert_statement(&mut self, st: Statement) {
        debug_assert!(self.statements.last().is_none_or(|l| l.id < st.id));
        if st.is_live() {
            self.idx.add_statement(&st);
        }
        self.statements.push(st);
    }

    pub(crate) fn retract(&mut self, id: StatementId, by: &Iri) {
        if let Ok(pos) = self.statements.binary_search_by_key(&id, |s| s.id) {
            let st = &mut self.statements[pos];
            if st.retracted_by.is_none() {
                st.retracted_by = Some(by.clone());
                let snapshot = st.clone();
                self.idx.remove_statement(&snapshot);
            }
        }
    }

    pub(crate) fn push_activity(&mut self, record: ActivityRecord) {
        self.activity_index
            .insert(record.iri.clone(), self.activities.len());
        self.activities.push(record);
    }

    /// Recomputes live-view indexes from the raw statement list and compares
    /// them with the maintained ones.
    pub fn indexes_consistent(&self) -> bool {
        let mut fresh = Indexes::default();
        for e in self.entities.values() {
            fresh.by_class.entry(e.class_code.clone()).or_default().insert(e.iri.clone());
            if let Some(l) = &e.literal {
                fresh.by_literal.entry(l.clone()).or_default().insert(e.iri.clone());
            }
        }
        for st in self.live_statements() {
            fresh.add_statement(st);
        }
        fresh == self.idx
    }

    #[doc(hidden)]
    /// Inserts an entity with no ledger checks. Only for corruption tests.
    pub fn inject_raw_entity(&mut self, entity: Entity) {
        self.insert_entity(entity);
    }
}
