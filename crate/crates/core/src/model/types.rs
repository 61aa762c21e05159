use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use ulid::Ulid;

/// A resource identifier. Instance IRIs are minted as `<base><ulid>`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Iri(String);

impl Iri {
    pub fn new(s: impl Into<String>) -> Iri {
        Iri(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Iri {
    fn from(s: &str) -> Self {
        Iri(s.to_string())
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub type StatementId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub iri: Iri,
    pub class_code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal: Option<String>,
    pub created_by: Iri,
}

/// Object position of a statement: another entity, or a plain string for
/// literal-valued properties (P3 notes).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Object {
    Iri(Iri),
    Literal(String),
}

impl Object {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Object::Iri(iri) => Some(iri),
            Object::Literal(_) => None,
        }
    }
}

impl From<Iri> for Object {
    fn from(iri: Iri) -> Self {
        Object::Iri(iri)
    }
}

impl From<&Iri> for Object {
    fn from(iri: &Iri) -> Self {
        Object::Iri(iri.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: StatementId,
    pub subject: Iri,
    pub property: String,
    pub object: Object,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_qualifier: Option<Iri>,
    pub asserted_by: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retracted_by: Option<Iri>,
}

impl Statement {
    pub fn is_live(&self) -> bool {
        self.retracted_by.is_none()
    }

    pub fn object_iri(&self) -> Option<&Iri> {
        self.object.as_iri()
    }
}

/// Source of the 26-character sortable suffixes used when minting IRIs.
pub trait IdSource: Send {
    fn next_suffix(&mut self) -> String;
}

/// Wall-clock ULIDs, monotonic within a process.
#[derive(Default)]
pub struct UlidSource {
    generator: ulid::Generator,
}

impl IdSource for UlidSource {
    fn next_suffix(&mut self) -> String {
        match self.generator.generate() {
            Ok(id) => id.to_string(),
            // Random component overflowed inside one millisecond.
            Err(_) => Ulid::new().to_string(),
        }
    }
}

/// Deterministic ULIDs from a counter, for golden files and replays.
#[derive(Debug, Clone)]
pub struct SequentialIds {
    epoch_ms: u64,
    next: u64,
}

impl SequentialIds {
    pub fn new(epoch_ms: u64) -> Self {
        SequentialIds { epoch_ms, next: 0 }
    }

    /// Continues the counter that minted `iris`, so a reopened store mints
    /// exactly what an uninterrupted session would have. `None` when no IRI
    /// carries a counter-made suffix.
    pub fn resume<'a>(iris: impl IntoIterator<Item = &'a Iri>) -> Option<Self> {
        let last = iris
            .into_iter()
            .filter_map(|iri| {
                let s = iri.as_str();
                Ulid::from_string(s.get(s.len().checked_sub(26)?..)?).ok()
            })
            .max()?;
        let next = u64::try_from(last.random()).ok()?;
        Some(SequentialIds {
            epoch_ms: last.timestamp_ms().checked_sub(next)?,
            next,
        })
    }
}

impl Default for SequentialIds {
    fn default() -> Self {
        // 2024-05-01T00:00:00Z
        SequentialIds::new(1_714_521_600_000)
    }
}

impl IdSource for SequentialIds {
    fn next_suffix(&mut self) -> String {
        self.next += 1;
        Ulid::from_parts(self.epoch_ms + self.next, u128::from(self.next)).to_string()
    }
}

pub const DEFAULT_BASE: &str = "urn:crmcat:";

/// Checks that `text` is an absolute IRI (has a scheme, no whitespace).
pub fn is_absolute_iri(text: &str) -> bool {
    if text.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`')) {
        return false;
    }
    url::Url::parse(text).is_ok()
}

fn time_point() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^\d{4}(-\d{2}(-\d{2}(T\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:\d{2})?)?)?)?$",
        )
        .unwrap()
    })
}

/// Validates an ISO-8601 interval `start/end` where either side may be `..`.
pub fn is_valid_timespan(text: &str) -> bool {
    let Some((start, end)) = text.split_once('/') else {
        return false;
    };
    let open = |s: &str| s == "..";
    if open(start) && open(end) {
        return false;
    }
    let side_ok = |s: &str| open(s) || time_point().is_match(s);
    if !(side_ok(start) && side_ok(end)) {
        return false;
    }
    // Same-shaped endpoints compare lexically.
    if !open(start) && !open(end) && start.len() == end.len() && start > end {
        return false;
    }
    true
}
