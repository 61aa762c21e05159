use thiserror::Error;

use crate::model::registry::RegistryError;
use crate::model::types::{Iri, StatementId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("unknown property {0}")]
    UnknownProperty(String),
    #[error("unknown entity {0}")]
    UnknownIri(Iri),
    #[error("unknown statement id {0}")]
    UnknownStatement(StatementId),
    #[error("{class} entities require a non-empty literal")]
    LiteralMissing { class: String },
    #[error("{class} entities do not carry a literal")]
    LiteralForbidden { class: String },
    #[error("invalid time-span {0:?}; expected ISO-8601 `start/end` with `..` for an open side")]
    InvalidTimeSpan(String),
    #[error("{property} domain violation: subject class {class} not allowed")]
    DomainViolation { property: String, class: String },
    #[error("{property} range violation: object class {class} not allowed")]
    RangeViolation { property: String, class: String },
    #[error("{property} expects a {expected} object")]
    ObjectKind { property: String, expected: &'static str },
    #[error("{0} does not accept a type qualifier")]
    QualifierNotAllowed(String),
    #[error("type qualifier {0} is not an E55 Type")]
    QualifierNotType(Iri),
    #[error("statement {0} is already retracted")]
    AlreadyRetracted(StatementId),
    #[error("statement {0} was asserted by the open activity and cannot be retracted by it")]
    RetractOwnAssertion(StatementId),
    #[error("another activity is already open")]
    ActivityOpen,
    #[error("activity context is not open")]
    ContextClosed,
    #[error("activity has no effects beyond its scaffold")]
    EmptyActivity,
    #[error("{iri} has class {found}, expected a subclass of {expected}")]
    WrongClass { iri: Iri, expected: String, found: String },
    #[error("identifier {0:?} is already in use")]
    DuplicateIdentifier(String),
    #[error("{iri} is not typed {label:?}")]
    MissingType { iri: Iri, label: String },
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("event log write failed: {0}")]
    Log(String),
    #[error("injected fault at staging step {0}")]
    FaultInjected(usize),
}

impl CatalogError {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        CatalogError::Invalid {
            field,
            message: message.into(),
        }
    }

    /// Short machine-readable code used by the CLI and the HTTP envelope.
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::Registry(_) => "registry",
            CatalogError::UnknownClass(_) => "unknown-class",
            CatalogError::UnknownProperty(_) => "unknown-property",
            CatalogError::UnknownIri(_) => "not-found",
            CatalogError::UnknownStatement(_) => "not-found",
            CatalogError::LiteralMissing { .. } => "literal-missing",
            CatalogError::LiteralForbidden { .. } => "literal-forbidden",
            CatalogError::InvalidTimeSpan(_) => "invalid-timespan",
            CatalogError::DomainViolation { .. } => "domain-violation",
            CatalogError::RangeViolation { .. } => "range-violation",
            CatalogError::ObjectKind { .. } => "object-kind",
            CatalogError::QualifierNotAllowed(_) => "qualifier-not-allowed",
            CatalogError::QualifierNotType(_) => "qualifier-not-type",
            CatalogError::AlreadyRetracted(_) => "already-retracted",
            CatalogError::RetractOwnAssertion(_) => "retract-own-assertion",
            CatalogError::ActivityOpen => "busy",
            CatalogError::ContextClosed => "context-closed",
            CatalogError::EmptyActivity => "empty-activity",
            CatalogError::WrongClass { .. } => "wrong-class",
            CatalogError::DuplicateIdentifier(_) => "duplicate-identifier",
            CatalogError::MissingType { .. } => "missing-type",
            CatalogError::Invalid { .. } => "invalid",
            CatalogError::Log(_) => "log",
            CatalogError::FaultInjected(_) => "fault",
        }
    }

    /// The request field an error is attributable to, when there is one.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            CatalogError::Invalid { field, .. } => Some(field),
            CatalogError::DuplicateIdentifier(_) => Some("inventory_id"),
            CatalogError::InvalidTimeSpan(_) => Some("timespan"),
            _ => None,
        }
    }
}

pub type Result<T, E = CatalogError> = std::result::Result<T, E>;
