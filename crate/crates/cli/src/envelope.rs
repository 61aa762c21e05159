//! The `{ok, data, error}` wrapper shared by every API response and by the
//! CLI's `--json` output.

use crmcat_core::serialization::{ImportError, StoreError};
use crmcat_core::tosec::IngestError;
use crmcat_core::CatalogError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl<T> Envelope<T> {
    pub fn success(data: T) -> Self {
        Envelope {
            ok: true,
            data: Some(data),
            error: None,
        }
    }

    pub fn failure(error: ErrorBody) -> Self {
        Envelope {
            ok: false,
            data: None,
            error: Some(error),
        }
    }
}

/// Broad failure class; decides the HTTP status and the CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Request shape or configuration problem.
    Usage,
    NotFound,
    Busy,
    /// Rejected by the catalog's rules.
    Domain,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppError {
    pub kind: ErrorKind,
    pub body: ErrorBody,
}

impl AppError {
    pub fn new(kind: ErrorKind, code: &str, message: impl Into<String>) -> Self {
        AppError {
            kind,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                field: None,
            },
        }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.body.field = Some(field.into());
        self
    }

    pub fn usage(message: impl Into<String>) -> Self {
        AppError::new(ErrorKind::Usage, "usage", message)
    }

    pub fn busy() -> Self {
        AppError::new(ErrorKind::Busy, "busy", "another activity is in progress; retry shortly")
    }

    pub fn not_found(what: impl std::fmt::Display) -> Self {
        AppError::new(ErrorKind::NotFound, "not-found", format!("no entity {what}"))
    }

    /// A request body that does not match the expected shape. Serde names
    /// the missing or unexpected field in backticks; that becomes `field`.
    pub fn bad_body(err: &serde_json::Error) -> Self {
        let message = err.to_string();
        let field = message.split('`').nth(1).map(str::to_string);
        let e = AppError::new(ErrorKind::Usage, "invalid-body", message);
        match field {
            Some(f) => e.with_field(f),
            None => e,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.body.code, self.body.message)
    }
}

impl std::error::Error for AppError {}

impl From<CatalogError> for AppError {
    fn from(e: CatalogError) -> Self {
        let kind = match &e {
            CatalogError::UnknownIri(_) | CatalogError::UnknownStatement(_) => ErrorKind::NotFound,
            CatalogError::ActivityOpen => ErrorKind::Busy,
            CatalogError::Log(_) => ErrorKind::Internal,
            _ => ErrorKind::Domain,
        };
        let err = AppError::new(kind, e.code(), e.to_string());
        match e.field() {
            Some(f) => err.with_field(f),
            None => err,
        }
    }
}

impl From<IngestError> for AppError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Catalog(c) => c.into(),
            IngestError::Parse(p) => AppError::new(ErrorKind::Domain, p.code(), p.to_string()).with_field("filename"),
        }
    }
}

impl From<ImportError> for AppError {
    fn from(e: ImportError) -> Self {
        match e {
            ImportError::Catalog(c) => c.into(),
            other => AppError::new(ErrorKind::Domain, other.code(), other.to_string()),
        }
    }
}

impl From<StoreError> for AppError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Catalog(c) => c.into(),
            StoreError::Replay(r) => AppError::new(ErrorKind::Internal, "corrupt-store", r.to_string()),
            StoreError::Io { .. } => AppError::new(ErrorKind::Internal, "io", e.to_string()),
        }
    }
}
