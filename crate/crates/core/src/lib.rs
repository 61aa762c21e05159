//! Knowledge-graph catalog for early computing artifacts, built on a
//! CIDOC-CRM subset.
//!
//! Every change to the store is recorded as an activity carried out by an
//! operator at a given time, so the graph doubles as its own provenance
//! ledger.

pub mod error;
pub mod ledger;
pub mod model;
pub mod query;
pub mod serialization;
pub mod tosec;
pub mod workflows;

pub use error::{CatalogError, Result};
pub use ledger::{
    audit_entry, audit_trail, label_of, ActivityContext, ActivityRequest, AuditEntry, Catalog, CatalogConfig,
    Committed, ContextState,
};
pub use model::{Direction, Entity, Graph, Iri, Object, Profile, Registry, Statement, StatementId};
