//! Registry, entity/statement types and the committed graph store.

pub mod graph;
pub mod registry;
pub mod types;
pub mod vocabulary;

pub use graph::{ActivityRecord, Constraint, Direction, Graph, Neighbor, Violation};
pub use registry::{ClassDef, LiteralRule, Profile, PropertyDef, RangeSpec, Registry, RegistryError, Signature};
pub use types::{
    is_absolute_iri, is_valid_timespan, Entity, IdSource, Iri, Object, SequentialIds, Statement, StatementId,
    UlidSource, DEFAULT_BASE,
};
