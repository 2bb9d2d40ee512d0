//! Crisis ontology schema, the crisis type taxonomy, and the domain types
//! shared by every other module.

pub mod record;
pub mod schema;
pub mod taxonomy;
pub mod triple;

pub use record::{CrisisRecord, PartialDate, Violation};
pub use taxonomy::{Classification, Taxonomy, TaxonomyNode};
pub use triple::{ObjectValue, Triple, TripleKind, TripleSet};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown crisis type {0:?}")]
    UnknownType(String),
    #[error("ambiguous crisis type {0:?}")]
    AmbiguousType(String),
}
