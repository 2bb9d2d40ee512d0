//! Crisis knowledge base and hybrid semantic similarity.
//!
//! Crisis records are stored as ontology-structured triples. Two crises are
//! compared by aligning their triples by predicate and scoring qualitative
//! triples with word-embedding max matching and quantitative triples with an
//! inverse Euclidean kernel.

pub mod cli;
pub mod embed;
pub mod ingest;
pub mod model;
pub mod sim;
pub mod store;
