#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;
use std::sync::OnceLock;

use crisim::embed::{load_embeddings_file, EmbeddingTable};
use crisim::ingest::{ingest_csv, CsvSchema, IngestReport};
use crisim::model::Taxonomy;
use crisim::store::KnowledgeBase;

/// First riverine flood of the fixture corpus.
pub const RIVERINE_FLOOD: &str = "7_RiverineFlood";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn toy_table() -> &'static EmbeddingTable {
    static TABLE: OnceLock<EmbeddingTable> = OnceLock::new();
    TABLE.get_or_init(|| load_embeddings_file(fixture("toy_vectors.txt"), None).expect("toy vectors load"))
}

pub fn ingest_fixture() -> (KnowledgeBase, IngestReport) {
    let mut kb = KnowledgeBase::with_taxonomy(Taxonomy::build());
    let file = std::fs::File::open(fixture("france287.csv")).expect("fixture corpus present");
    let report = ingest_csv(file, &CsvSchema::emdat(), &mut kb).expect("fixture ingests");
    (kb, report)
}

pub fn fixture_kb() -> &'static KnowledgeBase {
    static KB: OnceLock<KnowledgeBase> = OnceLock::new();
    KB.get_or_init(|| ingest_fixture().0)
}

/// Level-2 taxonomy ancestor (e.g. Hydrological) of a crisis.
pub fn level2(kb: &KnowledgeBase, id: &str) -> String {
    let path = kb.crisis_type_path(id).expect("typed crisis");
    path.get(2).cloned().unwrap_or_else(|| path.last().cloned().unwrap())
}
