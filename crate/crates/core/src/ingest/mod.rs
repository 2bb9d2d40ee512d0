//! Turns EM-DAT style CSV corpora into crisis records and records into
//! ontology triples.

mod csv_io;
pub mod synthetic;
mod triples;

use std::collections::BTreeMap;

pub use csv_io::{parse_csv, write_csv, CsvSchema, RecordField, EMDAT_COLUMNS};
pub use triples::record_to_triples;

use crate::model::{CrisisRecord, Taxonomy, Violation};
use crate::store::{KnowledgeBase, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed CSV at row {row}: {message}")]
    MalformedCsv { row: usize, message: String },
    #[error("missing required column {0:?}")]
    MissingRequiredColumn(String),
    #[error("invalid column schema: {0}")]
    Schema(String),
    #[error("invalid record {crisis_id:?}: {}", violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidRecord {
        crisis_id: String,
        violations: Vec<Violation>,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Outcome of an ingestion run. `per_type_counts` is keyed by the EM-DAT
/// disaster type node of each accepted record.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    /// (row, message); row is the 1-based data row, or 0 when not from CSV.
    pub warnings: Vec<(usize, String)>,
    pub rejections: Vec<(usize, String)>,
    pub per_type_counts: BTreeMap<String, usize>,
}

impl IngestReport {
    fn accept(&mut self, type_id: String) {
        self.accepted += 1;
        *self.per_type_counts.entry(type_id).or_default() += 1;
    }

    fn reject(&mut self, row: usize, reason: String) {
        self.rejected += 1;
        self.rejections.push((row, reason));
    }

    /// Plain-text summary: totals, then per-type counts, then diagnostics.
    pub fn to_text(&self) -> String {
        let mut s = format!("accepted: {}\nrejected: {}\n", self.accepted, self.rejected);
        for (ty, n) in &self.per_type_counts {
            s.push_str(&format!("  {ty}: {n}\n"));
        }
        for (row, msg) in &self.rejections {
            s.push_str(&format!("rejected row {row}: {msg}\n"));
        }
        for (row, msg) in &self.warnings {
            s.push_str(&format!("warning row {row}: {msg}\n"));
        }
        s
    }
}

/// Inserts every valid record into the knowledge base, replacing any prior
/// subgraph of the same crisis. Invalid records are rejected, not inserted.
pub fn ingest_corpus(
    records: &[CrisisRecord],
    kb: &mut KnowledgeBase,
) -> Result<IngestReport, IngestError> {
    let mut report = IngestReport::default();
    for (i, record) in records.iter().enumerate() {
        let set = match record_to_triples(record, kb.taxonomy()) {
            Ok(set) => set,
            Err(e) => {
                report.reject(i + 1, e.to_string());
                continue;
            }
        };
        kb.replace_crisis(set)?;
        let type_id = type_key(kb.taxonomy(), record);
        report.accept(type_id);
    }
    Ok(report)
}

fn type_key(taxonomy: &Taxonomy, record: &CrisisRecord) -> String {
    taxonomy
        .type_node_of(&record.type_path)
        .map(|n| n.id.clone())
        .unwrap_or_default()
}

/// Parses a CSV corpus and ingests every valid row. The report covers both
/// steps: rows refused by the parser and records refused by the store.
pub fn ingest_csv<R: std::io::Read>(
    input: R,
    schema: &CsvSchema,
    kb: &mut KnowledgeBase,
) -> Result<IngestReport, IngestError> {
    let (records, parsed) = parse_csv(input, schema, kb.taxonomy())?;
    let stored = ingest_corpus(&records, kb)?;
    let mut report = IngestReport {
        accepted: stored.accepted,
        rejected: parsed.rejected + stored.rejected,
        warnings: parsed.warnings,
        rejections: parsed.rejections,
        per_type_counts: stored.per_type_counts,
    };
    report.rejections.extend(stored.rejections);
    Ok(report)
}
