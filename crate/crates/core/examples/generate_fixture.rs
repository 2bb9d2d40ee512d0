//! Regenerates the committed fixtures: `cargo run --example generate_fixture -- <fixtures dir>`.

use std::path::PathBuf;

use crisim::ingest::{synthetic, write_csv, CsvSchema};
use crisim::model::Taxonomy;
use crisim::store::KnowledgeBase;

fn main() -> anyhow::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let taxonomy = Taxonomy::build();
    let records = synthetic::generate(synthetic::FIXTURE_SEED, &taxonomy);
    let mut csv = Vec::new();
    write_csv(&records, &CsvSchema::emdat(), &taxonomy, &mut csv)?;
    std::fs::write(dir.join("france287.csv"), csv)?;
    let kb = KnowledgeBase::with_taxonomy(taxonomy);
    std::fs::write(dir.join("taxonomy.ttl"), kb.to_turtle())?;
    Ok(())
}
