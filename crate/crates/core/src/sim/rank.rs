use std::io::Write;

use rayon::prelude::*;

use super::{Engine, PreparedSet, QuantScaling, SimError, SimOptions, SimilarityScore};
use crate::embed::EmbeddingTable;
use crate::store::KnowledgeBase;

/// One entry of a ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    /// 1-based position.
    pub rank: usize,
    pub id: String,
    pub score: SimilarityScore,
}

#[derive(serde::Serialize)]
struct RankedLine<'a> {
    query: &'a str,
    rank: usize,
    id: &'a str,
    combined: f64,
    qualitative_avg: f64,
    quantitative_avg: f64,
}

impl Ranked {
    /// One JSON line: `{query, rank, id, combined, qualitative_avg, quantitative_avg}`.
    pub fn to_json_line(&self, query: &str) -> String {
        serde_json::to_string(&RankedLine {
            query,
            rank: self.rank,
            id: &self.id,
            combined: self.score.combined,
            qualitative_avg: self.score.qualitative_avg,
            quantitative_avg: self.score.quantitative_avg,
        })
        .expect("plain struct serializes")
    }
}

/// Combined scores between every pair of a list of crises.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub ids: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i][j]
    }

    /// CSV with an `id` corner cell, the ids as header, and one row per id;
    /// scores carry 6 decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = std::iter::once("id").chain(self.ids.iter().map(String::as_str));
        w.write_record(header)?;
        for (id, row) in self.ids.iter().zip(&self.scores) {
            let cells = std::iter::once(id.clone()).chain(row.iter().map(|s| format!("{s:.6}")));
            w.write_record(cells)?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, SimError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(SimError::InvalidArgument("workers must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| SimError::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Engine configured for a store: scaling ranges come from the whole store
/// when `normalize_quant` is set.
pub fn engine_for<'t>(kb: &KnowledgeBase, table: &'t EmbeddingTable, options: &SimOptions) -> Engine<'t> {
    let scaling = options.normalize_quant.then(|| QuantScaling::from_kb(kb));
    Engine::new(table, scaling)
}

fn prepare_all(engine: &Engine, kb: &KnowledgeBase, ids: &[String]) -> Result<Vec<PreparedSet>, SimError> {
    ids.par_iter()
        .map(|id| engine.prepare(&kb.crisis_subgraph(id)?))
        .collect()
}

/// Scores every other crisis against `query_id` and returns the best `k`,
/// ordered by combined score descending, then id ascending.
pub fn top_k(
    kb: &KnowledgeBase,
    query_id: &str,
    k: usize,
    table: &EmbeddingTable,
    options: &SimOptions,
) -> Result<Vec<Ranked>, SimError> {
    if k == 0 {
        return Err(SimError::InvalidArgument("k must be at least 1".into()));
    }
    if !kb.contains_crisis(query_id) {
        return Err(SimError::UnknownCrisis(query_id.to_string()));
    }
    let engine = engine_for(kb, table, options);
    let others: Vec<String> = kb.crisis_ids().into_iter().filter(|id| id != query_id).collect();
    let mut ranked = pool(options.workers)?.install(|| -> Result<Vec<(String, SimilarityScore)>, SimError> {
        let query = engine.prepare(&kb.crisis_subgraph(query_id)?)?;
        let prepared = prepare_all(&engine, kb, &others)?;
        prepared
            .par_iter()
            .map(|p| Ok((p.crisis_id().to_string(), engine.score(&query, p)?)))
            .collect()
    })?;
    ranked.sort_by(|a, b| b.1.combined.total_cmp(&a.1.combined).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (id, score))| Ranked { rank: i + 1, id, score })
        .collect())
}

/// All-pairs combined scores. Each unordered pair is computed once and
/// mirrored, so the result is exactly symmetric and identical for every
/// worker count.
pub fn matrix(
    kb: &KnowledgeBase,
    ids: &[String],
    table: &EmbeddingTable,
    options: &SimOptions,
) -> Result<SimilarityMatrix, SimError> {
    if ids.is_empty() {
        return Err(SimError::InvalidArgument("matrix needs at least one crisis".into()));
    }
    if let Some(missing) = ids.iter().find(|id| !kb.contains_crisis(id)) {
        return Err(SimError::UnknownCrisis(missing.clone()));
    }
    let engine = engine_for(kb, table, options);
    let n = ids.len();
    let upper = pool(options.workers)?.install(|| -> Result<Vec<f64>, SimError> {
        let prepared = prepare_all(&engine, kb, ids)?;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        pairs
            .par_iter()
            .map(|&(i, j)| Ok(engine.score(&prepared[i], &prepared[j])?.combined))
            .collect()
    })?;
    let mut scores = vec![vec![0.0; n]; n];
    let pairs = (0..n).flat_map(|i| (i..n).map(move |j| (i, j)));
    for ((i, j), s) in pairs.zip(upper) {
        scores[i][j] = s;
        scores[j][i] = s;
    }
    Ok(SimilarityMatrix {
        ids: ids.to_vec(),
        scores,
    })
}
