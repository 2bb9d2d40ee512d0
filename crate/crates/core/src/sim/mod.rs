//! Triple-set similarity: word-embedding matching for qualitative triples,
//! an inverse Euclidean kernel for quantitative triples, predicate
//! alignment, and corpus-level ranking.

mod engine;
mod rank;

use std::collections::BTreeMap;

pub use engine::{Engine, PreparedSet};
pub use rank::{engine_for, matrix, top_k, Ranked, SimilarityMatrix};

use crate::embed::{self, EmbedError, EmbeddingTable};
use crate::model::schema::local_name;
use crate::model::{ObjectValue, Triple, TripleKind, TripleSet};
use crate::store::{KnowledgeBase, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("vectors of different dimensions ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("a triple has no tokens to compare")]
    EmptyPhrase,
    #[error("cannot score an empty triple set")]
    EmptySet,
    #[error("unknown crisis {0:?}")]
    UnknownCrisis(String),
    #[error("{0}")]
    InvalidArgument(String),
}

impl From<EmbedError> for SimError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::EmptyPhrase => SimError::EmptyPhrase,
            other => SimError::InvalidArgument(other.to_string()),
        }
    }
}

impl From<StoreError> for SimError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownCrisis(id) => SimError::UnknownCrisis(id),
            other => SimError::InvalidArgument(other.to_string()),
        }
    }
}

/// Options shared by the corpus-level operations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// Min-max scale every quantitative component per predicate before
    /// taking distances. Off by default: raw values are compared.
    pub normalize_quant: bool,
    /// Worker threads for matrix and top-k; `None` uses all cores.
    pub workers: Option<usize>,
}

/// Result of comparing two triple sets.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimilarityScore {
    /// Mean qualitative similarity over the L qualitative pairs.
    pub qualitative_avg: f64,
    /// Mean quantitative similarity over the H quantitative pairs.
    pub quantitative_avg: f64,
    /// Sum of the two means, in [0, 2].
    pub combined: f64,
    /// Pair-count weighted mean of all pair scores, in [0, 1].
    pub normalized: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "H")]
    pub h: usize,
}

impl SimilarityScore {
    /// Builds a score from per-kind sums and pair counts. A kind with no
    /// pairs contributes 0.
    pub fn from_sums(qual_sum: f64, l: usize, quant_sum: f64, h: usize) -> Self {
        let avg = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
        let qualitative_avg = avg(qual_sum, l);
        let quantitative_avg = avg(quant_sum, h);
        SimilarityScore {
            qualitative_avg,
            quantitative_avg,
            combined: qualitative_avg + quantitative_avg,
            normalized: avg(qual_sum + quant_sum, l + h),
            l,
            h,
        }
    }
}

/// One position of an alignment. At least one side is present; when both
/// are, they share the predicate and kind.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub predicate: String,
    pub kind: TripleKind,
    pub left: Option<Triple>,
    pub right: Option<Triple>,
}

impl AlignedPair {
    pub fn is_two_sided(&self) -> bool {
        self.left.is_some() && self.right.is_some()
    }

    /// The same pair seen from the other set.
    pub fn mirrored(&self) -> Self {
        AlignedPair {
            predicate: self.predicate.clone(),
            kind: self.kind,
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

pub fn classify_triple(t: &Triple) -> TripleKind {
    t.kind()
}

/// Words of a qualitative triple: subject local name, predicate local
/// name, then the object text.
pub fn triple_tokens(t: &Triple) -> Vec<String> {
    let mut tokens = embed::tokenize(local_name(&t.subject));
    tokens.extend(embed::tokenize(local_name(&t.predicate)));
    match &t.object {
        ObjectValue::Qualitative(text) => tokens.extend(embed::tokenize_literal(text)),
        ObjectValue::Resource(node) => tokens.extend(embed::tokenize(local_name(node))),
        ObjectValue::Quantitative(v) => {
            tokens.extend(v.iter().flat_map(|x| embed::tokenize_literal(&x.to_string())))
        }
    }
    tokens
}

/// Two-way best-match average over the words of two token lists.
pub fn phrase_sim<S: AsRef<str>>(s1: &[S], s2: &[S], table: &EmbeddingTable) -> Result<f64, SimError> {
    if s1.is_empty() || s2.is_empty() {
        return Err(SimError::EmptyPhrase);
    }
    let mut forward = 0.0;
    for w in s1 {
        forward += embed::word_to_phrase_sim(w.as_ref(), s2, table)?;
    }
    let mut backward = 0.0;
    for w in s2 {
        backward += embed::word_to_phrase_sim(w.as_ref(), s1, table)?;
    }
    Ok((forward + backward) / (s1.len() + s2.len()) as f64)
}

/// Similarity of two qualitative triples.
pub fn sim_qualitative(a1: &Triple, a2: &Triple, table: &EmbeddingTable) -> Result<f64, SimError> {
    phrase_sim(&triple_tokens(a1), &triple_tokens(a2), table)
}

/// `1 / (1 + euclidean distance)`.
pub fn sim_quantitative(v1: &[f64], v2: &[f64]) -> Result<f64, SimError> {
    if v1.len() != v2.len() {
        return Err(SimError::DimensionMismatch {
            left: v1.len(),
            right: v2.len(),
        });
    }
    let squared: f64 = v1.iter().zip(v2).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 / (1.0 + squared.sqrt()))
}

/// Per-predicate, per-component value ranges used for min-max scaling.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuantScaling {
    ranges: BTreeMap<String, Vec<(f64, f64)>>,
}

impl QuantScaling {
    /// Collects ranges over every quantitative triple in the store.
    pub fn from_kb(kb: &KnowledgeBase) -> Self {
        Self::from_triples(kb.iter())
    }

    pub fn from_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut ranges: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for t in triples {
            if let ObjectValue::Quantitative(v) = &t.object {
                let r = ranges
                    .entry(t.predicate.clone())
                    .or_insert_with(|| vec![(f64::INFINITY, f64::NEG_INFINITY); v.len()]);
                if r.len() != v.len() {
                    continue;
                }
                for (slot, &x) in r.iter_mut().zip(v) {
                    slot.0 = slot.0.min(x);
                    slot.1 = slot.1.max(x);
                }
            }
        }
        QuantScaling { ranges }
    }

    /// Maps each component to `(x - min) / (max - min)`; constant
    /// components and unseen predicates map to 0 and pass through
    /// respectively.
    pub fn scale(&self, predicate: &str, v: &[f64]) -> Vec<f64> {
        match self.ranges.get(predicate) {
            Some(r) if r.len() == v.len() => v
                .iter()
                .zip(r)
                .map(|(&x, &(lo, hi))| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
                .collect(),
            _ => v.to_vec(),
        }
    }
}

/// Aligns two sets by predicate. See [`Engine::align`].
pub fn align(
    c1: &TripleSet,
    c2: &TripleSet,
    table: &EmbeddingTable,
    scaling: Option<&QuantScaling>,
) -> Result<Vec<AlignedPair>, SimError> {
    let engine = Engine::new(table, scaling.cloned());
    engine.align(&engine.prepare(c1)?, &engine.prepare(c2)?)
}

/// Scores two triple sets.
pub fn sim_sets(
    c1: &TripleSet,
    c2: &TripleSet,
    table: &EmbeddingTable,
    scaling: Option<&QuantScaling>,
) -> Result<SimilarityScore, SimError> {
    let engine = Engine::new(table, scaling.cloned());
    engine.score(&engine.prepare(c1)?, &engine.prepare(c2)?)
}
