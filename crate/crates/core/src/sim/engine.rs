use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::{triple_tokens, AlignedPair, QuantScaling, SimError, SimilarityScore};
use crate::embed::EmbeddingTable;
use crate::model::{ObjectValue, Triple, TripleKind, TripleSet};

/// A word with its embedding row resolved once.
#[derive(Debug, Clone)]
struct Word {
    text: String,
    row: Option<usize>,
}

#[derive(Debug, Clone)]
struct PreparedTriple {
    triple: Triple,
    kind: TripleKind,
    words: Vec<Word>,
    vector: Vec<f64>,
}

/// A triple set with tokens looked up and quantitative values scaled,
/// grouped by (predicate, kind).
#[derive(Debug, Clone)]
pub struct PreparedSet {
    crisis_id: String,
    triples: Vec<PreparedTriple>,
    groups: BTreeMap<(String, TripleKind), Vec<usize>>,
}

impl PreparedSet {
    pub fn crisis_id(&self) -> &str {
        &self.crisis_id
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

struct Slot<'p> {
    predicate: &'p str,
    kind: TripleKind,
    left: Option<&'p PreparedTriple>,
    right: Option<&'p PreparedTriple>,
    score: f64,
}

/// Scores triple sets against one embedding table and optional scaling.
#[derive(Debug, Clone)]
pub struct Engine<'t> {
    table: &'t EmbeddingTable,
    scaling: Option<QuantScaling>,
}

impl<'t> Engine<'t> {
    pub fn new(table: &'t EmbeddingTable, scaling: Option<QuantScaling>) -> Self {
        Engine { table, scaling }
    }

    pub fn table(&self) -> &EmbeddingTable {
        self.table
    }

    pub fn prepare(&self, set: &TripleSet) -> Result<PreparedSet, SimError> {
        let mut sorted: Vec<&Triple> = set.iter().collect();
        sorted.sort();
        sorted.dedup();
        let mut triples = Vec::with_capacity(sorted.len());
        let mut groups: BTreeMap<(String, TripleKind), Vec<usize>> = BTreeMap::new();
        for t in sorted {
            let kind = t.kind();
            let (words, vector) = match (&t.object, kind) {
                (ObjectValue::Quantitative(v), TripleKind::Quantitative) => {
                    let v = match &self.scaling {
                        Some(s) => s.scale(&t.predicate, v),
                        None => v.clone(),
                    };
                    (Vec::new(), v)
                }
                _ => {
                    let words: Vec<Word> = triple_tokens(t)
                        .into_iter()
                        .map(|text| Word {
                            row: self.table.index_of(&text),
                            text,
                        })
                        .collect();
                    if words.is_empty() {
                        return Err(SimError::EmptyPhrase);
                    }
                    (words, Vec::new())
                }
            };
            groups
                .entry((t.predicate.clone(), kind))
                .or_default()
                .push(triples.len());
            triples.push(PreparedTriple {
                triple: t.clone(),
                kind,
                words,
                vector,
            });
        }
        Ok(PreparedSet {
            crisis_id: set.crisis_id.clone(),
            triples,
            groups,
        })
    }

    fn word_sim(&self, a: &Word, b: &Word) -> f64 {
        if a.text == b.text {
            return 1.0;
        }
        match (a.row, b.row) {
            (Some(x), Some(y)) => self.table.sim_by_index(x, y),
            _ => 0.0,
        }
    }

    fn best_match(&self, w: &Word, phrase: &[Word]) -> f64 {
        phrase
            .iter()
            .map(|q| self.word_sim(w, q))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn pair_score(&self, a: &PreparedTriple, b: &PreparedTriple) -> Result<f64, SimError> {
        match a.kind {
            TripleKind::Qualitative => {
                // each direction summed on its own so the result is exactly
                // symmetric in its arguments
                let forward: f64 = a.words.iter().map(|w| self.best_match(w, &b.words)).sum();
                let backward: f64 = b.words.iter().map(|w| self.best_match(w, &a.words)).sum();
                Ok((forward + backward) / (a.words.len() + b.words.len()) as f64)
            }
            TripleKind::Quantitative => super::sim_quantitative(&a.vector, &b.vector),
        }
    }

    fn slots<'p>(&self, p1: &'p PreparedSet, p2: &'p PreparedSet) -> Result<Vec<Slot<'p>>, SimError> {
        if p1.is_empty() || p2.is_empty() {
            return Err(SimError::EmptySet);
        }
        let mut keys: Vec<&(String, TripleKind)> = p1.groups.keys().chain(p2.groups.keys()).collect();
        keys.sort();
        keys.dedup();

        let mut slots = Vec::new();
        let none: Vec<usize> = Vec::new();
        for key in keys {
            let lefts: Vec<&PreparedTriple> = p1.groups.get(key).unwrap_or(&none).iter().map(|&i| &p1.triples[i]).collect();
            let rights: Vec<&PreparedTriple> = p2.groups.get(key).unwrap_or(&none).iter().map(|&i| &p2.triples[i]).collect();
            let mut candidates = Vec::with_capacity(lefts.len() * rights.len());
            for (i, l) in lefts.iter().enumerate() {
                for (j, r) in rights.iter().enumerate() {
                    candidates.push((self.pair_score(l, r)?, i, j));
                }
            }
            // best first; ties resolved by content so that swapping the
            // two sets mirrors the matching
            candidates.sort_by(|a, b| {
                b.0.total_cmp(&a.0)
                    .then_with(|| symmetric_cmp(lefts[a.1], rights[a.2], lefts[b.1], rights[b.2]))
            });
            let mut left_used = vec![false; lefts.len()];
            let mut right_used = vec![false; rights.len()];
            let mut group: Vec<Slot<'p>> = Vec::new();
            for (score, i, j) in candidates {
                if left_used[i] || right_used[j] {
                    continue;
                }
                left_used[i] = true;
                right_used[j] = true;
                group.push(Slot {
                    predicate: &key.0,
                    kind: key.1,
                    left: Some(lefts[i]),
                    right: Some(rights[j]),
                    score,
                });
            }
            for l in lefts.iter().zip(&left_used).filter(|(_, &used)| !used).map(|(l, _)| l) {
                group.push(Slot {
                    predicate: &key.0,
                    kind: key.1,
                    left: Some(l),
                    right: None,
                    score: 0.0,
                });
            }
            for r in rights.iter().zip(&right_used).filter(|(_, &used)| !used).map(|(r, _)| r) {
                group.push(Slot {
                    predicate: &key.0,
                    kind: key.1,
                    left: None,
                    right: Some(r),
                    score: 0.0,
                });
            }
            group.sort_by(|a, b| slot_cmp(a, b));
            slots.extend(group);
        }
        Ok(slots)
    }

    /// Aligns two prepared sets by predicate. Within a predicate, triples
    /// are paired greedily by descending similarity; leftovers become
    /// one-sided pairs. Pairs are ordered by predicate, and the result of
    /// `align(b, a)` is the mirror image of `align(a, b)`.
    pub fn align(&self, p1: &PreparedSet, p2: &PreparedSet) -> Result<Vec<AlignedPair>, SimError> {
        Ok(self
            .slots(p1, p2)?
            .into_iter()
            .map(|s| AlignedPair {
                predicate: s.predicate.to_string(),
                kind: s.kind,
                left: s.left.map(|t| t.triple.clone()),
                right: s.right.map(|t| t.triple.clone()),
            })
            .collect())
    }

    /// Scores two prepared sets. One-sided pairs score 0 but count towards
    /// their kind's pair total.
    pub fn score(&self, p1: &PreparedSet, p2: &PreparedSet) -> Result<SimilarityScore, SimError> {
        let (mut qual, mut l, mut quant, mut h) = (0.0, 0, 0.0, 0);
        for slot in self.slots(p1, p2)? {
            match slot.kind {
                TripleKind::Qualitative => {
                    qual += slot.score;
                    l += 1;
                }
                TripleKind::Quantitative => {
                    quant += slot.score;
                    h += 1;
                }
            }
        }
        Ok(SimilarityScore::from_sums(qual, l, quant, h))
    }
}

fn ordered<'a>(a: &'a Triple, b: &'a Triple) -> (&'a Triple, &'a Triple) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Orders candidate pairs by their unordered objects, then their unordered
/// triples, so the order does not depend on which set is on the left.
fn symmetric_cmp(l1: &PreparedTriple, r1: &PreparedTriple, l2: &PreparedTriple, r2: &PreparedTriple) -> Ordering {
    fn objects<'a>(l: &'a PreparedTriple, r: &'a PreparedTriple) -> (&'a ObjectValue, &'a ObjectValue) {
        let (a, b) = (&l.triple.object, &r.triple.object);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
    objects(l1, r1)
        .cmp(&objects(l2, r2))
        .then_with(|| ordered(&l1.triple, &r1.triple).cmp(&ordered(&l2.triple, &r2.triple)))
}

fn slot_key<'p>(s: &Slot<'p>) -> (&'p ObjectValue, &'p ObjectValue, &'p Triple, &'p Triple) {
    let (lo, hi) = match (s.left, s.right) {
        (Some(x), Some(y)) => ordered(&x.triple, &y.triple),
        (Some(x), None) | (None, Some(x)) => (&x.triple, &x.triple),
        (None, None) => unreachable!("slot has at least one side"),
    };
    (&lo.object, &hi.object, lo, hi)
}

fn slot_cmp(a: &Slot, b: &Slot) -> Ordering {
    slot_key(a).cmp(&slot_key(b))
}
