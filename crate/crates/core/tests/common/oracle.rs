//! Reference scorer written for clarity, not speed: plain loops over plain
//! vectors, its own vector loader and cosine. Only tokenization is shared
//! with the library, since it defines the input words rather than the
//! arithmetic.

use std::cmp::Ordering;

use crisim::model::{ObjectValue, Triple, TripleSet};
use crisim::sim::triple_tokens;

pub struct NaiveVectors {
    entries: Vec<(String, Vec<f64>)>,
}

impl NaiveVectors {
    pub fn load(text: &str) -> Self {
        let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
        for line in text.lines() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            let token = parts[0].to_lowercase();
            if entries.iter().any(|(t, _)| *t == token) {
                continue;
            }
            entries.push((token, parts[1..].iter().map(|p| p.parse().unwrap()).collect()));
        }
        NaiveVectors { entries }
    }

    fn get(&self, w: &str) -> Option<&Vec<f64>> {
        self.entries.iter().find(|(t, _)| t == w).map(|(_, v)| v)
    }

    /// Clamped cosine; identical strings are 1, unknown words only match
    /// themselves.
    pub fn word_sim(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        let (Some(x), Some(y)) = (self.get(a), self.get(b)) else {
            return 0.0;
        };
        let mut dot = 0.0;
        let mut nx = 0.0;
        let mut ny = 0.0;
        for i in 0..x.len() {
            dot += x[i] * y[i];
            nx += x[i] * x[i];
            ny += y[i] * y[i];
        }
        if nx == 0.0 || ny == 0.0 {
            return 0.0;
        }
        let c = dot / (nx.sqrt() * ny.sqrt());
        c.clamp(0.0, 1.0)
    }
}

/// Word to phrase: best match over the phrase.
fn s_bar(v: &NaiveVectors, w: &str, phrase: &[String]) -> f64 {
    let mut best = 0.0;
    for q in phrase {
        let s = v.word_sim(w, q);
        if s > best {
            best = s;
        }
    }
    best
}

pub fn sim1(v: &NaiveVectors, a: &Triple, b: &Triple) -> f64 {
    let s1 = triple_tokens(a);
    let s2 = triple_tokens(b);
    let mut left = 0.0;
    for w in &s1 {
        left += s_bar(v, w, &s2);
    }
    let mut right = 0.0;
    for w in &s2 {
        right += s_bar(v, w, &s1);
    }
    (left + right) / (s1.len() + s2.len()) as f64
}

pub fn sim2(o1: &[f64], o2: &[f64]) -> f64 {
    let mut total = 0.0;
    for t in 0..o1.len() {
        total += (o1[t] - o2[t]) * (o1[t] - o2[t]);
    }
    1.0 / (1.0 + total.sqrt())
}

/// Per-predicate min and max of each component over `all`.
pub struct NaiveScaling {
    ranges: Vec<(String, Vec<(f64, f64)>)>,
}

impl NaiveScaling {
    pub fn new<'a>(all: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut ranges: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for t in all {
            let ObjectValue::Quantitative(v) = &t.object else { continue };
            match ranges.iter_mut().find(|(p, _)| *p == t.predicate) {
                Some((_, r)) => {
                    for i in 0..v.len() {
                        r[i].0 = r[i].0.min(v[i]);
                        r[i].1 = r[i].1.max(v[i]);
                    }
                }
                None => ranges.push((t.predicate.clone(), v.iter().map(|&x| (x, x)).collect())),
            }
        }
        NaiveScaling { ranges }
    }

    fn apply(&self, predicate: &str, v: &[f64]) -> Vec<f64> {
        let r = &self.ranges.iter().find(|(p, _)| p == predicate).unwrap().1;
        (0..v.len())
            .map(|i| {
                let (lo, hi) = r[i];
                if hi > lo {
                    (v[i] - lo) / (hi - lo)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

fn is_quant(t: &Triple) -> bool {
    matches!(t.object, ObjectValue::Quantitative(_))
}

fn pair_sim(v: &NaiveVectors, scaling: Option<&NaiveScaling>, a: &Triple, b: &Triple) -> f64 {
    match (&a.object, &b.object) {
        (ObjectValue::Quantitative(x), ObjectValue::Quantitative(y)) => match scaling {
            Some(s) => sim2(&s.apply(&a.predicate, x), &s.apply(&b.predicate, y)),
            None => sim2(x, y),
        },
        _ => sim1(v, a, b),
    }
}

/// Tie order for equally similar candidate pairs: unordered objects, then
/// unordered triples.
fn tie_key<'a>(a: &'a Triple, b: &'a Triple) -> (&'a ObjectValue, &'a ObjectValue, &'a Triple, &'a Triple) {
    let (lo_o, hi_o) = if a.object <= b.object { (&a.object, &b.object) } else { (&b.object, &a.object) };
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    (lo_o, hi_o, lo, hi)
}

pub struct NaiveScore {
    pub qualitative_avg: f64,
    pub quantitative_avg: f64,
    pub combined: f64,
    pub l: usize,
    pub h: usize,
}

/// Set similarity: pair triples that share a predicate and kind, best pair
/// first; every triple left over is a pair scoring 0. Each average runs
/// over its own pair count and is 0 when that count is 0.
pub fn sim_sets(v: &NaiveVectors, scaling: Option<&NaiveScaling>, c1: &TripleSet, c2: &TripleSet) -> NaiveScore {
    let mut groups: Vec<(String, bool)> = Vec::new();
    for t in c1.triples.iter().chain(&c2.triples) {
        let g = (t.predicate.clone(), is_quant(t));
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    let (mut qual_sum, mut quant_sum, mut l, mut h) = (0.0, 0.0, 0usize, 0usize);
    for (predicate, quant) in groups {
        let lefts: Vec<&Triple> = c1.triples.iter().filter(|t| t.predicate == predicate && is_quant(t) == quant).collect();
        let rights: Vec<&Triple> = c2.triples.iter().filter(|t| t.predicate == predicate && is_quant(t) == quant).collect();
        let mut left_done = vec![false; lefts.len()];
        let mut right_done = vec![false; rights.len()];
        let mut pairs = 0;
        let mut sum = 0.0;
        loop {
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..lefts.len() {
                for j in 0..rights.len() {
                    if left_done[i] || right_done[j] {
                        continue;
                    }
                    let s = pair_sim(v, scaling, lefts[i], rights[j]);
                    let better = match best {
                        None => true,
                        Some((bs, bi, bj)) => {
                            s > bs
                                || (s == bs
                                    && tie_key(lefts[i], rights[j]).cmp(&tie_key(lefts[bi], rights[bj]))
                                        == Ordering::Less)
                        }
                    };
                    if better {
                        best = Some((s, i, j));
                    }
                }
            }
            let Some((s, i, j)) = best else { break };
            left_done[i] = true;
            right_done[j] = true;
            sum += s;
            pairs += 1;
        }
        pairs += left_done.iter().filter(|d| !**d).count();
        pairs += right_done.iter().filter(|d| !**d).count();
        if quant {
            quant_sum += sum;
            h += pairs;
        } else {
            qual_sum += sum;
            l += pairs;
        }
    }
    let qualitative_avg = if l == 0 { 0.0 } else { qual_sum / l as f64 };
    let quantitative_avg = if h == 0 { 0.0 } else { quant_sum / h as f64 };
    NaiveScore {
        qualitative_avg,
        quantitative_avg,
        combined: qualitative_avg + quantitative_avg,
        l,
        h,
    }
}
