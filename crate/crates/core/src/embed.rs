//! Word vectors, tokenization and word-level similarity.
//!
//! Vectors are loaded from the plain whitespace text format used by most
//! pretrained distributions (`token v1 v2 ... vd`, one per line). Similarity
//! between two words is their cosine clamped to [0, 1]; a word that is not in
//! the table only matches an identical string.

use std::collections::HashMap;
use std::io::BufRead;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("embedding file has no vectors")]
    EmptyFile,
    #[error("cannot take the best match against an empty phrase")]
    EmptyPhrase,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable token to vector map. Vectors are stored as `f32` to keep large
/// pretrained tables affordable; all arithmetic happens in `f64`.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    norms: Vec<f64>,
    warnings: Vec<String>,
}

impl EmbeddingTable {
    /// Builds a table from in-memory entries. Later duplicates are ignored.
    pub fn from_entries<I, S>(dimension: usize, entries: I) -> Result<Self, EmbedError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: AsRef<str>,
    {
        let mut table = EmbeddingTable::empty(dimension);
        for (i, (token, vector)) in entries.into_iter().enumerate() {
            if vector.len() != dimension {
                return Err(EmbedError::DimensionMismatch {
                    line: i + 1,
                    expected: dimension,
                    found: vector.len(),
                });
            }
            table.push(token.as_ref(), &vector, i + 1);
        }
        if table.is_empty() {
            return Err(EmbedError::EmptyFile);
        }
        Ok(table)
    }

    fn empty(dimension: usize) -> Self {
        EmbeddingTable {
            dimension,
            index: HashMap::new(),
            data: Vec::new(),
            norms: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn push(&mut self, token: &str, vector: &[f32], line: usize) {
        let token = token.to_lowercase();
        if self.index.contains_key(&token) {
            self.warnings
                .push(format!("line {line}: duplicate token {token:?} ignored"));
            return;
        }
        let norm = vector.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
        self.index.insert(token, self.norms.len());
        self.data.extend_from_slice(vector);
        self.norms.push(norm);
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    /// Diagnostics collected while loading, such as duplicate tokens.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Row index of a token, usable with [`EmbeddingTable::sim_by_index`].
    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Clamped cosine between two rows.
    pub fn sim_by_index(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 1.0;
        }
        let denom = self.norms[a] * self.norms[b];
        if denom == 0.0 {
            return 0.0;
        }
        let dot: f64 = self
            .row(a)
            .iter()
            .zip(self.row(b))
            .map(|(&x, &y)| f64::from(x) * f64::from(y))
            .sum();
        (dot / denom).clamp(0.0, 1.0)
    }
}

/// Reads the whitespace text format. The first vector line fixes the
/// dimension unless `dims` is given, in which case a leading `count dims`
/// header line is accepted and skipped.
pub fn load_embeddings<R: BufRead>(source: R, dims: Option<usize>) -> Result<EmbeddingTable, EmbedError> {
    let mut table: Option<EmbeddingTable> = dims.map(EmbeddingTable::empty);
    let mut vector: Vec<f32> = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        vector.clear();
        for field in fields {
            let v: f32 = field.parse().map_err(|_| EmbedError::BadLine {
                line: line_no,
                message: format!("{field:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(EmbedError::BadLine {
                    line: line_no,
                    message: format!("{field:?} is not finite"),
                });
            }
            vector.push(v);
        }
        if line_no == 1 && dims.is_some() && is_count_header(token, &vector) {
            continue;
        }
        let table = table.get_or_insert_with(|| EmbeddingTable::empty(vector.len()));
        if vector.len() != table.dimension || vector.is_empty() {
            return Err(EmbedError::DimensionMismatch {
                line: line_no,
                expected: table.dimension,
                found: vector.len(),
            });
        }
        table.push(token, &vector, line_no);
    }
    match table {
        Some(t) if !t.is_empty() => Ok(t),
        _ => Err(EmbedError::EmptyFile),
    }
}

fn is_count_header(token: &str, rest: &[f32]) -> bool {
    token.parse::<u64>().is_ok() && rest.len() == 1 && rest[0].fract() == 0.0
}

/// Loads a table from a file path.
pub fn load_embeddings_file(
    path: impl AsRef<std::path::Path>,
    dims: Option<usize>,
) -> Result<EmbeddingTable, EmbedError> {
    let file = std::fs::File::open(path)?;
    load_embeddings(std::io::BufReader::new(file), dims)
}

/// Similarity of two words: clamped cosine when both are in the table,
/// otherwise 1 for identical strings and 0 for anything else.
pub fn word_sim(w1: &str, w2: &str, table: &EmbeddingTable) -> f64 {
    if w1 == w2 {
        return 1.0;
    }
    match (table.index_of(w1), table.index_of(w2)) {
        (Some(a), Some(b)) => table.sim_by_index(a, b),
        _ => 0.0,
    }
}

/// Best match of a word against every word of a phrase.
pub fn word_to_phrase_sim<S: AsRef<str>>(w: &str, phrase: &[S], table: &EmbeddingTable) -> Result<f64, EmbedError> {
    phrase
        .iter()
        .map(|q| word_sim(w, q.as_ref(), table))
        .reduce(f64::max)
        .ok_or(EmbedError::EmptyPhrase)
}

fn split_pass(text: &str, keep_digits: bool) -> Vec<String> {
    let mut out = Vec::new();
    for segment in text.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = segment.chars().collect();
        let mut start = 0;
        for i in 1..=chars.len() {
            let boundary = i == chars.len() || {
                let (prev, cur) = (chars[i - 1], chars[i]);
                let next = chars.get(i + 1);
                (cur.is_uppercase() && (prev.is_lowercase() || prev.is_numeric()))
                    || (cur.is_uppercase() && prev.is_uppercase() && next.is_some_and(|n| n.is_lowercase()))
            };
            if boundary {
                let piece: String = chars[start..i].iter().collect::<String>().to_lowercase();
                // lowercasing can introduce combining marks; split again on them
                for part in piece.split(|c: char| !c.is_alphanumeric()) {
                    if part.is_empty() || (!keep_digits && part.chars().all(|c| c.is_numeric())) {
                        continue;
                    }
                    out.push(part.to_string());
                }
                start = i;
            }
        }
    }
    out
}

fn tokenize_with(text: &str, keep_digits: bool) -> Vec<String> {
    let mut tokens = split_pass(text, keep_digits);
    // a second pass is a fixpoint for all practical input; loop for the rest
    for _ in 0..4 {
        let again = split_pass(&tokens.join(" "), keep_digits);
        if again == tokens {
            break;
        }
        tokens = again;
    }
    tokens
}

/// Tokenizes an IRI local name or identifier: splits on whitespace,
/// punctuation, underscores and CamelCase boundaries, lowercases, and drops
/// tokens made only of digits.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with(text, false)
}

/// Tokenizes literal text with the same rules, keeping numeric tokens.
pub fn tokenize_literal(text: &str) -> Vec<String> {
    tokenize_with(text, true)
}
