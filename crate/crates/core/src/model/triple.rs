use std::cmp::Ordering;
use std::fmt;

/// Object of a triple.
///
/// `Resource` links to another node (IRI or `_:` blank node); it is scored
/// as qualitative text using its local name.
#[derive(Debug, Clone)]
pub enum ObjectValue {
    Qualitative(String),
    Quantitative(Vec<f64>),
    Resource(String),
}

/// The two families of triples the similarity measure distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TripleKind {
    Qualitative,
    Quantitative,
}

impl ObjectValue {
    pub fn kind(&self) -> TripleKind {
        match self {
            ObjectValue::Quantitative(_) => TripleKind::Quantitative,
            _ => TripleKind::Qualitative,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ObjectValue::Qualitative(_) => 0,
            ObjectValue::Quantitative(_) => 1,
            ObjectValue::Resource(_) => 2,
        }
    }
}

impl Ord for ObjectValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use ObjectValue::*;
        match (self, other) {
            (Qualitative(a), Qualitative(b)) | (Resource(a), Resource(b)) => a.cmp(b),
            (Quantitative(a), Quantitative(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for ObjectValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for ObjectValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ObjectValue {}

impl fmt::Display for ObjectValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectValue::Qualitative(s) => write!(f, "{s:?}"),
            ObjectValue::Resource(r) => write!(f, "<{r}>"),
            ObjectValue::Quantitative(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// A subject-predicate-object statement. Subjects and predicates are full
/// IRIs (or `_:label` blank nodes for subjects).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: ObjectValue,
}

impl Triple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: ObjectValue) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object,
        }
    }

    pub fn kind(&self) -> TripleKind {
        self.object.kind()
    }
}

/// The triples describing one crisis: its own statements plus those of
/// blank nodes reachable from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSet {
    pub crisis_id: String,
    pub triples: Vec<Triple>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Triple> {
        self.triples.iter()
    }

    /// Has at least one qualitative and one quantitative triple.
    pub fn has_both_kinds(&self) -> bool {
        let qual = self.triples.iter().any(|t| t.kind() == TripleKind::Qualitative);
        let quant = self.triples.iter().any(|t| t.kind() == TripleKind::Quantitative);
        qual && quant
    }
}

/// Canonical order inside a subgraph: the root subject's statements first,
/// then blank-node statements; within a subject by predicate, then object.
pub(crate) fn canonical_cmp(root: &str, a: &Triple, b: &Triple) -> Ordering {
    (a.subject != root)
        .cmp(&(b.subject != root))
        .then_with(|| a.subject.cmp(&b.subject))
        .then_with(|| a.predicate.cmp(&b.predicate))
        .then_with(|| a.object.cmp(&b.object))
}
