//! In-memory triple store with per-crisis subgraph extraction, corpus
//! statistics and Turtle persistence.
//!
//! A crisis subgraph is the concise bounded description of the crisis IRI:
//! its own statements plus the statements of every blank node reachable
//! from it through object positions.

mod turtle;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

pub use turtle::{parse_turtle, write_turtle};

use crate::model::record::year_of_epoch_day;
use crate::model::schema::{self, class_id_of, crisis_id_of, crisis_iri, is_blank, prop};
use crate::model::triple::canonical_cmp;
use crate::model::{ObjectValue, Taxonomy, TaxonomyNode, Triple, TripleSet};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("unknown crisis {0:?}")]
    UnknownCrisis(String),
    #[error("Turtle syntax error at line {line}, column {column}: {message}")]
    TurtleSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Structure and instance counts of a knowledge base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KbStats {
    pub classes: usize,
    pub individuals: usize,
    pub object_properties: usize,
    pub data_properties: usize,
    pub statements: usize,
}

impl KbStats {
    pub fn rows(&self) -> [(&'static str, usize); 5] {
        [
            ("Classes", self.classes),
            ("Individuals", self.individuals),
            ("Object Properties", self.object_properties),
            ("Data Properties", self.data_properties),
            ("Statements", self.statements),
        ]
    }
}

impl fmt::Display for KbStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, n) in self.rows() {
            writeln!(f, "{:<19}{n:>10}", format!("{name}:"))?;
        }
        Ok(())
    }
}

/// Filter for [`KnowledgeBase::list_crises`]; every supplied clause must
/// match.
#[derive(Debug, Clone, Default)]
pub struct CrisisFilter {
    /// Taxonomy node id; matches crises whose type path passes through it.
    pub type_id: Option<String>,
    /// Case-insensitive country name.
    pub country: Option<String>,
    /// Inclusive start-year range.
    pub year_range: Option<(i32, i32)>,
}

/// Triple store. Writes go through the schema gate; once ingestion is done
/// the store is only read and can be shared between threads.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    taxonomy: Taxonomy,
    schema_version: String,
    by_subject: BTreeMap<String, BTreeSet<Triple>>,
    /// predicate -> subject -> number of triples
    by_predicate: BTreeMap<String, BTreeMap<String, usize>>,
    statements: usize,
}

/// Taxonomy as label and subclass statements.
pub fn taxonomy_triples(taxonomy: &Taxonomy) -> Vec<Triple> {
    let mut out = Vec::new();
    for n in taxonomy.iter() {
        let s = schema::class_iri(&n.id);
        out.push(Triple::new(s.clone(), schema::RDFS_LABEL, ObjectValue::Qualitative(n.label.clone())));
        if let Some(p) = &n.parent {
            out.push(Triple::new(
                s,
                schema::RDFS_SUBCLASS_OF,
                ObjectValue::Resource(schema::class_iri(p)),
            ));
        }
    }
    out
}

impl KnowledgeBase {
    /// An empty store.
    pub fn new(taxonomy: Taxonomy) -> Self {
        KnowledgeBase {
            taxonomy,
            schema_version: schema::SCHEMA_VERSION.to_string(),
            by_subject: BTreeMap::new(),
            by_predicate: BTreeMap::new(),
            statements: 0,
        }
    }

    /// A store preloaded with the taxonomy statements.
    pub fn with_taxonomy(taxonomy: Taxonomy) -> Self {
        let mut kb = KnowledgeBase::new(taxonomy);
        for t in taxonomy_triples(&kb.taxonomy) {
            kb.insert(t).expect("taxonomy statements fit the schema");
        }
        kb
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn schema_version(&self) -> &str {
        &self.schema_version
    }

    pub fn len(&self) -> usize {
        self.statements
    }

    pub fn is_empty(&self) -> bool {
        self.statements == 0
    }

    /// Adds a triple. Returns `false` if it was already present.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        schema::check_triple(&triple, &self.taxonomy).map_err(StoreError::SchemaViolation)?;
        let (s, p) = (triple.subject.clone(), triple.predicate.clone());
        if !self.by_subject.entry(s.clone()).or_default().insert(triple) {
            return Ok(false);
        }
        *self.by_predicate.entry(p).or_default().entry(s).or_default() += 1;
        self.statements += 1;
        Ok(true)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        let Some(set) = self.by_subject.get_mut(&triple.subject) else {
            return false;
        };
        if !set.remove(triple) {
            return false;
        }
        if set.is_empty() {
            self.by_subject.remove(&triple.subject);
        }
        if let Some(subjects) = self.by_predicate.get_mut(&triple.predicate) {
            if let Some(n) = subjects.get_mut(&triple.subject) {
                *n -= 1;
                if *n == 0 {
                    subjects.remove(&triple.subject);
                }
            }
            if subjects.is_empty() {
                self.by_predicate.remove(&triple.predicate);
            }
        }
        self.statements -= 1;
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.by_subject
            .get(&triple.subject)
            .is_some_and(|s| s.contains(triple))
    }

    /// Every triple, grouped by subject in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.by_subject.values().flatten()
    }

    pub fn triples_of<'a>(&'a self, subject: &str) -> impl Iterator<Item = &'a Triple> + 'a {
        self.by_subject.get(subject).into_iter().flatten()
    }

    /// Subjects having at least one statement with `predicate`.
    pub fn subjects_with<'a>(&'a self, predicate: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.by_predicate
            .get(predicate)
            .into_iter()
            .flat_map(|m| m.keys().map(String::as_str))
    }

    /// Ids of all crises (typed subjects in the crisis namespace), sorted.
    pub fn crisis_ids(&self) -> Vec<String> {
        self.subjects_with(schema::RDF_TYPE)
            .filter_map(crisis_id_of)
            .map(str::to_string)
            .collect()
    }

    pub fn contains_crisis(&self, crisis_id: &str) -> bool {
        self.by_predicate
            .get(schema::RDF_TYPE)
            .is_some_and(|m| m.contains_key(&crisis_iri(crisis_id)))
    }

    /// Taxonomy node of a crisis's type statement.
    pub fn crisis_type(&self, crisis_id: &str) -> Option<&TaxonomyNode> {
        self.triples_of(&crisis_iri(crisis_id))
            .find(|t| t.predicate == schema::RDF_TYPE)
            .and_then(|t| match &t.object {
                ObjectValue::Qualitative(label) => self.taxonomy.by_label(label),
                _ => None,
            })
    }

    /// Root-to-node type path of a crisis.
    pub fn crisis_type_path(&self, crisis_id: &str) -> Option<Vec<String>> {
        self.crisis_type(crisis_id).and_then(|n| self.taxonomy.path(&n.id))
    }

    fn bounded_description(&self, root: &str) -> Vec<Triple> {
        let mut out = Vec::new();
        let mut seen = HashSet::from([root.to_string()]);
        let mut queue = vec![root.to_string()];
        while let Some(node) = queue.pop() {
            for t in self.triples_of(&node) {
                if let ObjectValue::Resource(o) = &t.object {
                    if is_blank(o) && seen.insert(o.clone()) {
                        queue.push(o.clone());
                    }
                }
                out.push(t.clone());
            }
        }
        out.sort_by(|a, b| canonical_cmp(root, a, b));
        out
    }

    /// The crisis's concise bounded description in canonical order.
    pub fn crisis_subgraph(&self, crisis_id: &str) -> Result<TripleSet, StoreError> {
        if !self.contains_crisis(crisis_id) {
            return Err(StoreError::UnknownCrisis(crisis_id.to_string()));
        }
        Ok(TripleSet {
            crisis_id: crisis_id.to_string(),
            triples: self.bounded_description(&crisis_iri(crisis_id)),
        })
    }

    /// Removes a crisis's subgraph. Returns the number of removed triples.
    pub fn remove_crisis(&mut self, crisis_id: &str) -> usize {
        let triples = self.bounded_description(&crisis_iri(crisis_id));
        triples.iter().filter(|t| self.remove(t)).count()
    }

    /// Upsert: drops any prior subgraph of `set.crisis_id`, then inserts
    /// `set`. Nothing changes if any triple fails the schema.
    pub fn replace_crisis(&mut self, set: TripleSet) -> Result<(), StoreError> {
        for t in &set.triples {
            schema::check_triple(t, &self.taxonomy).map_err(StoreError::SchemaViolation)?;
        }
        self.remove_crisis(&set.crisis_id);
        for t in set.triples {
            self.insert(t)?;
        }
        Ok(())
    }

    fn is_class(&self, node: &str) -> bool {
        class_id_of(node).is_some_and(|id| self.taxonomy.node(id).is_some())
    }

    /// Counts computed from the live indexes.
    pub fn stats(&self) -> KbStats {
        let mut classes = BTreeSet::new();
        let mut individuals = BTreeSet::new();
        for (subject, triples) in &self.by_subject {
            if self.is_class(subject) {
                classes.insert(subject.as_str());
            } else {
                individuals.insert(subject.as_str());
            }
            for t in triples {
                if let ObjectValue::Resource(o) = &t.object {
                    if self.is_class(o) {
                        classes.insert(o.as_str());
                    } else if is_blank(o) {
                        individuals.insert(o.as_str());
                    }
                }
            }
        }
        let (mut object_properties, mut data_properties) = (0, 0);
        for p in self.by_predicate.keys() {
            match schema::property_kind(p) {
                Some(k) if k.is_object_property() => object_properties += 1,
                _ => data_properties += 1,
            }
        }
        KbStats {
            classes: classes.len(),
            individuals: individuals.len(),
            object_properties,
            data_properties,
            statements: self.statements,
        }
    }

    fn start_year(&self, crisis_id: &str) -> Option<i32> {
        let start = schema::cro(prop::START_DATE);
        self.triples_of(&crisis_iri(crisis_id))
            .find(|t| t.predicate == start)
            .and_then(|t| match &t.object {
                ObjectValue::Quantitative(v) if v.len() == 1 => year_of_epoch_day(v[0] as i64),
                _ => None,
            })
    }

    fn has_country(&self, crisis_id: &str, country: &str) -> bool {
        let pred = schema::cro(prop::COUNTRY);
        self.triples_of(&crisis_iri(crisis_id)).any(|t| {
            t.predicate == pred
                && matches!(&t.object, ObjectValue::Qualitative(c) if c.eq_ignore_ascii_case(country))
        })
    }

    /// Crisis ids matching every clause of `filter`, ascending.
    pub fn list_crises(&self, filter: &CrisisFilter) -> Vec<String> {
        self.crisis_ids()
            .into_iter()
            .filter(|id| match &filter.type_id {
                Some(ty) => self
                    .crisis_type(id)
                    .is_some_and(|n| self.taxonomy.is_ancestor_or_self(ty, &n.id)),
                None => true,
            })
            .filter(|id| match &filter.country {
                Some(c) => self.has_country(id, c),
                None => true,
            })
            .filter(|id| match filter.year_range {
                Some((lo, hi)) => self.start_year(id).is_some_and(|y| lo <= y && y <= hi),
                None => true,
            })
            .collect()
    }
}
