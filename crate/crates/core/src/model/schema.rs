//! IRIs and the declared property vocabulary of the crisis ontology.

use super::taxonomy::Taxonomy;
use super::triple::{ObjectValue, Triple};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
/// Ontology namespace: classes and properties.
pub const CRO: &str = "http://crisim.local/ontology#";
/// Crisis individuals.
pub const CRISIS: &str = "http://crisim.local/crisis/";

pub const SCHEMA_VERSION: &str = "crisim-ontology/1";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
/// Datatype for quantitative objects with more than one component.
pub const CRO_VECTOR: &str = "http://crisim.local/ontology#vector";

/// What a property's objects look like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    /// `rdf:type`; object is a taxonomy label.
    Type,
    /// `rdfs:subClassOf`; subject and object are class IRIs.
    SubClassOf,
    /// Object is another resource (IRI or blank node).
    Link,
    /// Free text.
    Text,
    /// Numeric vector of fixed dimension.
    Quantity(usize),
    /// Calendar date stored as a one-component epoch-day vector.
    Date,
}

impl PropertyKind {
    pub fn is_object_property(self) -> bool {
        matches!(self, PropertyKind::Type | PropertyKind::SubClassOf | PropertyKind::Link)
    }
}

/// Crisis record properties by local name in the `cro:` namespace.
pub mod prop {
    pub const LOCATION: &str = "hasLocation";
    pub const REGION: &str = "hasRegion";
    pub const COUNTRY: &str = "hasCountry";
    pub const CONTINENT: &str = "hasContinent";
    pub const TRIGGER_ORIGIN: &str = "hasTriggerOrigin";
    pub const MAGNITUDE_SCALE: &str = "hasMagnitudeScale";
    pub const INFRASTRUCTURE_DAMAGE: &str = "hasInfrastructureDamage";
    pub const DESCRIPTION: &str = "hasDescription";
    pub const COORDINATES: &str = "hasCoordinates";
    pub const START_DATE: &str = "hasStartDate";
    pub const END_DATE: &str = "hasEndDate";
    pub const DURATION_DAYS: &str = "hasDurationDays";
    pub const MAGNITUDE_VALUE: &str = "hasMagnitudeValue";
    pub const AFFECTED: &str = "hasAffected";
    pub const INJURED: &str = "hasInjured";
    pub const MISSING: &str = "hasMissing";
    pub const DEATHS: &str = "hasDeaths";
    pub const TOTAL_DAMAGES: &str = "hasTotalDamages";
    pub const INSURED_LOSSES: &str = "hasInsuredLosses";
    pub const RECONSTRUCTION_COSTS: &str = "hasReconstructionCosts";
    pub const RELATED_CRISIS: &str = "relatedCrisis";
    pub const HAS_DETAIL: &str = "hasDetail";
}

const CRO_PROPERTIES: &[(&str, PropertyKind)] = &[
    (prop::LOCATION, PropertyKind::Text),
    (prop::REGION, PropertyKind::Text),
    (prop::COUNTRY, PropertyKind::Text),
    (prop::CONTINENT, PropertyKind::Text),
    (prop::TRIGGER_ORIGIN, PropertyKind::Text),
    (prop::MAGNITUDE_SCALE, PropertyKind::Text),
    (prop::INFRASTRUCTURE_DAMAGE, PropertyKind::Text),
    (prop::DESCRIPTION, PropertyKind::Text),
    (prop::COORDINATES, PropertyKind::Quantity(2)),
    (prop::START_DATE, PropertyKind::Date),
    (prop::END_DATE, PropertyKind::Date),
    (prop::DURATION_DAYS, PropertyKind::Quantity(1)),
    (prop::MAGNITUDE_VALUE, PropertyKind::Quantity(1)),
    (prop::AFFECTED, PropertyKind::Quantity(1)),
    (prop::INJURED, PropertyKind::Quantity(1)),
    (prop::MISSING, PropertyKind::Quantity(1)),
    (prop::DEATHS, PropertyKind::Quantity(1)),
    (prop::TOTAL_DAMAGES, PropertyKind::Quantity(1)),
    (prop::INSURED_LOSSES, PropertyKind::Quantity(1)),
    (prop::RECONSTRUCTION_COSTS, PropertyKind::Quantity(1)),
    (prop::RELATED_CRISIS, PropertyKind::Link),
    (prop::HAS_DETAIL, PropertyKind::Link),
];

pub fn cro(local: &str) -> String {
    format!("{CRO}{local}")
}

pub fn crisis_iri(crisis_id: &str) -> String {
    format!("{CRISIS}{crisis_id}")
}

pub fn class_iri(node_id: &str) -> String {
    format!("{CRO}{node_id}")
}

/// Crisis id of a crisis IRI, if it lives in the crisis namespace.
pub fn crisis_id_of(iri: &str) -> Option<&str> {
    iri.strip_prefix(CRISIS).filter(|id| !id.is_empty())
}

/// Taxonomy node id of a class IRI.
pub fn class_id_of(iri: &str) -> Option<&str> {
    iri.strip_prefix(CRO).filter(|id| !id.is_empty())
}

pub fn is_blank(node: &str) -> bool {
    node.starts_with("_:")
}

/// Local name of an IRI or blank node: the part after the last `#`, `/`
/// or `:`.
pub fn local_name(node: &str) -> &str {
    if let Some(label) = node.strip_prefix("_:") {
        return label;
    }
    match node.rfind(['#', '/', ':']) {
        Some(i) => &node[i + 1..],
        None => node,
    }
}

/// Declared kind of a predicate IRI, or `None` if it is not in the
/// vocabulary.
pub fn property_kind(predicate: &str) -> Option<PropertyKind> {
    match predicate {
        RDF_TYPE => Some(PropertyKind::Type),
        RDFS_SUBCLASS_OF => Some(PropertyKind::SubClassOf),
        RDFS_LABEL => Some(PropertyKind::Text),
        _ => {
            let local = predicate.strip_prefix(CRO)?;
            CRO_PROPERTIES
                .iter()
                .find(|(name, _)| *name == local)
                .map(|&(_, kind)| kind)
        }
    }
}

/// Every declared predicate IRI.
pub fn vocabulary() -> Vec<String> {
    let mut v = vec![RDF_TYPE.to_string(), RDFS_SUBCLASS_OF.to_string(), RDFS_LABEL.to_string()];
    v.extend(CRO_PROPERTIES.iter().map(|(n, _)| cro(n)));
    v
}

/// Checks a triple against the vocabulary. Returns a human-readable reason
/// on failure.
pub fn check_triple(t: &Triple, taxonomy: &Taxonomy) -> Result<(), String> {
    if t.subject.is_empty() || t.subject == "_:" {
        return Err("empty subject".into());
    }
    if t.predicate.is_empty() {
        return Err("empty predicate".into());
    }
    let kind = property_kind(&t.predicate)
        .ok_or_else(|| format!("undeclared predicate <{}>", t.predicate))?;
    match (&t.object, kind) {
        (ObjectValue::Qualitative(s), _) if s.is_empty() => Err("empty qualitative object".into()),
        (ObjectValue::Qualitative(label), PropertyKind::Type) => match taxonomy.by_label(label) {
            Some(_) => Ok(()),
            None => Err(format!("type {label:?} is not a taxonomy class")),
        },
        (ObjectValue::Resource(o), PropertyKind::SubClassOf) => {
            let known = |iri: &str| class_id_of(iri).and_then(|id| taxonomy.node(id)).is_some();
            if known(&t.subject) && known(o) {
                Ok(())
            } else {
                Err("subClassOf must relate taxonomy classes".into())
            }
        }
        (ObjectValue::Resource(o), PropertyKind::Link) if !o.is_empty() && o != "_:" => Ok(()),
        (ObjectValue::Qualitative(_), PropertyKind::Text) => Ok(()),
        (ObjectValue::Quantitative(v), PropertyKind::Quantity(dim)) => {
            if v.len() != dim {
                Err(format!("expected {dim} components, got {}", v.len()))
            } else if v.iter().any(|x| !x.is_finite()) {
                Err("non-finite component".into())
            } else {
                Ok(())
            }
        }
        (ObjectValue::Quantitative(v), PropertyKind::Date) => {
            if v.len() == 1 && v[0].is_finite() && v[0].fract() == 0.0 {
                Ok(())
            } else {
                Err("date must be a single whole epoch day".into())
            }
        }
        _ => Err(format!(
            "object does not fit predicate <{}> ({kind:?})",
            t.predicate
        )),
    }
}
