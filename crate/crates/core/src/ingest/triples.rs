use super::IngestError;
use crate::model::schema::{self, cro, crisis_iri, prop};
use crate::model::triple::canonical_cmp;
use crate::model::{CrisisRecord, ObjectValue, Taxonomy, Triple, TripleSet};

/// Converts a valid record into its crisis subgraph. Every triple has the
/// crisis IRI as subject; absent fields produce no triple.
pub fn record_to_triples(record: &CrisisRecord, taxonomy: &Taxonomy) -> Result<TripleSet, IngestError> {
    let violations = record.validate(taxonomy);
    if !violations.is_empty() {
        return Err(IngestError::InvalidRecord {
            crisis_id: record.crisis_id.clone(),
            violations,
        });
    }
    let subject = crisis_iri(&record.crisis_id);
    let mut triples = Vec::new();
    let mut add = |predicate: String, object: ObjectValue| {
        triples.push(Triple::new(subject.clone(), predicate, object));
    };

    let leaf = record
        .type_id()
        .and_then(|id| taxonomy.node(id))
        .expect("validated type path");
    add(schema::RDF_TYPE.to_string(), ObjectValue::Qualitative(leaf.label.clone()));

    for (name, value) in [
        (prop::LOCATION, &record.location),
        (prop::REGION, &record.region),
        (prop::COUNTRY, &record.country),
        (prop::CONTINENT, &record.continent),
        (prop::TRIGGER_ORIGIN, &record.trigger_origin),
        (prop::MAGNITUDE_SCALE, &record.magnitude_scale),
        (prop::INFRASTRUCTURE_DAMAGE, &record.infrastructure_damage),
    ] {
        if let Some(text) = value {
            add(cro(name), ObjectValue::Qualitative(text.trim().to_string()));
        }
    }

    if let (Some(lat), Some(lon)) = (record.latitude, record.longitude) {
        add(cro(prop::COORDINATES), ObjectValue::Quantitative(vec![lat, lon]));
    }
    if let Some(day) = record.start_date.epoch_day() {
        add(cro(prop::START_DATE), ObjectValue::Quantitative(vec![day as f64]));
    }
    if let Some(day) = record.end_date.and_then(|d| d.epoch_day()) {
        add(cro(prop::END_DATE), ObjectValue::Quantitative(vec![day as f64]));
    }
    let counts = [
        (prop::DURATION_DAYS, record.duration_days),
        (prop::AFFECTED, record.affected),
        (prop::INJURED, record.injured),
        (prop::MISSING, record.missing),
        (prop::DEATHS, record.deaths),
    ];
    for (name, value) in counts {
        if let Some(v) = value {
            add(cro(name), ObjectValue::Quantitative(vec![v as f64]));
        }
    }
    let reals = [
        (prop::MAGNITUDE_VALUE, record.magnitude_value),
        (prop::TOTAL_DAMAGES, record.total_damages),
        (prop::INSURED_LOSSES, record.insured_losses),
        (prop::RECONSTRUCTION_COSTS, record.reconstruction_costs),
    ];
    for (name, value) in reals {
        if let Some(v) = value {
            add(cro(name), ObjectValue::Quantitative(vec![v]));
        }
    }

    triples.sort_by(|a, b| canonical_cmp(&subject, a, b));
    triples.dedup();
    Ok(TripleSet {
        crisis_id: record.crisis_id.clone(),
        triples,
    })
}
