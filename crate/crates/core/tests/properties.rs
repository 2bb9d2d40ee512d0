mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use common::oracle::{self, NaiveScaling, NaiveVectors};
use common::{fixture, toy_table};
use crisim::embed::{tokenize, tokenize_literal, word_sim, word_to_phrase_sim};
use crisim::ingest::{parse_csv, write_csv, CsvSchema};
use crisim::model::schema::{self, cro, crisis_iri, prop};
use crisim::model::{CrisisRecord, ObjectValue, PartialDate, Taxonomy, Triple, TripleSet};
use crisim::sim::{align, sim_quantitative, sim_sets, QuantScaling};
use crisim::store::{parse_turtle, KnowledgeBase};

fn naive_vectors() -> &'static NaiveVectors {
    static V: OnceLock<NaiveVectors> = OnceLock::new();
    V.get_or_init(|| NaiveVectors::load(&std::fs::read_to_string(fixture("toy_vectors.txt")).unwrap()))
}

const WORDS: &[&str] = &[
    "flood", "riverine", "flash", "storm", "wind", "rain", "heat", "drought", "fire", "Paris", "Lyon",
    "Île-de-France", "heavy", "zzz", "FlashFlood",
];
const IDS: &[&str] = &["1_RiverineFlood", "2_Storm", "3_Flood", "4_HeatWave"];

fn phrase() -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(WORDS), 1..4).prop_map(|w| w.join(" "))
}

/// Triple sets with repeated predicates, both kinds and a few shared
/// values, to exercise multi-valued alignment.
fn triple_set() -> impl Strategy<Value = TripleSet> {
    let item = (0..7usize, phrase(), -50i32..50, -50i32..50);
    (proptest::sample::select(IDS), proptest::collection::vec(item, 1..9)).prop_map(|(id, items)| {
        let s = crisis_iri(id);
        let mut triples: Vec<Triple> = items
            .into_iter()
            .map(|(p, text, x, y)| {
                let (pred, object) = match p {
                    0 => (cro(prop::LOCATION), ObjectValue::Qualitative(text)),
                    1 => (cro(prop::COUNTRY), ObjectValue::Qualitative(text)),
                    2 => (schema::RDF_TYPE.to_string(), ObjectValue::Qualitative(text)),
                    3 => (cro(prop::DEATHS), ObjectValue::Quantitative(vec![f64::from(x)])),
                    4 => (cro(prop::MAGNITUDE_VALUE), ObjectValue::Quantitative(vec![f64::from(x) / 4.0])),
                    5 => (
                        cro(prop::COORDINATES),
                        ObjectValue::Quantitative(vec![f64::from(x) / 10.0, f64::from(y) / 10.0]),
                    ),
                    _ => (cro(prop::RELATED_CRISIS), ObjectValue::Resource(crisis_iri(&text.replace(' ', "_")))),
                };
                Triple::new(s.clone(), pred, object)
            })
            .collect();
        triples.sort();
        triples.dedup();
        TripleSet {
            crisis_id: id.to_string(),
            triples,
        }
    })
}

fn pair_scaling(a: &TripleSet, b: &TripleSet) -> (QuantScaling, NaiveScaling) {
    let all: Vec<&Triple> = a.iter().chain(b.iter()).collect();
    (
        QuantScaling::from_triples(all.iter().copied()),
        NaiveScaling::new(all.iter().copied()),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn engine_agrees_with_naive_reference(a in triple_set(), b in triple_set(), scaled in any::<bool>()) {
        let (fast_scaling, slow_scaling) = pair_scaling(&a, &b);
        let fast = sim_sets(&a, &b, toy_table(), scaled.then_some(&fast_scaling)).unwrap();
        let slow = oracle::sim_sets(naive_vectors(), scaled.then_some(&slow_scaling), &a, &b);
        prop_assert_eq!((fast.l, fast.h), (slow.l, slow.h));
        prop_assert!((fast.combined - slow.combined).abs() <= 1e-12);
        prop_assert!((fast.qualitative_avg - slow.qualitative_avg).abs() <= 1e-12);
        prop_assert!((fast.quantitative_avg - slow.quantitative_avg).abs() <= 1e-12);
    }

    #[test]
    fn scores_are_exactly_symmetric(a in triple_set(), b in triple_set()) {
        let ab = sim_sets(&a, &b, toy_table(), None).unwrap();
        let ba = sim_sets(&b, &a, toy_table(), None).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn alignment_mirrors(a in triple_set(), b in triple_set()) {
        let ab = align(&a, &b, toy_table(), None).unwrap();
        let ba = align(&b, &a, toy_table(), None).unwrap();
        let mirrored: Vec<_> = ab.iter().map(|p| p.mirrored()).collect();
        prop_assert_eq!(mirrored, ba);
        for p in &ab {
            prop_assert!(p.left.is_some() || p.right.is_some());
            for t in p.left.iter().chain(p.right.iter()) {
                prop_assert_eq!(&t.predicate, &p.predicate);
                prop_assert_eq!(t.kind(), p.kind);
            }
        }
        prop_assert!(ab.windows(2).all(|w| w[0].predicate <= w[1].predicate));
    }

    #[test]
    fn score_bounds_and_bookkeeping(a in triple_set(), b in triple_set()) {
        let s = sim_sets(&a, &b, toy_table(), None).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.qualitative_avg));
        prop_assert!((0.0..=1.0).contains(&s.quantitative_avg));
        prop_assert!((0.0..=1.0).contains(&s.normalized));
        prop_assert!((0.0..=2.0).contains(&s.combined));
        prop_assert_eq!(s.combined, s.qualitative_avg + s.quantitative_avg);
        prop_assert!(s.l + s.h >= 1);
        if s.l == 0 { prop_assert_eq!(s.qualitative_avg, 0.0); }
        if s.h == 0 { prop_assert_eq!(s.quantitative_avg, 0.0); }
    }

    #[test]
    fn identity_dominates(a in triple_set(), b in triple_set()) {
        let own = sim_sets(&a, &a, toy_table(), None).unwrap();
        let other = sim_sets(&a, &b, toy_table(), None).unwrap();
        prop_assert!(own.combined >= other.combined);
        if a.has_both_kinds() {
            prop_assert_eq!(own.combined, 2.0);
            prop_assert_eq!(own.normalized, 1.0);
        }
    }

    #[test]
    fn kernel_strictly_decreases_with_distance(
        base in proptest::collection::vec(-1e3f64..1e3, 1..4),
        dir in proptest::collection::vec(-1.0f64..1.0, 4),
        t1 in 0.0f64..100.0,
        gap in 0.01f64..100.0,
    ) {
        let dir = &dir[..base.len()];
        prop_assume!(dir.iter().map(|d| d * d).sum::<f64>() > 1e-3);
        let at = |t: f64| base.iter().zip(dir).map(|(b, d)| b + t * d).collect::<Vec<_>>();
        let near = sim_quantitative(&base, &at(t1)).unwrap();
        let far = sim_quantitative(&base, &at(t1 + gap)).unwrap();
        prop_assert!(far < near);
        prop_assert!(near > 0.0 && near <= 1.0);
    }

    #[test]
    fn word_similarity_laws(
        a in proptest::sample::select(WORDS),
        b in proptest::sample::select(WORDS),
        phrase in proptest::collection::vec(proptest::sample::select(WORDS), 1..5),
    ) {
        let t = toy_table();
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        prop_assert_eq!(word_sim(&a, &b, t), word_sim(&b, &a, t));
        prop_assert!((0.0..=1.0).contains(&word_sim(&a, &b, t)));
        prop_assert_eq!(word_sim(&a, &a, t), 1.0);
        let phrase: Vec<String> = phrase.iter().map(|w| w.to_lowercase()).collect();
        let best = word_to_phrase_sim(&a, &phrase, t).unwrap();
        for q in &phrase {
            prop_assert!(best >= word_sim(&a, q, t));
        }
        prop_assert!(phrase.iter().any(|q| word_sim(&a, q, t) == best));
    }

    #[test]
    fn tokenize_is_idempotent(text in "\\PC{0,40}") {
        for f in [tokenize, tokenize_literal] {
            let once = f(&text);
            prop_assert_eq!(f(&once.join(" ")), once.clone());
            prop_assert!(once.iter().all(|w| !w.is_empty() && *w == w.to_lowercase()));
        }
    }

    #[test]
    fn tokenize_is_idempotent_on_identifiers(text in "[A-Za-z0-9_ -]{0,30}") {
        let once = tokenize(&text);
        prop_assert_eq!(tokenize(&once.join(" ")), once);
    }
}

// ---------------------------------------------------------------- storage

fn type_leaves() -> Vec<String> {
    let tax = Taxonomy::build();
    tax.iter()
        .filter(|n| {
            tax.path(&n.id)
                .unwrap()
                .iter()
                .any(|id| tax.node(id).is_some_and(|x| x.disaster_type))
        })
        .map(|n| n.id.clone())
        .collect()
}

fn text_cell() -> impl Strategy<Value = Option<String>> {
    proptest::option::of("[A-Za-zÀ-ÿ][A-Za-zÀ-ÿ0-9 ,;\"'\n-]{0,12}[A-Za-z]")
}

fn record() -> impl Strategy<Value = CrisisRecord> {
    let head = (
        1u32..100_000,
        proptest::sample::select(type_leaves()),
        1900i32..2030,
        proptest::option::of((1u32..=12, proptest::option::of(1u32..=28))),
        proptest::option::of(0i64..400),
    );
    let place = (text_cell(), text_cell(), proptest::option::of((-90.0f64..90.0, -180.0f64..180.0)), text_cell());
    let numbers = (
        proptest::option::of(0i64..10_000_000),
        proptest::option::of(0i64..10_000),
        proptest::option::of(0i64..10_000),
        proptest::option::of(-10.0f64..1e5),
        proptest::option::of(0.0f64..1e9),
        proptest::option::of(0.0f64..1e9),
    );
    (head, place, numbers).prop_map(|(head, place, numbers)| {
        let (n, leaf, year, md, span) = head;
        let tax = Taxonomy::build();
        let start = match md {
            None => PartialDate::year_only(year),
            Some((m, None)) => PartialDate { year, month: Some(m), day: None },
            Some((m, Some(d))) => PartialDate::ymd(year, m, d),
        };
        let mut r = CrisisRecord::new(format!("{n}_{leaf}"), tax.path(&leaf).unwrap(), start);
        if let (Some(days), Some(date)) = (span, start.to_date()) {
            let end = date + chrono::Duration::days(days);
            use chrono::Datelike;
            r.end_date = Some(PartialDate::ymd(end.year(), end.month(), end.day()));
        }
        (r.location, r.region, r.trigger_origin) = (place.0, place.1, place.3);
        if let Some((lat, lon)) = place.2 {
            (r.latitude, r.longitude) = (Some(lat), Some(lon));
        }
        (r.affected, r.deaths, r.injured) = (numbers.0, numbers.1, numbers.2);
        (r.magnitude_value, r.total_damages, r.insured_losses) = (numbers.3, numbers.4, numbers.5);
        r.with_derived_duration()
    })
}

fn turtle_triple() -> impl Strategy<Value = Triple> {
    let labels: Vec<String> = Taxonomy::build().iter().map(|n| n.label.clone()).collect();
    (
        proptest::sample::select(IDS),
        0..6usize,
        "[^\u{0}]{1,16}",
        proptest::sample::select(labels),
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -700_000i64..700_000,
        0..3u8,
    )
        .prop_map(|(id, p, text, label, x, day, blank)| {
            let s = crisis_iri(id);
            match p {
                0 => Triple::new(s, cro(prop::LOCATION), ObjectValue::Qualitative(text)),
                1 => Triple::new(s, schema::RDF_TYPE, ObjectValue::Qualitative(label)),
                2 => Triple::new(s, cro(prop::TOTAL_DAMAGES), ObjectValue::Quantitative(vec![x])),
                3 => Triple::new(s, cro(prop::START_DATE), ObjectValue::Quantitative(vec![day as f64])),
                4 => Triple::new(s, cro(prop::COORDINATES), ObjectValue::Quantitative(vec![x, -x / 3.0])),
                _ => Triple::new(
                    format!("_:n{blank}"),
                    cro(prop::DESCRIPTION),
                    ObjectValue::Qualitative(text),
                ),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(records in proptest::collection::vec(record(), 1..6)) {
        let tax = Taxonomy::build();
        let mut records = records;
        records.sort_by(|a, b| a.crisis_id.cmp(&b.crisis_id));
        records.dedup_by(|a, b| a.crisis_id == b.crisis_id);
        let mut out = Vec::new();
        write_csv(&records, &CsvSchema::emdat(), &tax, &mut out).unwrap();
        let (back, report) = parse_csv(out.as_slice(), &CsvSchema::emdat(), &tax).unwrap();
        prop_assert_eq!(report.rejected, 0, "{:?}", report.rejections);
        prop_assert_eq!(back, records);
    }

    #[test]
    fn turtle_round_trip(triples in proptest::collection::vec(turtle_triple(), 0..12), links in 0..3usize) {
        let tax = Taxonomy::build();
        let mut kb = KnowledgeBase::new(tax.clone());
        for t in triples {
            kb.insert(t).unwrap();
        }
        for (i, id) in IDS.iter().enumerate().take(links) {
            let s = crisis_iri(id);
            kb.insert(Triple::new(s, cro(prop::HAS_DETAIL), ObjectValue::Resource(format!("_:n{i}")))).unwrap();
        }
        let text = kb.to_turtle();
        let back = parse_turtle(&text, tax.clone()).unwrap();
        prop_assert_eq!(back.len(), kb.len());
        prop_assert_eq!(back.to_turtle(), text.clone());
        // triples without blank nodes come back unchanged
        for t in kb.iter().filter(|t| !t.subject.starts_with("_:")) {
            if !matches!(&t.object, ObjectValue::Resource(o) if o.starts_with("_:")) {
                prop_assert!(back.contains(t), "lost {:?}", t);
            }
        }
    }
}
