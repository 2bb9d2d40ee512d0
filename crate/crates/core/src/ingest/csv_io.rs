//! EM-DAT style CSV reading and writing.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};

use serde::Deserialize;

use super::{IngestError, IngestReport};
use crate::model::{CrisisRecord, PartialDate, Taxonomy};

/// A `CrisisRecord` field a CSV column can feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordField {
    CrisisId,
    TypeLabel,
    SubtypeLabel,
    Location,
    Region,
    Country,
    Continent,
    Latitude,
    Longitude,
    StartYear,
    StartMonth,
    StartDay,
    EndYear,
    EndMonth,
    EndDay,
    TriggerOrigin,
    MagnitudeScale,
    MagnitudeValue,
    Affected,
    Injured,
    Missing,
    Deaths,
    TotalDamages,
    InsuredLosses,
    ReconstructionCosts,
    InfrastructureDamage,
}

/// Default EM-DAT column names. `No Missing` and `Infrastructure Damage`
/// have no EM-DAT counterpart and only appear in synthetic corpora.
pub const EMDAT_COLUMNS: &[(&str, RecordField)] = &[
    ("Dis No", RecordField::CrisisId),
    ("Disaster Type", RecordField::TypeLabel),
    ("Disaster Subtype", RecordField::SubtypeLabel),
    ("Location", RecordField::Location),
    ("Region", RecordField::Region),
    ("Country", RecordField::Country),
    ("Continent", RecordField::Continent),
    ("Latitude", RecordField::Latitude),
    ("Longitude", RecordField::Longitude),
    ("Start Year", RecordField::StartYear),
    ("Start Month", RecordField::StartMonth),
    ("Start Day", RecordField::StartDay),
    ("End Year", RecordField::EndYear),
    ("End Month", RecordField::EndMonth),
    ("End Day", RecordField::EndDay),
    ("Origin", RecordField::TriggerOrigin),
    ("Dis Mag Scale", RecordField::MagnitudeScale),
    ("Dis Mag Value", RecordField::MagnitudeValue),
    ("Total Affected", RecordField::Affected),
    ("No Injured", RecordField::Injured),
    ("No Missing", RecordField::Missing),
    ("Total Deaths", RecordField::Deaths),
    ("Total Damages ('000 US$)", RecordField::TotalDamages),
    ("Insured Damages ('000 US$)", RecordField::InsuredLosses),
    ("Reconstruction Costs ('000 US$)", RecordField::ReconstructionCosts),
    ("Infrastructure Damage", RecordField::InfrastructureDamage),
];

/// Maps source columns onto record fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    /// Source column name to field, in output column order.
    column_map: Vec<(String, RecordField)>,
    required: BTreeSet<String>,
}

#[derive(Deserialize)]
struct SchemaFile {
    columns: BTreeMap<String, RecordField>,
    #[serde(default)]
    required: Vec<String>,
}

impl CsvSchema {
    /// Builds a schema. The crisis id, type and start year columns are
    /// always required; every required column must be mapped.
    pub fn new(
        column_map: Vec<(String, RecordField)>,
        required: impl IntoIterator<Item = String>,
    ) -> Result<Self, IngestError> {
        let mut seen = HashSet::new();
        for (col, field) in &column_map {
            if !seen.insert(*field) {
                return Err(IngestError::Schema(format!(
                    "field {field:?} is mapped twice (again by {col:?})"
                )));
            }
        }
        let mut req: BTreeSet<String> = required.into_iter().collect();
        for must in [RecordField::CrisisId, RecordField::TypeLabel, RecordField::StartYear] {
            let col = column_map
                .iter()
                .find(|(_, f)| *f == must)
                .map(|(c, _)| c.clone())
                .ok_or_else(|| IngestError::Schema(format!("no column mapped to {must:?}")))?;
            req.insert(col);
        }
        if let Some(stray) = req.iter().find(|c| !column_map.iter().any(|(m, _)| m == *c)) {
            return Err(IngestError::Schema(format!(
                "required column {stray:?} is not in the column map"
            )));
        }
        Ok(CsvSchema {
            column_map,
            required: req,
        })
    }

    /// Default EM-DAT layout.
    pub fn emdat() -> Self {
        CsvSchema::new(
            EMDAT_COLUMNS.iter().map(|(c, f)| (c.to_string(), *f)).collect(),
            Vec::new(),
        )
        .expect("default schema is valid")
    }

    /// Reads a column map from TOML:
    ///
    /// ```toml
    /// required = ["Dis No"]
    /// [columns]
    /// "Dis No" = "crisis_id"
    /// "Disaster Type" = "type_label"
    /// "Start Year" = "start_year"
    /// ```
    pub fn from_toml(text: &str) -> Result<Self, IngestError> {
        let file: SchemaFile =
            toml::from_str(text).map_err(|e| IngestError::Schema(e.to_string()))?;
        CsvSchema::new(file.columns.into_iter().collect(), file.required)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, RecordField)> {
        self.column_map.iter().map(|(c, f)| (c.as_str(), *f))
    }

    pub fn required(&self) -> &BTreeSet<String> {
        &self.required
    }
}

/// Finds the data row (1-based) holding an unterminated quoted field.
fn unbalanced_quote_row(text: &str) -> Option<usize> {
    let mut in_quotes = false;
    let mut line = 0usize;
    let mut opened_at = 0usize;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes && chars.peek() == Some(&'"') => {
                chars.next();
            }
            '"' => {
                in_quotes = !in_quotes;
                opened_at = line;
            }
            '\n' if !in_quotes => line += 1,
            _ => {}
        }
    }
    in_quotes.then_some(opened_at.max(1))
}

fn text(cell: &str) -> Option<String> {
    let t = cell.trim();
    (!t.is_empty()).then(|| t.to_string())
}

fn numeric_body(cell: &str) -> Option<String> {
    let t: String = cell
        .trim()
        .chars()
        .filter(|c| *c != ',' && *c != '_' && !c.is_whitespace())
        .collect();
    (!t.is_empty()).then_some(t)
}

fn real(cell: &str, col: &str) -> Result<Option<f64>, String> {
    match numeric_body(cell) {
        None => Ok(None),
        Some(t) => match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(format!("column {col:?}: {cell:?} is not a number")),
        },
    }
}

fn integer(cell: &str, col: &str) -> Result<Option<i64>, String> {
    match numeric_body(cell) {
        None => Ok(None),
        Some(t) => {
            if let Ok(v) = t.parse::<i64>() {
                return Ok(Some(v));
            }
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 => Ok(Some(v as i64)),
                _ => Err(format!("column {col:?}: {cell:?} is not a whole number")),
            }
        }
    }
}

#[derive(Default)]
struct RawRow {
    cells: BTreeMap<RecordField, (String, String)>,
}

impl RawRow {
    fn get(&self, f: RecordField) -> Option<(&str, &str)> {
        self.cells.get(&f).map(|(c, v)| (c.as_str(), v.as_str()))
    }
    fn text(&self, f: RecordField) -> Option<String> {
        self.get(f).and_then(|(_, v)| text(v))
    }
    fn real(&self, f: RecordField) -> Result<Option<f64>, String> {
        match self.get(f) {
            Some((c, v)) => real(v, c),
            None => Ok(None),
        }
    }
    fn integer(&self, f: RecordField) -> Result<Option<i64>, String> {
        match self.get(f) {
            Some((c, v)) => integer(v, c),
            None => Ok(None),
        }
    }
    fn date_part(&self, f: RecordField, max: i64) -> Result<Option<u32>, String> {
        match self.integer(f)? {
            None => Ok(None),
            Some(v) if (1..=max).contains(&v) => Ok(Some(v as u32)),
            Some(v) => Err(format!("{f:?} {v} out of range 1..={max}")),
        }
    }
    fn date(
        &self,
        year: RecordField,
        month: RecordField,
        day: RecordField,
    ) -> Result<Option<PartialDate>, String> {
        let y = self.integer(year)?;
        let m = self.date_part(month, 12)?;
        let d = self.date_part(day, 31)?;
        match y {
            None if m.is_some() || d.is_some() => Err(format!("{year:?} missing but month/day given")),
            None => Ok(None),
            Some(y) => {
                let y = i32::try_from(y).map_err(|_| format!("{year:?} {y} out of range"))?;
                if d.is_some() && m.is_none() {
                    return Err(format!("{day:?} given without {month:?}"));
                }
                Ok(Some(PartialDate {
                    year: y,
                    month: m,
                    day: d,
                }))
            }
        }
    }
}

/// Outcome of converting one row: a record plus warnings, or a reason.
fn row_to_record(
    raw: &RawRow,
    taxonomy: &Taxonomy,
    warnings: &mut Vec<String>,
) -> Result<(CrisisRecord, String), String> {
    use RecordField::*;
    let crisis_id = raw.text(CrisisId).ok_or("missing crisis id")?;
    let type_label = raw.text(TypeLabel).ok_or("missing disaster type")?;
    let subtype = raw.text(SubtypeLabel);
    let class = taxonomy
        .classify(&type_label, subtype.as_deref())
        .map_err(|e| e.to_string())?;
    if let Some(w) = class.warning {
        warnings.push(w);
    }
    let start = raw
        .date(StartYear, StartMonth, StartDay)?
        .ok_or("missing start year")?;
    if !start.is_full() {
        warnings.push(format!("start date {start} has partial granularity"));
    }
    let mut r = CrisisRecord::new(crisis_id, class.path, start);
    r.end_date = raw.date(EndYear, EndMonth, EndDay)?;
    r.location = raw.text(Location);
    r.region = raw.text(Region);
    r.country = raw.text(Country);
    r.continent = raw.text(Continent);
    r.latitude = raw.real(Latitude)?;
    r.longitude = raw.real(Longitude)?;
    r.trigger_origin = raw.text(TriggerOrigin);
    r.magnitude_scale = raw.text(MagnitudeScale);
    r.magnitude_value = raw.real(MagnitudeValue)?;
    r.affected = raw.integer(Affected)?;
    r.injured = raw.integer(Injured)?;
    r.missing = raw.integer(Missing)?;
    r.deaths = raw.integer(Deaths)?;
    r.total_damages = raw.real(TotalDamages)?;
    r.insured_losses = raw.real(InsuredLosses)?;
    r.reconstruction_costs = raw.real(ReconstructionCosts)?;
    r.infrastructure_damage = raw.text(InfrastructureDamage);
    let r = r.with_derived_duration();

    let violations = r.validate(taxonomy);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(list.join("; "));
    }
    let type_id = taxonomy
        .type_node_of(&r.type_path)
        .map(|n| n.id.clone())
        .unwrap_or_default();
    Ok((r, type_id))
}

/// Parses a UTF-8 CSV with a header row. Each data row becomes a record or
/// a rejection; structural problems abort the whole parse.
pub fn parse_csv<R: Read>(
    mut input: R,
    schema: &CsvSchema,
    taxonomy: &Taxonomy,
) -> Result<(Vec<CrisisRecord>, IngestReport), IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|e| IngestError::MalformedCsv {
        row: 0,
        message: format!("input is not UTF-8: {e}"),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    if let Some(row) = unbalanced_quote_row(text) {
        return Err(IngestError::MalformedCsv {
            row,
            message: "unterminated quoted field".into(),
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IngestError::MalformedCsv {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    for req in schema.required() {
        if !names.iter().any(|n| n == req) {
            return Err(IngestError::MissingRequiredColumn(req.clone()));
        }
    }
    let field_at: Vec<Option<RecordField>> = names
        .iter()
        .map(|n| schema.columns().find(|(c, _)| c == n).map(|(_, f)| f))
        .collect();

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    let mut ids = HashSet::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| IngestError::MalformedCsv {
            row: row_no,
            message: match e.kind() {
                csv::ErrorKind::UnequalLengths {
                    expected_len, len, ..
                } => format!("expected {expected_len} columns, found {len}"),
                _ => e.to_string(),
            },
        })?;
        let mut raw = RawRow::default();
        for (cell, (field, name)) in row.iter().zip(field_at.iter().zip(&names)) {
            if let Some(f) = field {
                raw.cells.insert(*f, (name.clone(), cell.to_string()));
            }
        }
        let mut warnings = Vec::new();
        match row_to_record(&raw, taxonomy, &mut warnings) {
            Ok((record, _)) if !ids.insert(record.crisis_id.clone()) => {
                report.reject(row_no, format!("duplicate crisis id {:?}", record.crisis_id));
            }
            Ok((record, type_id)) => {
                report.warnings.extend(warnings.into_iter().map(|w| (row_no, w)));
                report.accept(type_id);
                records.push(record);
            }
            Err(reason) => report.reject(row_no, reason),
        }
    }
    Ok((records, report))
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records in the schema's column order.
pub fn write_csv<W: Write>(
    records: &[CrisisRecord],
    schema: &CsvSchema,
    taxonomy: &Taxonomy,
    out: W,
) -> Result<(), IngestError> {
    use RecordField::*;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(schema.columns().map(|(c, _)| c))
        .map_err(|e| IngestError::Io(e.into()))?;
    for r in records {
        let type_node = taxonomy.type_node_of(&r.type_path);
        let leaf = r.type_id().and_then(|id| taxonomy.node(id));
        let cells: Vec<String> = schema
            .columns()
            .map(|(_, f)| match f {
                CrisisId => r.crisis_id.clone(),
                TypeLabel => type_node.map(|n| n.label.clone()).unwrap_or_default(),
                SubtypeLabel => match (type_node, leaf) {
                    (Some(t), Some(l)) if l.depth > t.depth => l.label.clone(),
                    _ => String::new(),
                },
                Location => fmt_opt(r.location.as_ref()),
                Region => fmt_opt(r.region.as_ref()),
                Country => fmt_opt(r.country.as_ref()),
                Continent => fmt_opt(r.continent.as_ref()),
                Latitude => fmt_opt(r.latitude),
                Longitude => fmt_opt(r.longitude),
                StartYear => r.start_date.year.to_string(),
                StartMonth => fmt_opt(r.start_date.month),
                StartDay => fmt_opt(r.start_date.day),
                EndYear => fmt_opt(r.end_date.map(|d| d.year)),
                EndMonth => fmt_opt(r.end_date.and_then(|d| d.month)),
                EndDay => fmt_opt(r.end_date.and_then(|d| d.day)),
                TriggerOrigin => fmt_opt(r.trigger_origin.as_ref()),
                MagnitudeScale => fmt_opt(r.magnitude_scale.as_ref()),
                MagnitudeValue => fmt_opt(r.magnitude_value),
                Affected => fmt_opt(r.affected),
                Injured => fmt_opt(r.injured),
                Missing => fmt_opt(r.missing),
                Deaths => fmt_opt(r.deaths),
                TotalDamages => fmt_opt(r.total_damages),
                InsuredLosses => fmt_opt(r.insured_losses),
                ReconstructionCosts => fmt_opt(r.reconstruction_costs),
                InfrastructureDamage => fmt_opt(r.infrastructure_damage.as_ref()),
            })
            .collect();
        w.write_record(&cells).map_err(|e| IngestError::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
