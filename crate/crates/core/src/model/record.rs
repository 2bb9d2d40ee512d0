use std::fmt;

use chrono::{Datelike, NaiveDate};

use super::taxonomy::Taxonomy;

/// Calendar date where month and day may be unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialDate {
    pub year: i32,
    pub month: Option<u32>,
    pub day: Option<u32>,
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1900, 1, 1).expect("valid epoch")
}

impl PartialDate {
    pub fn ymd(year: i32, month: u32, day: u32) -> Self {
        PartialDate {
            year,
            month: Some(month),
            day: Some(day),
        }
    }

    pub fn year_only(year: i32) -> Self {
        PartialDate {
            year,
            month: None,
            day: None,
        }
    }

    pub fn is_full(&self) -> bool {
        self.month.is_some() && self.day.is_some()
    }

    /// The exact calendar date, when month and day are both known and valid.
    pub fn to_date(&self) -> Option<NaiveDate> {
        NaiveDate::from_ymd_opt(self.year, self.month?, self.day?)
    }

    /// True when the known components form a real date.
    pub fn is_valid(&self) -> bool {
        match (self.month, self.day) {
            (None, None) => NaiveDate::from_ymd_opt(self.year, 1, 1).is_some(),
            (Some(m), None) => NaiveDate::from_ymd_opt(self.year, m, 1).is_some(),
            (Some(_), Some(_)) => self.to_date().is_some(),
            (None, Some(_)) => false,
        }
    }

    /// Representative date: exact when full, the 15th for year-month dates
    /// and July 1 for year-only dates.
    pub fn representative(&self) -> Option<NaiveDate> {
        match (self.month, self.day) {
            (Some(_), Some(_)) => self.to_date(),
            (Some(m), None) => NaiveDate::from_ymd_opt(self.year, m, 15),
            (None, None) => NaiveDate::from_ymd_opt(self.year, 7, 1),
            (None, Some(_)) => None,
        }
    }

    /// Days since 1900-01-01 of the representative date.
    pub fn epoch_day(&self) -> Option<i64> {
        self.representative()
            .map(|d| d.signed_duration_since(epoch()).num_days())
    }
}

impl fmt::Display for PartialDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
            if let Some(d) = self.day {
                write!(f, "-{d:02}")?;
            }
        }
        Ok(())
    }
}

/// Inverse of [`PartialDate::epoch_day`] for full dates.
pub fn date_from_epoch_day(days: i64) -> Option<NaiveDate> {
    epoch().checked_add_signed(chrono::Duration::try_days(days)?)
}

pub fn epoch_day_of(date: NaiveDate) -> i64 {
    date.signed_duration_since(epoch()).num_days()
}

pub fn year_of_epoch_day(days: i64) -> Option<i32> {
    date_from_epoch_day(days).map(|d| d.year())
}

/// One normalized crisis event. Counts are signed so that bad source values
/// survive parsing and are reported by [`CrisisRecord::validate`].
/// Monetary amounts are in thousands of currency units, as in the source.
#[derive(Debug, Clone, PartialEq)]
pub struct CrisisRecord {
    pub crisis_id: String,
    /// Root-to-node taxonomy ids.
    pub type_path: Vec<String>,
    pub location: Option<String>,
    pub region: Option<String>,
    pub country: Option<String>,
    pub continent: Option<String>,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub start_date: PartialDate,
    pub end_date: Option<PartialDate>,
    pub duration_days: Option<i64>,
    pub trigger_origin: Option<String>,
    pub magnitude_scale: Option<String>,
    pub magnitude_value: Option<f64>,
    pub affected: Option<i64>,
    pub injured: Option<i64>,
    pub missing: Option<i64>,
    pub deaths: Option<i64>,
    pub total_damages: Option<f64>,
    pub insured_losses: Option<f64>,
    pub reconstruction_costs: Option<f64>,
    pub infrastructure_damage: Option<String>,
}

impl CrisisRecord {
    /// A record with only the required fields set.
    pub fn new(crisis_id: impl Into<String>, type_path: Vec<String>, start_date: PartialDate) -> Self {
        CrisisRecord {
            crisis_id: crisis_id.into(),
            type_path,
            location: None,
            region: None,
            country: None,
            continent: None,
            latitude: None,
            longitude: None,
            start_date,
            end_date: None,
            duration_days: None,
            trigger_origin: None,
            magnitude_scale: None,
            magnitude_value: None,
            affected: None,
            injured: None,
            missing: None,
            deaths: None,
            total_damages: None,
            insured_losses: None,
            reconstruction_costs: None,
            infrastructure_damage: None,
        }
    }

    /// Calendar difference between full start and end dates.
    pub fn derived_duration(&self) -> Option<i64> {
        let start = self.start_date.to_date()?;
        let end = self.end_date?.to_date()?;
        Some(end.signed_duration_since(start).num_days())
    }

    /// Recomputes `duration_days` from the dates.
    pub fn with_derived_duration(mut self) -> Self {
        self.duration_days = self.derived_duration();
        self
    }

    /// The leaf of the type path.
    pub fn type_id(&self) -> Option<&str> {
        self.type_path.last().map(String::as_str)
    }

    /// Lists every broken invariant. An empty list means the record can be
    /// converted to triples.
    pub fn validate(&self, taxonomy: &Taxonomy) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &'static str, rule: &str| {
            out.push(Violation {
                field,
                rule: rule.to_string(),
            })
        };

        if self.crisis_id.is_empty()
            || !self
                .crisis_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            push("crisis_id", "must be non-empty and use only [A-Za-z0-9_-]");
        }
        if !taxonomy.is_valid_path(&self.type_path) {
            push("type_path", "must be a root-to-node taxonomy path");
        }

        for (field, value) in [
            ("location", &self.location),
            ("region", &self.region),
            ("country", &self.country),
            ("continent", &self.continent),
            ("trigger_origin", &self.trigger_origin),
            ("magnitude_scale", &self.magnitude_scale),
            ("infrastructure_damage", &self.infrastructure_damage),
        ] {
            if matches!(value, Some(s) if s.trim().is_empty()) {
                push(field, "must be non-empty when present");
            }
        }

        match (self.latitude, self.longitude) {
            (Some(lat), Some(lon)) => {
                if !(lat.is_finite() && (-90.0..=90.0).contains(&lat)) {
                    push("latitude", "latitude in -90..90");
                }
                if !(lon.is_finite() && (-180.0..=180.0).contains(&lon)) {
                    push("longitude", "longitude in -180..180");
                }
            }
            (None, None) => {}
            _ => push("latitude", "latitude and longitude come together"),
        }

        if !self.start_date.is_valid() {
            push("start_date", "not a calendar date");
        }
        if let Some(end) = self.end_date {
            if !end.is_valid() {
                push("end_date", "not a calendar date");
            }
        }
        if let (Some(s), Some(e)) = (self.start_date.to_date(), self.end_date.and_then(|d| d.to_date())) {
            if e < s {
                push("end_date", "end_date >= start_date");
            }
        }
        if self.duration_days != self.derived_duration() {
            push(
                "duration_days",
                "equals the calendar difference of full dates, else absent",
            );
        }

        for (field, value) in [
            ("affected", self.affected),
            ("injured", self.injured),
            ("missing", self.missing),
            ("deaths", self.deaths),
        ] {
            if matches!(value, Some(v) if v < 0) {
                push(field, &format!("{field} >= 0"));
            }
        }
        for (field, value) in [
            ("magnitude_value", self.magnitude_value),
            ("total_damages", self.total_damages),
            ("insured_losses", self.insured_losses),
            ("reconstruction_costs", self.reconstruction_costs),
        ] {
            match value {
                Some(v) if !v.is_finite() => push(field, "must be finite"),
                Some(v) if v < 0.0 && field != "magnitude_value" => push(field, &format!("{field} >= 0")),
                _ => {}
            }
        }
        out
    }
}

/// A broken record invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}
