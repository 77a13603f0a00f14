//! Date-indexed price and FX series: ingestion, alignment, windowing and the
//! log-price transform used by every calibration.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Days per decimal year on the calibration time axis.
pub const DAYS_PER_YEAR: f64 = 365.25;

/// Default minimum number of observations in a fit window.
pub const DEFAULT_MIN_POINTS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub value: f64,
}

/// Strictly date-ordered, positive observations of one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    label: String,
    points: Vec<PricePoint>,
}

impl PriceSeries {
    pub fn new(label: impl Into<String>, points: Vec<PricePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.value > 0.0) || !p.value.is_finite() {
                return Err(Error::NonPositive {
                    row: i as u64 + 1,
                    value: p.value,
                });
            }
        }
        for w in points.windows(2) {
            if w[1].date == w[0].date {
                return Err(Error::DuplicateDate(w[1].date));
            }
            if w[1].date < w[0].date {
                return Err(Error::Unordered(w[1].date));
            }
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }

    /// Builds a series from unordered observations, sorting by date.
    pub fn from_unsorted(label: impl Into<String>, mut points: Vec<PricePoint>) -> Result<Self> {
        points.sort_by_key(|p| p.date);
        Self::new(label, points)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.points[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.points[self.points.len() - 1].date
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.points.iter().map(|p| p.date)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    /// Same dates, every value multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| PricePoint {
                date: p.date,
                value: p.value * k,
            })
            .collect();
        Self::new(self.label.clone(), points)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Closed date interval `[t_start, t_last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_start: NaiveDate,
    pub t_last: NaiveDate,
}

impl TimeWindow {
    pub fn new(t_start: NaiveDate, t_last: NaiveDate) -> Result<Self> {
        if t_start >= t_last {
            return Err(Error::InvalidWindow { t_start, t_last });
        }
        Ok(Self { t_start, t_last })
    }

    /// Window spanning the whole series.
    pub fn covering(series: &PriceSeries) -> Result<Self> {
        Self::new(series.first_date(), series.last_date())
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.t_start <= date && date <= self.t_last
    }
}

/// Column mapping for [`load_csv`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date_col: String,
    pub value_col: String,
    /// `chrono` format string.
    pub date_format: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date_col: "date".into(),
            value_col: "value".into(),
            date_format: "%Y-%m-%d".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSeries {
    pub series: PriceSeries,
    /// Rows whose value cell was empty.
    pub skipped: usize,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LoadedSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, schema, label)
}

/// Parses a price CSV from any reader. Row numbers in errors are file line
/// numbers (the header is line 1).
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema, label: impl Into<String>) -> Result<LoadedSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let date_idx = col(&schema.date_col)?;
    let value_idx = col(&schema.value_col)?;

    let mut by_date = BTreeMap::new();
    let mut skipped = 0;
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let date_cell = record.get(date_idx).unwrap_or("");
        let value_cell = record.get(value_idx).unwrap_or("");
        if value_cell.is_empty() {
            skipped += 1;
            continue;
        }
        let date = NaiveDate::parse_from_str(date_cell, &schema.date_format).map_err(|_| Error::Parse {
            row,
            what: "date",
            value: date_cell.to_string(),
        })?;
        let value: f64 = value_cell.parse().map_err(|_| Error::Parse {
            row,
            what: "value",
            value: value_cell.to_string(),
        })?;
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositive { row, value });
        }
        if by_date.insert(date, value).is_some() {
            return Err(Error::DuplicateDate(date));
        }
    }
    if by_date.is_empty() {
        return Err(Error::EmptyInput);
    }
    let points = by_date
        .into_iter()
        .map(|(date, value)| PricePoint { date, value })
        .collect();
    Ok(LoadedSeries {
        series: PriceSeries::new(label, points)?,
        skipped,
    })
}

/// Re-expresses `prices` (quoted in X) in currency Y using an X-per-Y rate
/// series. Only dates present in both inputs survive.
pub fn convert_currency(prices: &PriceSeries, fx: &PriceSeries, currency: &str) -> Result<PriceSeries> {
    let rates: BTreeMap<NaiveDate, f64> = fx.points().iter().map(|p| (p.date, p.value)).collect();
    let points: Vec<PricePoint> = prices
        .points()
        .iter()
        .filter_map(|p| {
            rates.get(&p.date).map(|rate| PricePoint {
                date: p.date,
                value: p.value / rate,
            })
        })
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    PriceSeries::new(format!("{} ({currency})", prices.label()), points)
}

/// Observations with `t_start <= date <= t_last`.
pub fn slice_window(series: &PriceSeries, window: &TimeWindow, min_points: usize) -> Result<PriceSeries> {
    let points: Vec<PricePoint> = series
        .points()
        .iter()
        .filter(|p| window.contains(p.date))
        .copied()
        .collect();
    if points.len() < min_points.max(1) {
        return Err(Error::InsufficientData {
            found: points.len(),
            required: min_points.max(1),
        });
    }
    PriceSeries::new(series.label().to_string(), points)
}

/// Decimal years elapsed from `origin` to `date`.
pub fn years_between(origin: NaiveDate, date: NaiveDate) -> f64 {
    (date - origin).num_days() as f64 / DAYS_PER_YEAR
}

/// Date `years` decimal years after `origin`, rounded to the nearest day.
pub fn date_after(origin: NaiveDate, years: f64) -> NaiveDate {
    origin + Duration::days((years * DAYS_PER_YEAR).round() as i64)
}

/// Calendar decimal year, e.g. 2008-07-02 is about 2008.5.
pub fn decimal_year(date: NaiveDate) -> f64 {
    let year = date.year();
    let days_in_year = if NaiveDate::from_ymd_opt(year, 2, 29).is_some() { 366.0 } else { 365.0 };
    year as f64 + (date.ordinal0() as f64) / days_in_year
}

/// `(t, ln p)` pairs with `t` in decimal years since the first observation.
pub fn to_log_price(series: &PriceSeries) -> Vec<(f64, f64)> {
    let origin = series.first_date();
    series
        .points()
        .iter()
        .map(|p| (years_between(origin, p.date), p.value.ln()))
        .collect()
}

/// Monday-to-Friday dates in `[start, end]`.
pub fn business_days(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}
