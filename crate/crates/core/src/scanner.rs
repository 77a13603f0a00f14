//! Shrinking-window scans: many calibrations sharing one `t_last`, with the
//! start date moving towards it.

use std::io::Write;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::calibrate::{fit_window, FitConfig, FitResult};
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::num::{quantile_sorted, Real};
use crate::parallel;
use crate::timeseries::{PriceSeries, TimeWindow};

pub const DEFAULT_STEP_DAYS: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ScanConfig<T> {
    pub t_start_min: NaiveDate,
    pub t_start_max: NaiveDate,
    /// Calendar days between successive start dates.
    pub step: u32,
    pub t_last: NaiveDate,
    pub variants: Vec<ModelKind>,
    pub fit: FitConfig<T>,
}

impl<T: Real> ScanConfig<T> {
    /// Weekly simple-LPPL scan with default fit settings.
    pub fn new(t_start_min: NaiveDate, t_start_max: NaiveDate, t_last: NaiveDate) -> Self {
        Self {
            t_start_min,
            t_start_max,
            step: DEFAULT_STEP_DAYS,
            t_last,
            variants: vec![ModelKind::Simple],
            fit: FitConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_start_min > self.t_start_max || self.t_start_max >= self.t_last {
            return Err(Error::InvalidConfig(format!(
                "need t_start_min <= t_start_max < t_last, got {} / {} / {}",
                self.t_start_min, self.t_start_max, self.t_last
            )));
        }
        if self.step == 0 {
            return Err(Error::InvalidConfig("step must be at least 1 day".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidConfig("no model variants selected".into()));
        }
        self.fit.validate()
    }

    /// `t_start_min, t_start_min + step, ...` up to `t_start_max`.
    pub fn start_dates(&self) -> Vec<NaiveDate> {
        let mut out = Vec::new();
        let mut d = self.t_start_min;
        while d <= self.t_start_max {
            out.push(d);
            match d.checked_add_days(Days::new(self.step.into())) {
                Some(next) => d = next,
                None => break,
            }
        }
        out
    }

    /// Variants sorted and deduplicated.
    fn variant_set(&self) -> Vec<ModelKind> {
        let mut v = self.variants.clone();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow<T> {
    pub t_start: NaiveDate,
    pub variant: ModelKind,
    pub fit: FitResult<T>,
}

/// A window that produced no fit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSkip {
    pub t_start: NaiveDate,
    pub variant: ModelKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: ModelKind,
    pub n_fits: usize,
    pub n_qualified: usize,
    pub fraction_qualified: f64,
    /// Median critical time (decimal year) over qualified fits.
    pub median_tc: Option<f64>,
    /// Interquartile range of the same sample, in years.
    pub iqr_tc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult<T> {
    /// Sorted by `(variant, t_start)`.
    pub rows: Vec<ScanRow<T>>,
    pub skips: Vec<ScanSkip>,
    pub summary: Vec<VariantSummary>,
}

impl<T: Real> ScanResult<T> {
    /// One line per row: `t_start,variant,tc,m,omega,rmse,qualified`, with `tc`
    /// in decimal years.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_start", "variant", "tc", "m", "omega", "rmse", "qualified"])?;
        for row in &self.rows {
            let f = &row.fit;
            w.write_record([
                row.t_start.to_string(),
                row.variant.to_string(),
                row_tc(f).to_string(),
                f.params.m().to_string(),
                f.params.omega().to_string(),
                f.rmse.to_string(),
                f.qualified.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

fn row_tc<T: Real>(fit: &FitResult<T>) -> f64 {
    fit.tc_decimal_year().unwrap_or_else(|| fit.tc().as_f64())
}

/// Calibrates every `(variant, t_start)` window on `workers` threads. Windows
/// that cannot be fitted are listed in `skips`; the scan fails only when no
/// window yields a fit.
pub fn scan<T: Real>(data: &PriceSeries, config: &ScanConfig<T>, workers: usize) -> Result<ScanResult<T>> {
    config.validate()?;
    if data.first_date() > config.t_start_min || data.last_date() < config.t_last {
        return Err(Error::InvalidInput(format!(
            "series covers {}..{}, scan needs {}..{}",
            data.first_date(),
            data.last_date(),
            config.t_start_min,
            config.t_last
        )));
    }
    let starts = config.start_dates();
    let tasks: Vec<(ModelKind, NaiveDate)> = config
        .variant_set()
        .into_iter()
        .flat_map(|v| starts.iter().map(move |s| (v, *s)))
        .collect();

    let outcomes = parallel::map_indexed(tasks.len(), workers, |i| {
        let (variant, t_start) = tasks[i];
        TimeWindow::new(t_start, config.t_last).and_then(|w| fit_window(data, &w, &config.fit, variant))
    })?;

    let mut rows = Vec::new();
    let mut skips = Vec::new();
    for ((variant, t_start), outcome) in tasks.iter().copied().zip(outcomes) {
        match outcome {
            Ok(fit) => rows.push(ScanRow { t_start, variant, fit }),
            Err(e) => skips.push(ScanSkip {
                t_start,
                variant,
                reason: e.to_string(),
            }),
        }
    }
    if rows.is_empty() {
        return Err(Error::ScanFailed);
    }
    let mut result = ScanResult {
        rows,
        skips,
        summary: Vec::new(),
    };
    result.summary = summarize(&result.rows, &config.variant_set());
    Ok(result)
}

/// Median and IQR of the qualified critical times, per variant present in
/// the result.
pub fn tc_summary<T: Real>(result: &ScanResult<T>) -> Result<Vec<VariantSummary>> {
    if result.rows.is_empty() && result.skips.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut variants: Vec<ModelKind> = result
        .rows
        .iter()
        .map(|r| r.variant)
        .chain(result.skips.iter().map(|s| s.variant))
        .collect();
    variants.sort();
    variants.dedup();
    Ok(summarize(&result.rows, &variants))
}

fn summarize<T: Real>(rows: &[ScanRow<T>], variants: &[ModelKind]) -> Vec<VariantSummary> {
    variants
        .iter()
        .map(|&variant| {
            let fits: Vec<&FitResult<T>> = rows.iter().filter(|r| r.variant == variant).map(|r| &r.fit).collect();
            let mut tcs: Vec<f64> = fits.iter().filter(|f| f.qualified).map(|f| row_tc(f)).collect();
            tcs.sort_by(f64::total_cmp);
            let fraction_qualified = if fits.is_empty() {
                0.0
            } else {
                tcs.len() as f64 / fits.len() as f64
            };
            let (median_tc, iqr_tc) = if tcs.is_empty() {
                (None, None)
            } else {
                (
                    Some(quantile_sorted(&tcs, 0.5)),
                    Some(quantile_sorted(&tcs, 0.75) - quantile_sorted(&tcs, 0.25)),
                )
            };
            VariantSummary {
                variant,
                n_fits: fits.len(),
                n_qualified: tcs.len(),
                fraction_qualified,
                median_tc,
                iqr_tc,
            }
        })
        .collect()
}
