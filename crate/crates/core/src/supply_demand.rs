//! Quarterly liquid-fuel supply and demand as reported by several agencies.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Calendar quarter, written `2006Q1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Quarter {
    pub year: i32,
    pub q: u8,
}

impl Quarter {
    pub fn new(year: i32, q: u8) -> Result<Self> {
        if !(1..=4).contains(&q) {
            return Err(Error::InvalidInput(format!("quarter must be 1-4, got {q}")));
        }
        Ok(Self { year, q })
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse quarter `{s}`, expected e.g. 2006Q1"));
        let (y, q) = s.trim().split_once(['Q', 'q']).ok_or_else(bad)?;
        Quarter::new(y.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?)
    }
}

impl TryFrom<String> for Quarter {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Quarter> for String {
    fn from(q: Quarter) -> String {
        q.to_string()
    }
}

/// One agency's estimate for one quarter, in million barrels per day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarterlyFlow {
    pub quarter: Quarter,
    pub agency: String,
    pub demand_mbd: f64,
    pub supply_mbd: f64,
}

impl QuarterlyFlow {
    pub fn new(quarter: Quarter, agency: impl Into<String>, demand_mbd: f64, supply_mbd: f64) -> Result<Self> {
        let flow = Self {
            quarter,
            agency: agency.into(),
            demand_mbd,
            supply_mbd,
        };
        flow.validate()?;
        Ok(flow)
    }

    fn validate(&self) -> Result<()> {
        for v in [self.demand_mbd, self.supply_mbd] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{} {}: flows must be finite and non-negative, got {v}",
                    self.agency, self.quarter
                )));
            }
        }
        if self.agency.trim().is_empty() {
            return Err(Error::InvalidInput(format!("{}: empty agency", self.quarter)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub quarter: Quarter,
    /// Demand minus supply; positive when demand exceeds supply.
    pub gap_mbd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quarter: Quarter,
    /// Supply of agency a minus supply of agency b.
    pub supply_mbd: f64,
    pub demand_mbd: f64,
}

/// Share of quarters with supply above demand on each side of a cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeFractions {
    pub cutoff: Quarter,
    /// Quarters before the cutoff.
    pub pre: f64,
    /// The cutoff quarter and later.
    pub post: f64,
    pub n_pre: usize,
    pub n_post: usize,
}

#[derive(Debug, Deserialize)]
struct FlowRecord {
    year: i32,
    quarter: String,
    agency: String,
    demand_mbd: f64,
    supply_mbd: f64,
}

pub fn load_flows(path: impl AsRef<Path>) -> Result<Vec<QuarterlyFlow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_flows(file)
}

/// Reads `year,quarter,agency,demand_mbd,supply_mbd` rows. The quarter cell
/// may be `1`..`4` or `Q1`..`Q4`. A repeated (agency, quarter) pair is an
/// error.
pub fn read_flows<R: Read>(reader: R) -> Result<Vec<QuarterlyFlow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = BTreeMap::new();
    for record in rdr.deserialize::<FlowRecord>() {
        let r = record?;
        let q_cell = r.quarter.trim_start_matches(['Q', 'q']);
        let q: u8 = q_cell
            .parse()
            .map_err(|_| Error::InvalidInput(format!("cannot parse quarter `{}`", r.quarter)))?;
        let flow = QuarterlyFlow::new(Quarter::new(r.year, q)?, r.agency, r.demand_mbd, r.supply_mbd)?;
        let key = (flow.quarter, flow.agency.to_ascii_uppercase());
        if rows.contains_key(&key) {
            return Err(Error::InvalidInput(format!("duplicate row for {} {}", flow.agency, flow.quarter)));
        }
        rows.insert(key, flow);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rows.into_values().collect())
}

/// One agency's flows keyed by quarter. Agency names match case-insensitively.
fn by_quarter<'a>(flows: &'a [QuarterlyFlow], agency: &str) -> Result<BTreeMap<Quarter, &'a QuarterlyFlow>> {
    let mut out = BTreeMap::new();
    for f in flows.iter().filter(|f| f.agency.eq_ignore_ascii_case(agency.trim())) {
        f.validate()?;
        if out.insert(f.quarter, f).is_some() {
            return Err(Error::InvalidInput(format!("duplicate row for {agency} {}", f.quarter)));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("no rows for agency `{agency}`")));
    }
    Ok(out)
}

/// Demand minus supply per quarter for one agency, in quarter order.
pub fn gap_series(flows: &[QuarterlyFlow], agency: &str) -> Result<Vec<GapPoint>> {
    Ok(by_quarter(flows, agency)?
        .into_values()
        .map(|f| GapPoint {
            quarter: f.quarter,
            gap_mbd: f.demand_mbd - f.supply_mbd,
        })
        .collect())
}

/// `a - b` for supply and demand on the quarters both agencies report.
pub fn agency_discrepancy(flows: &[QuarterlyFlow], agency_a: &str, agency_b: &str) -> Result<Vec<Discrepancy>> {
    let a = by_quarter(flows, agency_a)?;
    let b = by_quarter(flows, agency_b)?;
    let out: Vec<Discrepancy> = a
        .iter()
        .filter_map(|(q, fa)| {
            b.get(q).map(|fb| Discrepancy {
                quarter: *q,
                supply_mbd: fa.supply_mbd - fb.supply_mbd,
                demand_mbd: fa.demand_mbd - fb.demand_mbd,
            })
        })
        .collect();
    if out.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(out)
}

/// Fraction of quarters with supply strictly above demand before `cutoff`
/// and from `cutoff` on.
pub fn regime_flag(flows: &[QuarterlyFlow], agency: &str, cutoff: Quarter) -> Result<RegimeFractions> {
    let rows = by_quarter(flows, agency)?;
    let (mut n_pre, mut s_pre, mut n_post, mut s_post) = (0usize, 0usize, 0usize, 0usize);
    for f in rows.values() {
        let surplus = usize::from(f.supply_mbd > f.demand_mbd);
        if f.quarter < cutoff {
            n_pre += 1;
            s_pre += surplus;
        } else {
            n_post += 1;
            s_post += surplus;
        }
    }
    if n_pre == 0 || n_post == 0 {
        return Err(Error::InvalidInput(format!(
            "{agency} has {n_pre} quarters before and {n_post} from {cutoff}; both sides need data"
        )));
    }
    Ok(RegimeFractions {
        cutoff,
        pre: s_pre as f64 / n_pre as f64,
        post: s_post as f64 / n_post as f64,
        n_pre,
        n_post,
    })
}
