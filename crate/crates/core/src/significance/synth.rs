//! Synthetic LPPL price paths with controlled noise.

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::bootstrap::replica_rng;
use crate::error::{Error, Result};
use crate::models::LpplParams;
use crate::timeseries::{years_between, PricePoint, PriceSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    IidNormal,
    Ar1,
}

/// Log-price noise. For `Ar1`, `sigma` is the innovation standard deviation
/// and the process starts from its stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    #[serde(default)]
    pub rho: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self::iid(0.0)
    }

    pub fn iid(sigma: f64) -> Self {
        Self { kind: NoiseKind::IidNormal, sigma, rho: 0.0 }
    }

    pub fn ar1(sigma: f64, rho: f64) -> Self {
        Self { kind: NoiseKind::Ar1, sigma, rho }
    }

    fn draw(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("noise sigma {} must be finite and >= 0", self.sigma)));
        }
        if self.sigma == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut rng = replica_rng(seed, 0);
        let mut normal = move || -> f64 { rng.sample(StandardNormal) };
        match self.kind {
            NoiseKind::IidNormal => Ok((0..n).map(|_| self.sigma * normal()).collect()),
            NoiseKind::Ar1 => {
                if !(self.rho.abs() < 1.0) {
                    return Err(Error::InvalidConfig(format!("ar1 rho {} must satisfy |rho| < 1", self.rho)));
                }
                let mut e = self.sigma / (1.0 - self.rho * self.rho).sqrt() * normal();
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    out.push(e);
                    e = self.rho * e + self.sigma * normal();
                }
                Ok(out)
            }
        }
    }
}

/// `(t, model(t) + noise)` at the given times.
pub fn synth_log_samples(params: &LpplParams<f64>, times: &[f64], noise: &NoiseSpec, seed: u64) -> Result<Vec<(f64, f64)>> {
    let eps = noise.draw(times.len(), seed)?;
    times
        .iter()
        .zip(eps)
        .map(|(&t, e)| Ok((t, params.eval(t)? + e)))
        .collect()
}

/// Price series `exp(model(t) + noise)` with `t` in decimal years since the
/// first date.
pub fn synth_generate(params: &LpplParams<f64>, dates: &[NaiveDate], noise: &NoiseSpec, seed: u64) -> Result<PriceSeries> {
    let Some(&origin) = dates.first() else {
        return Err(Error::EmptyInput);
    };
    let times: Vec<f64> = dates.iter().map(|d| years_between(origin, *d)).collect();
    let samples = synth_log_samples(params, &times, noise, seed)?;
    let points = dates
        .iter()
        .zip(samples)
        .map(|(date, (_, y))| PricePoint { date: *date, value: y.exp() })
        .collect();
    PriceSeries::new(format!("synthetic {}", params.kind()), points)
}
