//! The three log-periodic power law variants, evaluated on log price.
//!
//! With `tau = tc - t`:
//!
//! ```text
//! simple:       A + B tau^m [1 + C cos(omega ln tau + phi)]
//! weierstrass:  A + B tau^m + tau^m sum_n C_n cos(n omega ln tau + phi_n)
//! landau:       A + B tau^m / sqrt(1 + (tau/dt)^(2m))
//!                   * [1 + C cos(omega ln tau + (domega / 2m) ln(1 + (tau/dt)^(2m)) + phi)]
//! ```
//!
//! The phase enters as `cos(... + phi)` everywhere; fitted phases are only
//! meaningful modulo `2 pi`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Simple,
    Weierstrass,
    Landau,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Simple, ModelKind::Weierstrass, ModelKind::Landau];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Simple => "simple",
            ModelKind::Weierstrass => "weierstrass",
            ModelKind::Landau => "landau",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simple" | "lppl" => Ok(ModelKind::Simple),
            "weierstrass" => Ok(ModelKind::Weierstrass),
            "landau" => Ok(ModelKind::Landau),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleLpplParams<T> {
    pub tc: T,
    pub m: T,
    pub omega: T,
    pub phi: T,
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
    #[serde(rename = "C")]
    pub c: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic<T> {
    #[serde(rename = "C")]
    pub c: T,
    pub phi: T,
}

/// Harmonic `n` (1-based) oscillates at `n * omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassParams<T> {
    pub tc: T,
    pub m: T,
    pub omega: T,
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
    pub harmonics: Vec<Harmonic<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauParams<T> {
    pub tc: T,
    pub m: T,
    pub omega: T,
    pub phi: T,
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
    #[serde(rename = "C")]
    pub c: T,
    pub delta_t: T,
    pub delta_omega: T,
}

/// Any of the three variants, tagged by `"model"` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum LpplParams<T> {
    Simple(SimpleLpplParams<T>),
    Weierstrass(WeierstrassParams<T>),
    Landau(LandauParams<T>),
}

fn tau<T: Real>(tc: T, t: T) -> Result<T> {
    let tau = tc - t;
    if tau > T::zero() {
        Ok(tau)
    } else {
        Err(Error::Domain {
            t: t.as_f64(),
            tc: tc.as_f64(),
        })
    }
}

pub fn eval_simple<T: Real>(p: &SimpleLpplParams<T>, t: T) -> Result<T> {
    let tau = tau(p.tc, t)?;
    let ln_tau = tau.ln();
    let power = (p.m * ln_tau).exp();
    Ok(p.a + p.b * power * (T::one() + p.c * (p.omega * ln_tau + p.phi).cos()))
}

pub fn eval_weierstrass<T: Real>(p: &WeierstrassParams<T>, t: T) -> Result<T> {
    let tau = tau(p.tc, t)?;
    let ln_tau = tau.ln();
    let power = (p.m * ln_tau).exp();
    let oscillation: T = p
        .harmonics
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let n = T::from_usize(i + 1).unwrap();
            h.c * (n * p.omega * ln_tau + h.phi).cos()
        })
        .sum();
    Ok(p.a + p.b * power + power * oscillation)
}

pub fn eval_landau<T: Real>(p: &LandauParams<T>, t: T) -> Result<T> {
    let tau = tau(p.tc, t)?;
    let ln_tau = tau.ln();
    let two_m = p.m + p.m;
    let crossover = (tau / p.delta_t).powf(two_m).ln_1p();
    let envelope = (p.m * ln_tau - crossover * T::lit(0.5)).exp();
    let phase = p.omega * ln_tau + p.delta_omega / two_m * crossover + p.phi;
    Ok(p.a + p.b * envelope * (T::one() + p.c * phase.cos()))
}

impl<T: Real> LpplParams<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            LpplParams::Simple(_) => ModelKind::Simple,
            LpplParams::Weierstrass(_) => ModelKind::Weierstrass,
            LpplParams::Landau(_) => ModelKind::Landau,
        }
    }

    pub fn eval(&self, t: T) -> Result<T> {
        match self {
            LpplParams::Simple(p) => eval_simple(p, t),
            LpplParams::Weierstrass(p) => eval_weierstrass(p, t),
            LpplParams::Landau(p) => eval_landau(p, t),
        }
    }

    pub fn tc(&self) -> T {
        match self {
            LpplParams::Simple(p) => p.tc,
            LpplParams::Weierstrass(p) => p.tc,
            LpplParams::Landau(p) => p.tc,
        }
    }

    pub fn m(&self) -> T {
        match self {
            LpplParams::Simple(p) => p.m,
            LpplParams::Weierstrass(p) => p.m,
            LpplParams::Landau(p) => p.m,
        }
    }

    pub fn omega(&self) -> T {
        match self {
            LpplParams::Simple(p) => p.omega,
            LpplParams::Weierstrass(p) => p.omega,
            LpplParams::Landau(p) => p.omega,
        }
    }

    pub fn a(&self) -> T {
        match self {
            LpplParams::Simple(p) => p.a,
            LpplParams::Weierstrass(p) => p.a,
            LpplParams::Landau(p) => p.a,
        }
    }

    pub fn b(&self) -> T {
        match self {
            LpplParams::Simple(p) => p.b,
            LpplParams::Weierstrass(p) => p.b,
            LpplParams::Landau(p) => p.b,
        }
    }

    /// Oscillation amplitude relative to the power law: `|C|`, or
    /// `sum |C_n| / |B|` for the Weierstrass variant.
    pub fn relative_oscillation(&self) -> T {
        match self {
            LpplParams::Simple(p) => p.c.abs(),
            LpplParams::Landau(p) => p.c.abs(),
            LpplParams::Weierstrass(p) => {
                let total: T = p.harmonics.iter().map(|h| h.c.abs()).sum();
                if total == T::zero() {
                    T::zero()
                } else {
                    total / p.b.abs()
                }
            }
        }
    }

    /// Phase of the (fundamental) oscillation.
    pub fn phi(&self) -> T {
        match self {
            LpplParams::Simple(p) => p.phi,
            LpplParams::Landau(p) => p.phi,
            LpplParams::Weierstrass(p) => p.harmonics.first().map_or(T::zero(), |h| h.phi),
        }
    }

    /// Copy with the level `A` shifted by `delta`.
    pub fn shifted(&self, delta: T) -> Self {
        let mut out = self.clone();
        match &mut out {
            LpplParams::Simple(p) => p.a = p.a + delta,
            LpplParams::Weierstrass(p) => p.a = p.a + delta,
            LpplParams::Landau(p) => p.a = p.a + delta,
        }
        out
    }

    /// Converts the scalar type, e.g. to report an `f32` fit as `f64`.
    pub fn cast<U: Real>(&self) -> LpplParams<U> {
        let c = |x: T| U::lit(x.as_f64());
        match self {
            LpplParams::Simple(p) => LpplParams::Simple(SimpleLpplParams {
                tc: c(p.tc),
                m: c(p.m),
                omega: c(p.omega),
                phi: c(p.phi),
                a: c(p.a),
                b: c(p.b),
                c: c(p.c),
            }),
            LpplParams::Weierstrass(p) => LpplParams::Weierstrass(WeierstrassParams {
                tc: c(p.tc),
                m: c(p.m),
                omega: c(p.omega),
                a: c(p.a),
                b: c(p.b),
                harmonics: p
                    .harmonics
                    .iter()
                    .map(|h| Harmonic { c: c(h.c), phi: c(h.phi) })
                    .collect(),
            }),
            LpplParams::Landau(p) => LpplParams::Landau(LandauParams {
                tc: c(p.tc),
                m: c(p.m),
                omega: c(p.omega),
                phi: c(p.phi),
                a: c(p.a),
                b: c(p.b),
                c: c(p.c),
                delta_t: c(p.delta_t),
                delta_omega: c(p.delta_omega),
            }),
        }
    }
}

impl<T: Real> From<SimpleLpplParams<T>> for LpplParams<T> {
    fn from(p: SimpleLpplParams<T>) -> Self {
        LpplParams::Simple(p)
    }
}

impl<T: Real> From<WeierstrassParams<T>> for LpplParams<T> {
    fn from(p: WeierstrassParams<T>) -> Self {
        LpplParams::Weierstrass(p)
    }
}

impl<T: Real> From<LandauParams<T>> for LpplParams<T> {
    fn from(p: LandauParams<T>) -> Self {
        LpplParams::Landau(p)
    }
}

/// `y_i - model(t_i)` for every sample.
pub fn residuals<T: Real>(model: &LpplParams<T>, data: &[(T, T)]) -> Result<Vec<T>> {
    data.iter().map(|&(t, y)| Ok(y - model.eval(t)?)).collect()
}
