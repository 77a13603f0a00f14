//! Pure power law `A + B (tc - t)^m`, the oscillation-free reference fit.

use serde::{Deserialize, Serialize};

use super::{axis, last_time, simplex, Bounds, Interval};
use crate::error::{Error, Result};
use crate::num::{mean, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit<T> {
    pub tc: T,
    pub m: T,
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
    pub rmse: T,
}

impl<T: Real> PowerLawFit<T> {
    pub fn eval(&self, t: T) -> T {
        self.a + self.b * (self.tc - t).powf(self.m)
    }
}

/// `(A, B, rmse)` for fixed `(tc, m)`; `None` if degenerate.
fn slave<T: Real>(tc: T, m: T, data: &[(T, T)]) -> Option<(T, T, T)> {
    let mut f = Vec::with_capacity(data.len());
    for (t, _) in data {
        let tau = tc - *t;
        if !(tau > T::zero()) {
            return None;
        }
        f.push((m * tau.ln()).exp());
    }
    let y: Vec<T> = data.iter().map(|d| d.1).collect();
    let (fbar, ybar) = (mean(&f), mean(&y));
    let sff: T = f.iter().map(|v| (*v - fbar) * (*v - fbar)).sum();
    if !(sff > T::epsilon() * fbar * fbar * T::from_usize(f.len()).unwrap()) {
        return None;
    }
    let sfy: T = f.iter().zip(&y).map(|(v, w)| (*v - fbar) * (*w - ybar)).sum();
    let b = sfy / sff;
    let a = ybar - b * fbar;
    let ss: T = f.iter().zip(&y).map(|(v, w)| (*w - a - b * *v).powi(2)).sum();
    Some((a, b, (ss / T::from_usize(y.len()).unwrap()).sqrt()))
}

/// Least-squares power law over `tc` and `m` within `search` (grid, then
/// simplex from the best grid point), `A` and `B` slaved.
pub fn fit_power_law<T: Real>(data: &[(T, T)], search: &Bounds<T>, max_iter: usize, tol: T) -> Result<PowerLawFit<T>> {
    if data.len() < 3 {
        return Err(Error::InsufficientData { found: data.len(), required: 3 });
    }
    let t_last = last_time(data);
    let tc_box = Interval::new(t_last + search.tc_offset.lo, t_last + search.tc_offset.hi);
    let m_box = search.m;
    let objective = |u: &[T]| {
        slave(tc_box.at(u[0]), m_box.at(u[1]), data).map_or(T::infinity(), |r| r.2)
    };

    let mut best: Option<(T, [T; 2])> = None;
    let (tcs, ms) = (axis(Interval::new(T::zero(), T::one()), 20, false), axis(Interval::new(T::zero(), T::one()), 20, false));
    for &u0 in &tcs {
        for &u1 in &ms {
            let r = objective(&[u0, u1]);
            if r.is_finite() && best.is_none_or(|(b, _)| r < b) {
                best = Some((r, [u0, u1]));
            }
        }
    }
    let (_, start) = best.ok_or_else(|| Error::DegenerateDesign("no valid power law on the grid".into()))?;
    let out = simplex::minimize(objective, &start, T::lit(0.05), max_iter, tol);
    let (tc, m) = (tc_box.at(out.point[0]), m_box.at(out.point[1]));
    let (a, b, rmse) = slave(tc, m, data).ok_or_else(|| Error::DegenerateDesign("flat power law".into()))?;
    Ok(PowerLawFit { tc, m, a, b, rmse })
}
