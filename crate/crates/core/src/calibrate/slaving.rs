//! Exact least squares for the parameters that enter the models linearly.
//!
//! For fixed `(tc, m, omega[, delta_t, delta_omega])` each variant is a linear
//! combination of known basis functions once the oscillation is expanded as
//! `C cos(x + phi) = C1 cos x + C2 sin x`:
//!
//! ```text
//! simple / landau:  [1, f, f cos x, f sin x]
//! weierstrass:      [1, f, f cos(n x), f sin(n x) for n = 1..N]
//! ```
//!
//! with `f = tau^m` (landau: divided by the crossover factor) and `x` the
//! log-periodic argument. Columns are scaled to unit norm, factored with
//! Householder QR and the condition number of the scaled normal matrix is
//! checked before solving.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Harmonic, LandauParams, LpplParams, ModelKind, SimpleLpplParams, WeierstrassParams};
use crate::num::Real;

/// The parameters explored by search; unused fields are ignored by the
/// variants that do not have them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinear<T> {
    pub tc: T,
    pub m: T,
    pub omega: T,
    pub delta_t: T,
    pub delta_omega: T,
}

impl<T: Real> Nonlinear<T> {
    pub fn new(tc: T, m: T, omega: T) -> Self {
        Self {
            tc,
            m,
            omega,
            delta_t: T::one(),
            delta_omega: T::zero(),
        }
    }

    pub fn with_crossover(mut self, delta_t: T, delta_omega: T) -> Self {
        self.delta_t = delta_t;
        self.delta_omega = delta_omega;
        self
    }

    pub fn of(params: &LpplParams<T>) -> Self {
        let base = Self::new(params.tc(), params.m(), params.omega());
        match params {
            LpplParams::Landau(p) => base.with_crossover(p.delta_t, p.delta_omega),
            _ => base,
        }
    }

    pub(crate) fn to_vec(self, kind: ModelKind) -> Vec<T> {
        let mut v = vec![self.tc, self.m, self.omega];
        if kind == ModelKind::Landau {
            v.extend([self.delta_t, self.delta_omega]);
        }
        v
    }

    pub(crate) fn from_slice(kind: ModelKind, v: &[T]) -> Self {
        let base = Self::new(v[0], v[1], v[2]);
        if kind == ModelKind::Landau {
            base.with_crossover(v[3], v[4])
        } else {
            base
        }
    }
}

pub fn nonlinear_dim(kind: ModelKind) -> usize {
    match kind {
        ModelKind::Landau => 5,
        _ => 3,
    }
}

/// Number of linear unknowns; `harmonics` only matters for Weierstrass.
pub fn linear_dim(kind: ModelKind, harmonics: usize) -> usize {
    match kind {
        ModelKind::Weierstrass => 2 + 2 * harmonics,
        _ => 4,
    }
}

/// Solution of the linear subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<T> {
    /// `[A, B, C1, C2, ...]` in basis order.
    pub coeffs: Vec<T>,
    /// Back-mapped model parameters.
    pub params: LpplParams<T>,
    pub rmse: T,
}

fn fill_row<T: Real>(kind: ModelKind, nl: &Nonlinear<T>, harmonics: usize, t: T, row: &mut [T]) -> Result<()> {
    let tau = nl.tc - t;
    if !(tau > T::zero()) {
        return Err(Error::Domain {
            t: t.as_f64(),
            tc: nl.tc.as_f64(),
        });
    }
    let ln_tau = tau.ln();
    row[0] = T::one();
    match kind {
        ModelKind::Simple => {
            let f = (nl.m * ln_tau).exp();
            let (s, c) = (nl.omega * ln_tau).sin_cos();
            row[1] = f;
            row[2] = f * c;
            row[3] = f * s;
        }
        ModelKind::Weierstrass => {
            let f = (nl.m * ln_tau).exp();
            row[1] = f;
            let x = nl.omega * ln_tau;
            for n in 0..harmonics {
                let (s, c) = (T::from_usize(n + 1).unwrap() * x).sin_cos();
                row[2 + 2 * n] = f * c;
                row[3 + 2 * n] = f * s;
            }
        }
        ModelKind::Landau => {
            let two_m = nl.m + nl.m;
            let crossover = (two_m * (ln_tau - nl.delta_t.ln())).exp().ln_1p();
            let f = (nl.m * ln_tau - crossover * T::lit(0.5)).exp();
            let (s, c) = (nl.omega * ln_tau + nl.delta_omega / two_m * crossover).sin_cos();
            row[1] = f;
            row[2] = f * c;
            row[3] = f * s;
        }
    }
    Ok(())
}

/// `c1 cos x + c2 sin x = r cos(x + phi)`.
fn polar<T: Real>(c1: T, c2: T) -> (T, T) {
    (c1.hypot(c2), (-c2).atan2(c1))
}

fn wrap_phase<T: Real>(phi: T) -> T {
    let pi = T::PI();
    if phi > pi {
        phi - pi - pi
    } else if phi <= -pi {
        phi + pi + pi
    } else {
        phi
    }
}

/// Converts basis coefficients into model parameters.
///
/// Convention: `C = sqrt(C1^2 + C2^2) / |B|` is non-negative and the sign of
/// `B` is absorbed into the phase (`phi + pi` when `B < 0`). `C = 0` when there
/// is no oscillation; `C` is infinite when `B = 0` but an oscillation remains.
pub fn assemble<T: Real>(kind: ModelKind, nl: &Nonlinear<T>, coeffs: &[T]) -> LpplParams<T> {
    let (a, b) = (coeffs[0], coeffs[1]);
    let relative = |c1: T, c2: T| {
        let (r, phi0) = polar(c1, c2);
        let phi = if b < T::zero() { wrap_phase(phi0 + T::PI()) } else { phi0 };
        let c = if r == T::zero() { T::zero() } else { r / b.abs() };
        (c, phi)
    };
    match kind {
        ModelKind::Simple => {
            let (c, phi) = relative(coeffs[2], coeffs[3]);
            LpplParams::Simple(SimpleLpplParams {
                tc: nl.tc,
                m: nl.m,
                omega: nl.omega,
                phi,
                a,
                b,
                c,
            })
        }
        ModelKind::Landau => {
            let (c, phi) = relative(coeffs[2], coeffs[3]);
            LpplParams::Landau(LandauParams {
                tc: nl.tc,
                m: nl.m,
                omega: nl.omega,
                phi,
                a,
                b,
                c,
                delta_t: nl.delta_t,
                delta_omega: nl.delta_omega,
            })
        }
        ModelKind::Weierstrass => LpplParams::Weierstrass(WeierstrassParams {
            tc: nl.tc,
            m: nl.m,
            omega: nl.omega,
            a,
            b,
            harmonics: coeffs[2..]
                .chunks(2)
                .map(|pair| {
                    let (c, phi) = polar(pair[0], pair[1]);
                    Harmonic { c, phi }
                })
                .collect(),
        }),
    }
}

/// Default cap on the condition number of the scaled normal matrix: `1e12`,
/// tightened for low-precision scalars.
pub fn default_max_condition<T: Real>() -> T {
    T::lit(1e12).min(T::lit(1e-2) / T::epsilon())
}

/// Eigenvalues of a small symmetric matrix (row-major, `p x p`) by cyclic
/// Jacobi rotations.
fn symmetric_eigenvalues<T: Real>(mut a: Vec<T>, p: usize) -> Vec<T> {
    let two = T::lit(2.0);
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..p {
            for j in (i + 1)..p {
                off = off + a[i * p + j] * a[i * p + j];
            }
        }
        let diag: T = (0..p).map(|i| a[i * p + i] * a[i * p + i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let aij = a[i * p + j];
                if aij == T::zero() {
                    continue;
                }
                let theta = (a[j * p + j] - a[i * p + i]) / (two * aij);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..p {
                    let aki = a[k * p + i];
                    let akj = a[k * p + j];
                    a[k * p + i] = c * aki - s * akj;
                    a[k * p + j] = s * aki + c * akj;
                }
                for k in 0..p {
                    let aik = a[i * p + k];
                    let ajk = a[j * p + k];
                    a[i * p + k] = c * aik - s * ajk;
                    a[j * p + k] = s * aik + c * ajk;
                }
            }
        }
    }
    (0..p).map(|i| a[i * p + i]).collect()
}

/// Least-squares solve of a column-major `n x p` design against `y`,
/// returning the coefficients. Fails when the scaled normal matrix is
/// singular or its condition number exceeds `max_condition`.
pub(crate) fn solve_least_squares<T: Real>(
    mut cols: Vec<Vec<T>>,
    y: &[T],
    max_condition: T,
) -> Result<Vec<T>> {
    let p = cols.len();
    let n = y.len();
    if n < p {
        return Err(Error::DegenerateDesign(format!(
            "{n} observations for {p} linear unknowns"
        )));
    }
    let mut scale = Vec::with_capacity(p);
    for col in cols.iter_mut() {
        let norm = col.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::DegenerateDesign("zero or non-finite basis column".into()));
        }
        col.iter_mut().for_each(|v| *v = *v / norm);
        scale.push(norm);
    }

    // Condition of the scaled normal matrix (unit diagonal).
    let mut gram = vec![T::zero(); p * p];
    for i in 0..p {
        for j in i..p {
            let g: T = cols[i].iter().zip(&cols[j]).map(|(a, b)| *a * *b).sum();
            gram[i * p + j] = g;
            gram[j * p + i] = g;
        }
    }
    let eig = symmetric_eigenvalues(gram, p);
    let hi = eig.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = eig.iter().copied().fold(T::infinity(), T::min);
    if !(lo > T::zero()) || hi / lo > max_condition {
        return Err(Error::DegenerateDesign(format!(
            "normal matrix condition number {:.3e}",
            (hi / lo).as_f64()
        )));
    }

    // Householder QR, applying the reflections to a copy of y.
    let mut rhs = y.to_vec();
    for k in 0..p {
        let norm = cols[k][k..].iter().map(|v| *v * *v).sum::<T>().sqrt();
        let alpha = if cols[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = cols[k][k..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|x| *x * *x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for col in cols.iter_mut().skip(k) {
            let dot: T = v.iter().zip(&col[k..]).map(|(a, b)| *a * *b).sum();
            let f = two * dot / vnorm2;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c = *c - f * *vi;
            }
        }
        let dot: T = v.iter().zip(&rhs[k..]).map(|(a, b)| *a * *b).sum();
        let f = two * dot / vnorm2;
        for (r, vi) in rhs[k..].iter_mut().zip(&v) {
            *r = *r - f * *vi;
        }
    }
    let mut beta = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..p {
            acc = acc - cols[j][i] * beta[j];
        }
        beta[i] = acc / cols[i][i];
    }
    Ok(beta.into_iter().zip(scale).map(|(b, s)| b / s).collect())
}

/// Solves the linear parameters for fixed nonlinear ones and reports the
/// resulting root-mean-square residual.
pub fn slave_linear_params<T: Real>(
    kind: ModelKind,
    nl: &Nonlinear<T>,
    data: &[(T, T)],
    harmonics: usize,
    max_condition: T,
) -> Result<LinearFit<T>> {
    let p = linear_dim(kind, harmonics);
    let n = data.len();
    if n < p {
        return Err(Error::DegenerateDesign(format!(
            "{n} observations for {p} linear unknowns"
        )));
    }
    let mut cols = vec![Vec::with_capacity(n); p];
    let mut row = vec![T::zero(); p];
    let mut y = Vec::with_capacity(n);
    for &(t, yi) in data {
        fill_row(kind, nl, harmonics, t, &mut row)?;
        for (col, v) in cols.iter_mut().zip(&row) {
            col.push(*v);
        }
        y.push(yi);
    }
    let unscaled = cols.clone();
    let coeffs = solve_least_squares(cols, &y, max_condition)?;
    let mut ss = T::zero();
    for i in 0..n {
        let fitted: T = unscaled.iter().zip(&coeffs).map(|(col, c)| col[i] * *c).sum();
        let r = y[i] - fitted;
        ss = ss + r * r;
    }
    let rmse = (ss / T::from_usize(n).unwrap()).sqrt();
    Ok(LinearFit {
        params: assemble(kind, nl, &coeffs),
        coeffs,
        rmse,
    })
}
