//! Nelder-Mead descent on the unit box. Every trial point is clamped into
//! `[0, 1]^d` before evaluation, so vertices never leave the box.

use crate::num::Real;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SimplexOutcome<T> {
    pub point: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

fn clamp_unit<T: Real>(x: &mut [T]) {
    for v in x.iter_mut() {
        *v = v.max(T::zero()).min(T::one());
    }
}

/// `base + coef * (to - base)`, clamped.
fn blend<T: Real>(base: &[T], to: &[T], coef: f64) -> Vec<T> {
    let coef = T::lit(coef);
    let mut out: Vec<T> = base.iter().zip(to).map(|(b, t)| *b + coef * (*t - *b)).collect();
    clamp_unit(&mut out);
    out
}

/// Minimizes `f` starting from `start`, stopping once the spread of objective
/// values across the simplex falls to `tol` or after `max_iter` iterations.
pub(crate) fn minimize<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    start: &[T],
    step: T,
    max_iter: usize,
    tol: T,
) -> SimplexOutcome<T> {
    let d = start.len();
    let mut x0 = start.to_vec();
    clamp_unit(&mut x0);
    let f0 = f(&x0);
    if max_iter == 0 {
        return SimplexOutcome {
            point: x0,
            value: f0,
            iterations: 0,
            converged: false,
        };
    }

    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(d + 1);
    simplex.push((x0.clone(), f0));
    for i in 0..d {
        let mut v = x0.clone();
        v[i] = if v[i] + step <= T::one() { v[i] + step } else { v[i] - step };
        let fv = f(&v);
        simplex.push((v, fv));
    }

    let order = |s: &mut Vec<(Vec<T>, T)>| {
        // NaN sorts last; stable so ties keep insertion order
        s.sort_by(|a, b| {
            let (fa, fb) = (a.1, b.1);
            fa.partial_cmp(&fb).unwrap_or_else(|| fa.is_nan().cmp(&fb.is_nan()))
        });
    };

    let mut iterations = 0;
    let mut converged = false;
    order(&mut simplex);
    while iterations < max_iter {
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if worst - best <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        let inv = T::one() / T::from_usize(d).unwrap();
        let mut centroid = vec![T::zero(); d];
        for (v, _) in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c = *c + *x * inv;
            }
        }

        let reflected = blend(&centroid, &simplex[d].0, -REFLECT);
        let fr = f(&reflected);
        if fr < best {
            let expanded = blend(&centroid, &reflected, EXPAND);
            let fe = f(&expanded);
            simplex[d] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < worst {
                let c = blend(&centroid, &reflected, CONTRACT);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = blend(&centroid, &simplex[d].0, CONTRACT);
                let fc = f(&c);
                (c, fc)
            };
            if fc < worst.min(fr) {
                simplex[d] = (contracted, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let v = blend(&anchor, &vertex.0, SHRINK);
                    let fv = f(&v);
                    *vertex = (v, fv);
                }
            }
        }
        order(&mut simplex);
    }

    let (point, value) = simplex.swap_remove(0);
    SimplexOutcome {
        point,
        value,
        iterations,
        converged,
    }
}
