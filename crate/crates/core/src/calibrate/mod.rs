//! Window calibration: grid multistart over the nonlinear parameters with the
//! linear ones slaved, simplex refinement of the best seeds, and
//! qualification of the result against parameter bounds.

mod power_law;
mod simplex;
mod slaving;

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use power_law::{fit_power_law, PowerLawFit};
pub use slaving::{
    assemble, default_max_condition, linear_dim, nonlinear_dim, slave_linear_params, LinearFit, Nonlinear,
};

use crate::error::{Error, Result};
use crate::models::{residuals, LpplParams, ModelKind};
use crate::num::Real;
use crate::timeseries::{self, PriceSeries, TimeWindow, DAYS_PER_YEAR, DEFAULT_MIN_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn width(&self) -> T {
        self.hi - self.lo
    }

    fn at(&self, u: T) -> T {
        self.lo + u * self.width()
    }

    fn unit(&self, x: T) -> T {
        if self.width() > T::zero() {
            ((x - self.lo) / self.width()).max(T::zero()).min(T::one())
        } else {
            T::zero()
        }
    }
}

/// Parameter box. `tc_offset` is measured in decimal years after the last
/// observation of the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds<T> {
    pub tc_offset: Interval<T>,
    pub m: Interval<T>,
    pub omega: Interval<T>,
    pub delta_t: Interval<T>,
    pub delta_omega: Interval<T>,
}

impl<T: Real> Bounds<T> {
    /// Acceptance box for a calibrated window: `m` in `[0.1, 0.9]`, `omega` in
    /// `[4, 15]`, `tc` in `(t_last, t_last + 1y]`.
    pub fn qualification() -> Self {
        Self {
            tc_offset: Interval::new(T::zero(), T::one()),
            m: Interval::new(T::lit(0.1), T::lit(0.9)),
            omega: Interval::new(T::lit(4.0), T::lit(15.0)),
            delta_t: Interval::new(T::lit(0.05), T::lit(20.0)),
            delta_omega: Interval::new(T::lit(-10.0), T::lit(10.0)),
        }
    }

    /// Region explored by the grid and the simplex. Wider than
    /// [`Bounds::qualification`] so that a window without a bubble signature
    /// ends up outside the acceptance box instead of pinned on its edge.
    pub fn search() -> Self {
        Self {
            tc_offset: Interval::new(T::lit(1.0 / DAYS_PER_YEAR), T::lit(1.5)),
            m: Interval::new(T::lit(0.01), T::lit(0.99)),
            omega: Interval::new(T::lit(2.0), T::lit(20.0)),
            delta_t: Interval::new(T::lit(0.1), T::lit(10.0)),
            delta_omega: Interval::new(T::lit(-4.0), T::lit(4.0)),
        }
    }

    fn intervals(&self, kind: ModelKind) -> Vec<Interval<T>> {
        let mut v = vec![self.tc_offset, self.m, self.omega];
        if kind == ModelKind::Landau {
            v.extend([self.delta_t, self.delta_omega]);
        }
        v
    }

    fn validate(&self, what: &str) -> Result<()> {
        for (name, iv) in [
            ("tc_offset", self.tc_offset),
            ("m", self.m),
            ("omega", self.omega),
            ("delta_t", self.delta_t),
            ("delta_omega", self.delta_omega),
        ] {
            if !(iv.lo <= iv.hi) {
                return Err(Error::InvalidConfig(format!("{what} bound `{name}` is empty")));
            }
        }
        if !(self.delta_t.lo > T::zero()) {
            return Err(Error::InvalidConfig(format!("{what} bound `delta_t` must be positive")));
        }
        Ok(())
    }
}

/// Multistart grid sizes. `delta_t` is log-spaced; the rest are linear and
/// include both interval ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub tc: usize,
    pub m: usize,
    pub omega: usize,
    pub delta_t: usize,
    pub delta_omega: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            tc: 20,
            m: 8,
            omega: 12,
            delta_t: 5,
            delta_omega: 5,
        }
    }
}

impl GridSpec {
    pub fn size(&self, kind: ModelKind) -> usize {
        let base = self.tc * self.m * self.omega;
        match kind {
            ModelKind::Landau => base * self.delta_t * self.delta_omega,
            _ => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig<T> {
    /// Acceptance box used by [`qualify_fit`].
    pub bounds: Bounds<T>,
    /// Box explored by grid and simplex.
    pub search: Bounds<T>,
    pub grid: GridSpec,
    /// Seeds handed from the grid to the simplex.
    pub top_k: usize,
    pub max_iter: usize,
    /// Stop once the simplex objective spread is at most `tol`.
    pub tol: T,
    pub min_points: usize,
    /// Weierstrass harmonic count.
    pub harmonics: usize,
    pub max_condition: T,
}

impl<T: Real> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            bounds: Bounds::qualification(),
            search: Bounds::search(),
            grid: GridSpec::default(),
            top_k: 10,
            max_iter: 2000,
            tol: T::lit(1e-9).max(T::lit(100.0) * T::epsilon()),
            min_points: DEFAULT_MIN_POINTS,
            harmonics: 3,
            max_condition: default_max_condition(),
        }
    }
}

impl<T: Real> FitConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.bounds.validate("qualification")?;
        self.search.validate("search")?;
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.harmonics == 0 {
            return Err(Error::InvalidConfig("harmonics must be at least 1".into()));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidConfig("top_k must be at least 1".into()));
        }
        let g = self.grid;
        if [g.tc, g.m, g.omega, g.delta_t, g.delta_omega].contains(&0) {
            return Err(Error::InvalidConfig("grid sizes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why a calibrated window was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    NotConverged,
    MOutOfBounds,
    OmegaOutOfBounds,
    TcNotAfterLast,
    TcTooFar,
    OscillationTooLarge,
    DegeneratePowerLaw,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::NotConverged => "not converged",
            Rejection::MOutOfBounds => "m out of bounds",
            Rejection::OmegaOutOfBounds => "omega out of bounds",
            Rejection::TcNotAfterLast => "tc not after last observation",
            Rejection::TcTooFar => "tc too far",
            Rejection::OscillationTooLarge => "|C| >= 1",
            Rejection::DegeneratePowerLaw => "degenerate power law (B = 0)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qualification {
    pub qualified: bool,
    pub reasons: Vec<Rejection>,
    /// `B < 0`, i.e. log price accelerating upwards. Recorded, not required.
    pub super_exponential: bool,
}

/// Outcome of calibrating one window. Times are decimal years from `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub params: LpplParams<T>,
    pub rmse: T,
    pub n_points: usize,
    pub converged: bool,
    pub qualified: bool,
    pub reasons: Vec<Rejection>,
    pub super_exponential: bool,
    pub iterations: usize,
    /// Time of the last observation.
    pub t_last: T,
    /// Date at `t = 0`, when the fit came from dated observations.
    pub origin: Option<NaiveDate>,
    pub window: Option<TimeWindow>,
}

impl<T: Real> FitResult<T> {
    pub fn tc(&self) -> T {
        self.params.tc()
    }

    /// Critical time as a calendar date, if the fit is dated.
    pub fn tc_date(&self) -> Option<NaiveDate> {
        self.origin.map(|o| timeseries::date_after(o, self.tc().as_f64()))
    }

    /// Critical time in calendar decimal years (e.g. 2008.5), if dated.
    pub fn tc_decimal_year(&self) -> Option<f64> {
        self.origin
            .map(|o| timeseries::decimal_year(o) + self.tc().as_f64())
    }

    fn apply(&mut self, q: Qualification) {
        self.qualified = q.qualified;
        self.reasons = q.reasons;
        self.super_exponential = q.super_exponential;
    }
}

/// `sqrt(mean(residual^2))` of log price.
pub fn objective_rmse<T: Real>(params: &LpplParams<T>, data: &[(T, T)]) -> Result<T> {
    if data.is_empty() {
        return Err(Error::InsufficientData { found: 0, required: 1 });
    }
    let r = residuals(params, data)?;
    let ss: T = r.iter().map(|v| *v * *v).sum();
    Ok((ss / T::from_usize(r.len()).unwrap()).sqrt())
}

fn last_time<T: Real>(data: &[(T, T)]) -> T {
    data.iter().map(|d| d.0).fold(T::neg_infinity(), T::max)
}

fn axis<T: Real>(iv: Interval<T>, n: usize, log: bool) -> Vec<T> {
    if n == 1 {
        return vec![if log { (iv.lo * iv.hi).sqrt() } else { iv.at(T::lit(0.5)) }];
    }
    (0..n)
        .map(|i| {
            let u = T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap();
            if log {
                (iv.lo.ln() + u * (iv.hi.ln() - iv.lo.ln())).exp()
            } else {
                iv.at(u)
            }
        })
        .collect()
}

/// A grid point and the rmse of its slaved linear solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate<T> {
    pub nonlinear: Nonlinear<T>,
    pub rmse: T,
}

/// Evaluates the slaved rmse on every grid point and returns the best
/// `top_k`, ascending. Grid order is `tc`, `m`, `omega`(, `delta_t`,
/// `delta_omega`) with the last index varying fastest; equal rmse values keep
/// that order.
pub fn grid_multistart<T: Real>(data: &[(T, T)], config: &FitConfig<T>, kind: ModelKind) -> Result<Vec<Candidate<T>>> {
    if data.len() < config.min_points {
        return Err(Error::InsufficientData {
            found: data.len(),
            required: config.min_points,
        });
    }
    let t_last = last_time(data);
    let s = &config.search;
    let g = &config.grid;
    let tcs: Vec<T> = axis(s.tc_offset, g.tc, false).into_iter().map(|o| t_last + o).collect();
    let ms = axis(s.m, g.m, false);
    let omegas = axis(s.omega, g.omega, false);
    let (dts, dws) = if kind == ModelKind::Landau {
        (axis(s.delta_t, g.delta_t, true), axis(s.delta_omega, g.delta_omega, false))
    } else {
        (vec![T::one()], vec![T::zero()])
    };

    let mut candidates = Vec::with_capacity(g.size(kind));
    for &tc in &tcs {
        for &m in &ms {
            for &omega in &omegas {
                for &dt in &dts {
                    for &dw in &dws {
                        let nl = Nonlinear::new(tc, m, omega).with_crossover(dt, dw);
                        if let Ok(fit) = slave_linear_params(kind, &nl, data, config.harmonics, config.max_condition) {
                            if fit.rmse.is_finite() {
                                candidates.push(Candidate { nonlinear: nl, rmse: fit.rmse });
                            }
                        }
                    }
                }
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::NoCandidate);
    }
    candidates.sort_by(|a, b| a.rmse.partial_cmp(&b.rmse).expect("finite rmse"));
    candidates.truncate(config.top_k);
    Ok(candidates)
}

/// Simplex refinement of one seed with the linear parameters re-slaved at
/// every evaluation. The result is qualified against `config.bounds`.
pub fn local_refine<T: Real>(seed: &Nonlinear<T>, data: &[(T, T)], config: &FitConfig<T>, kind: ModelKind) -> Result<FitResult<T>> {
    if data.is_empty() {
        return Err(Error::InsufficientData { found: 0, required: config.min_points });
    }
    let t_last = last_time(data);
    let mut boxes = config.search.intervals(kind);
    boxes[0] = Interval::new(t_last + boxes[0].lo, t_last + boxes[0].hi);

    let to_params = |u: &[T]| -> Nonlinear<T> {
        let v: Vec<T> = boxes.iter().zip(u).map(|(iv, x)| iv.at(*x)).collect();
        Nonlinear::from_slice(kind, &v)
    };
    let objective = |u: &[T]| -> T {
        slave_linear_params(kind, &to_params(u), data, config.harmonics, config.max_condition)
            .map(|f| f.rmse)
            .ok()
            .filter(|r| r.is_finite())
            .unwrap_or(T::infinity())
    };
    let start: Vec<T> = boxes
        .iter()
        .zip(seed.to_vec(kind))
        .map(|(iv, x)| iv.unit(x))
        .collect();
    let out = simplex::minimize(objective, &start, T::lit(0.05), config.max_iter, config.tol);

    let best = to_params(&out.point);
    let linear = slave_linear_params(kind, &best, data, config.harmonics, config.max_condition)?;
    let mut result = FitResult {
        params: linear.params,
        rmse: linear.rmse,
        n_points: data.len(),
        converged: out.converged,
        qualified: false,
        reasons: Vec::new(),
        super_exponential: false,
        iterations: out.iterations,
        t_last,
        origin: None,
        window: None,
    };
    let q = qualify_fit(&result, &config.bounds);
    result.apply(q);
    Ok(result)
}

/// Checks a calibrated window against the acceptance box.
pub fn qualify_fit<T: Real>(result: &FitResult<T>, bounds: &Bounds<T>) -> Qualification {
    let p = &result.params;
    let mut reasons = Vec::new();
    if !result.converged {
        reasons.push(Rejection::NotConverged);
    }
    if !bounds.m.contains(p.m()) {
        reasons.push(Rejection::MOutOfBounds);
    }
    if !bounds.omega.contains(p.omega()) {
        reasons.push(Rejection::OmegaOutOfBounds);
    }
    let offset = p.tc() - result.t_last;
    if !(offset > bounds.tc_offset.lo) {
        reasons.push(Rejection::TcNotAfterLast);
    } else if offset > bounds.tc_offset.hi {
        reasons.push(Rejection::TcTooFar);
    }
    let degenerate = !(p.b().abs() > T::epsilon().sqrt() * p.a().abs().max(T::one()));
    if degenerate {
        reasons.push(Rejection::DegeneratePowerLaw);
    } else if !(p.relative_oscillation() < T::one()) {
        reasons.push(Rejection::OscillationTooLarge);
    }
    Qualification {
        qualified: reasons.is_empty(),
        reasons,
        super_exponential: p.b() < T::zero(),
    }
}

/// Calibrates one variant on `(t, ln p)` samples: grid multistart, simplex
/// refinement of the best seeds, then the lowest-rmse qualified result (or the
/// lowest-rmse result when none qualifies).
pub fn fit_samples<T: Real>(data: &[(T, T)], config: &FitConfig<T>, kind: ModelKind) -> Result<FitResult<T>> {
    config.validate()?;
    let seeds = grid_multistart(data, config, kind)?;
    let mut best_any: Option<FitResult<T>> = None;
    let mut best_qualified: Option<FitResult<T>> = None;
    for seed in &seeds {
        let Ok(fit) = local_refine(&seed.nonlinear, data, config, kind) else {
            continue;
        };
        let better = |cur: &Option<FitResult<T>>| cur.as_ref().is_none_or(|c| fit.rmse < c.rmse);
        if fit.qualified && better(&best_qualified) {
            best_qualified = Some(fit.clone());
        }
        if better(&best_any) {
            best_any = Some(fit);
        }
    }
    best_qualified.or(best_any).ok_or(Error::NoCandidate)
}

/// Slices `series` to `window`, moves to log price and calibrates.
pub fn fit_window<T: Real>(
    series: &PriceSeries,
    window: &TimeWindow,
    config: &FitConfig<T>,
    kind: ModelKind,
) -> Result<FitResult<T>> {
    let slice = timeseries::slice_window(series, window, config.min_points)?;
    let data = log_samples(&slice);
    let mut fit = fit_samples(&data, config, kind)?;
    fit.origin = Some(slice.first_date());
    fit.window = Some(*window);
    Ok(fit)
}

/// [`timeseries::to_log_price`] converted to `T`.
pub fn log_samples<T: Real>(series: &PriceSeries) -> Vec<(T, T)> {
    timeseries::to_log_price(series)
        .into_iter()
        .map(|(t, y)| (T::lit(t), T::lit(y)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SimpleLpplParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn truth() -> SimpleLpplParams<f64> {
        SimpleLpplParams { tc: 2.2, m: 0.5, omega: 7.0, phi: 0.5, a: 5.0, b: -1.0, c: 0.05 }
    }

    fn synth(p: &LpplParams<f64>, n: usize, span: f64, sigma: f64, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma.max(1e-300)).unwrap();
        (0..n)
            .map(|i| {
                let t = span * i as f64 / (n - 1) as f64;
                let e = if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                (t, p.eval(t).unwrap() + e)
            })
            .collect()
    }

    fn fitted(fit: &FitResult<f64>) -> FitResult<f64> {
        FitResult {
            params: fit.params.clone(),
            ..fit.clone()
        }
    }

    #[test]
    fn objective_examples() {
        let p: LpplParams<f64> = truth().into();
        let data = synth(&p, 100, 2.0, 0.0, 0);
        assert!(objective_rmse(&p, &data).unwrap() < 1e-14);
        let c = 0.02;
        let alternating: Vec<(f64, f64)> = data
            .iter()
            .enumerate()
            .map(|(i, &(t, y))| (t, if i % 2 == 0 { y + c } else { y - c }))
            .collect();
        assert!((objective_rmse(&p, &alternating).unwrap() - c).abs() < 1e-12);
        let late = vec![(3.0, 1.0)];
        assert!(matches!(objective_rmse(&p, &late), Err(Error::Domain { .. })));
    }

    #[test]
    fn objective_agrees_with_residuals() {
        let data = synth(&truth().into(), 200, 2.0, 0.01, 3);
        for k in 0..10 {
            let p: LpplParams<f64> = SimpleLpplParams { tc: 2.1 + 0.05 * k as f64, m: 0.2 + 0.05 * k as f64, ..truth() }.into();
            let r = residuals(&p, &data).unwrap();
            let direct = (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt();
            assert!((objective_rmse(&p, &data).unwrap() - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_contains_true_cell() {
        let data = synth(&truth().into(), 500, 2.0, 0.01, 11);
        let mut config = FitConfig::<f64>::default();
        // a grid passing through the true nonlinear parameters
        config.search.tc_offset = Interval::new(0.02, 0.40);
        config.search.m = Interval::new(0.1, 0.8);
        config.search.omega = Interval::new(4.0, 9.5);
        let seeds = grid_multistart(&data, &config, ModelKind::Simple).unwrap();
        assert_eq!(seeds.len(), 10);
        assert!(seeds.windows(2).all(|w| w[0].rmse <= w[1].rmse));
        let hit = seeds.iter().any(|s| {
            (s.nonlinear.tc - 2.2).abs() < 1e-9 && (s.nonlinear.m - 0.5).abs() < 1e-9 && (s.nonlinear.omega - 7.0).abs() < 1e-9
        });
        assert!(hit, "{seeds:?}");
    }

    #[test]
    fn top_k_is_clamped_to_grid_size() {
        let data = synth(&truth().into(), 100, 2.0, 0.01, 1);
        let mut config = FitConfig::<f64>::default();
        config.grid = GridSpec { tc: 2, m: 2, omega: 3, delta_t: 1, delta_omega: 1 };
        config.top_k = 1000;
        assert_eq!(grid_multistart(&data, &config, ModelKind::Simple).unwrap().len(), 12);
    }

    #[test]
    fn ties_keep_grid_order() {
        let data: Vec<(f64, f64)> = (0..60).map(|i| (i as f64 / 59.0, 2.0)).collect();
        let mut config = FitConfig::<f64>::default();
        config.grid = GridSpec { tc: 2, m: 2, omega: 2, delta_t: 1, delta_omega: 1 };
        let seeds = grid_multistart(&data, &config, ModelKind::Simple).unwrap();
        // constant data fits every grid point exactly
        assert!(seeds.iter().all(|s| s.rmse < 1e-12));
        let again = grid_multistart(&data, &config, ModelKind::Simple).unwrap();
        assert_eq!(seeds, again);
    }

    #[test]
    fn grid_with_only_degenerate_points_has_no_candidate() {
        let data: Vec<(f64, f64)> = (0..40).map(|i| (i as f64 / 39.0, i as f64)).collect();
        let mut config = FitConfig::<f64>::default();
        config.search.omega = Interval::new(0.0, 0.0);
        config.grid.omega = 1;
        assert!(matches!(grid_multistart(&data, &config, ModelKind::Simple), Err(Error::NoCandidate)));
    }

    #[test]
    fn refine_from_truth_is_a_fixed_point() {
        let data = synth(&truth().into(), 400, 2.0, 0.0, 0);
        let config = FitConfig::<f64>::default();
        let fit = local_refine(&Nonlinear::new(2.2, 0.5, 7.0), &data, &config, ModelKind::Simple).unwrap();
        assert!(fit.converged);
        assert!(fit.rmse < 1e-8, "{}", fit.rmse);
        assert!(fit.qualified, "{:?}", fit.reasons);
    }

    #[test]
    fn zero_iterations_returns_seed_evaluation() {
        let data = synth(&truth().into(), 400, 2.0, 0.005, 2);
        let config = FitConfig::<f64> { max_iter: 0, ..Default::default() };
        let seed = Nonlinear::new(2.3, 0.55, 7.5);
        let fit = local_refine(&seed, &data, &config, ModelKind::Simple).unwrap();
        assert!(!fit.converged);
        assert!(!fit.qualified);
        assert!(fit.reasons.contains(&Rejection::NotConverged));
        assert!((fit.tc() - 2.3).abs() < 1e-12 && (fit.params.m() - 0.55).abs() < 1e-12);
        let direct = slave_linear_params(ModelKind::Simple, &seed, &data, 3, 1e12).unwrap();
        assert_eq!(fit.rmse, direct.rmse);
    }

    #[test]
    fn refinement_never_increases_rmse() {
        let data = synth(&truth().into(), 400, 2.0, 0.005, 5);
        let config = FitConfig::<f64>::default();
        for kind in ModelKind::ALL {
            let seed = Nonlinear::new(2.4, 0.3, 9.0).with_crossover(1.0, 0.0);
            let start = slave_linear_params(kind, &seed, &data, config.harmonics, config.max_condition).unwrap();
            let fit = local_refine(&seed, &data, &config, kind).unwrap();
            assert!(fit.rmse <= start.rmse, "{kind}");
        }
    }

    #[test]
    fn perturbed_start_recovers_tc() {
        let config = FitConfig::<f64>::default();
        let mut hits = 0;
        for seed in 0..100 {
            let data = synth(&truth().into(), 500, 2.0, 0.005, 100 + seed);
            let start = Nonlinear::new(2.2 * 1.1, 0.55, 7.7);
            let fit = local_refine(&start, &data, &config, ModelKind::Simple).unwrap();
            if (fit.tc() - 2.2).abs() <= 0.02 {
                hits += 1;
            }
        }
        assert!(hits >= 90, "{hits}/100");
    }

    #[test]
    fn qualification_examples() {
        let data = synth(&truth().into(), 100, 2.0, 0.0, 0);
        let base = local_refine(&Nonlinear::new(2.2, 0.5, 7.0), &data, &FitConfig::default(), ModelKind::Simple).unwrap();
        let bounds = Bounds::qualification();
        let with = |tc: f64, m: f64, omega: f64| {
            let mut f = fitted(&base);
            f.params = SimpleLpplParams { tc, m, omega, ..truth() }.into();
            qualify_fit(&f, &bounds)
        };
        let t_last = base.t_last;
        assert!(with(t_last + 0.1, 0.5, 6.36).qualified);
        let q = with(t_last + 0.1, 1.2, 6.36);
        assert!(!q.qualified && q.reasons == vec![Rejection::MOutOfBounds]);
        assert_eq!(q.reasons[0].to_string(), "m out of bounds");
        let q = with(t_last + 3.0, 0.5, 6.36);
        assert_eq!(q.reasons, vec![Rejection::TcTooFar]);
        assert_eq!(q.reasons[0].to_string(), "tc too far");
        assert_eq!(with(t_last + 0.1, 0.5, 20.0).reasons, vec![Rejection::OmegaOutOfBounds]);
        assert!(with(t_last + 0.1, 0.5, 6.36).super_exponential);
    }

    #[test]
    fn constant_prices_are_unqualified() {
        let data: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 / 250.0, 4.0)).collect();
        let fit = fit_samples(&data, &FitConfig::default(), ModelKind::Simple).unwrap();
        assert!(!fit.qualified);
        assert!(fit.reasons.contains(&Rejection::DegeneratePowerLaw), "{:?}", fit.reasons);
    }

    #[test]
    fn fit_is_deterministic() {
        let data = synth(&truth().into(), 300, 2.0, 0.005, 9);
        let config = FitConfig::<f64>::default();
        let a = fit_samples(&data, &config, ModelKind::Simple).unwrap();
        let b = fit_samples(&data, &config, ModelKind::Simple).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn insufficient_data_is_reported() {
        let data = synth(&truth().into(), 10, 2.0, 0.0, 0);
        assert!(matches!(
            fit_samples(&data, &FitConfig::default(), ModelKind::Simple),
            Err(Error::InsufficientData { found: 10, required: 30 })
        ));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let data = synth(&truth().into(), 100, 2.0, 0.0, 0);
        let mut config = FitConfig::<f64>::default();
        config.bounds.m = Interval::new(0.9, 0.1);
        assert!(matches!(fit_samples(&data, &config, ModelKind::Simple), Err(Error::InvalidConfig(_))));
        let config = FitConfig::<f64> { tol: 0.0, ..Default::default() };
        assert!(fit_samples(&data, &config, ModelKind::Simple).is_err());
    }

    #[test]
    fn single_precision_fit_recovers_tc() {
        let p: LpplParams<f32> = LpplParams::Simple(truth()).cast();
        let data: Vec<(f32, f32)> = (0..400)
            .map(|i| {
                let t = 2.0 * i as f32 / 399.0;
                (t, p.eval(t).unwrap())
            })
            .collect();
        let fit = fit_samples(&data, &FitConfig::<f32>::default(), ModelKind::Simple).unwrap();
        assert!((fit.tc() - 2.2).abs() < 0.02, "{}", fit.tc());
    }
}
