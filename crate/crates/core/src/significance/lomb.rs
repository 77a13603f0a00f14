//! Lomb normalized periodogram and the log-periodicity test built on it.

use serde::{Deserialize, Serialize};

use crate::calibrate::{fit_power_law, Bounds, FitResult, PowerLawFit};
use crate::error::{Error, Result};
use crate::num::{mean, Real};

/// Test passes only below this false-alarm probability.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;
/// Maximum distance between spectral peak and fitted `omega`.
pub const OMEGA_TOLERANCE: f64 = 2.0;

/// Evenly spaced angular frequencies `min, min + step, ..., max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqGrid<T> {
    pub min: T,
    pub max: T,
    pub step: T,
}

impl<T: Real> Default for FreqGrid<T> {
    fn default() -> Self {
        Self {
            min: T::lit(2.0),
            max: T::lit(20.0),
            step: T::lit(0.05),
        }
    }
}

impl<T: Real> FreqGrid<T> {
    pub fn values(&self) -> Result<Vec<T>> {
        if !(self.step > T::zero()) || !(self.max >= self.min) || !(self.min > T::zero()) {
            return Err(Error::InvalidConfig("frequency grid needs 0 < min <= max and step > 0".into()));
        }
        let n = ((self.max - self.min) / self.step + T::lit(1e-9)).floor().to_usize().unwrap() + 1;
        Ok((0..n).map(|i| self.min + T::from_usize(i).unwrap() * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LombSpectrum<T> {
    pub freqs: Vec<T>,
    /// Power normalized by the sample variance; exponential(1) under a
    /// white-noise null.
    pub power: Vec<T>,
    /// `(omega, power)` at the maximum.
    pub peak: (T, T),
    pub n_samples: usize,
    /// `y` had zero variance; every power is zero.
    pub degenerate: bool,
}

impl<T: Real> LombSpectrum<T> {
    /// False-alarm probability of the peak with one independent frequency
    /// per sample.
    pub fn peak_false_alarm(&self) -> T {
        false_alarm_probability(self.peak.1, self.n_samples)
    }
}

/// Probability that the largest of `n_independent` exponential(1) powers
/// exceeds `z`: `1 - (1 - e^-z)^M`.
pub fn false_alarm_probability<T: Real>(z: T, n_independent: usize) -> T {
    let m = T::from_usize(n_independent.max(1)).unwrap();
    -(m * (-(-z).exp()).ln_1p()).exp_m1()
}

/// Power level whose false-alarm probability is `p`.
pub fn false_alarm_level<T: Real>(p: T, n_independent: usize) -> T {
    let m = T::from_usize(n_independent.max(1)).unwrap();
    -(-((-p).ln_1p() / m).exp_m1()).ln()
}

/// Lomb periodogram of unevenly sampled `(x, y)` at angular frequencies
/// `freqs`.
pub fn lomb_periodogram<T: Real>(samples: &[(T, T)], freqs: &[T]) -> Result<LombSpectrum<T>> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!("Lomb periodogram needs at least 4 samples, got {n}")));
    }
    if freqs.is_empty() {
        return Err(Error::InvalidInput("empty frequency grid".into()));
    }
    let mut xs: Vec<T> = samples.iter().map(|s| s.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite x"));
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("Lomb periodogram needs distinct x values".into()));
    }

    let ys: Vec<T> = samples.iter().map(|s| s.1).collect();
    let ybar = mean(&ys);
    let dev: Vec<T> = ys.iter().map(|y| *y - ybar).collect();
    let var = dev.iter().map(|d| *d * *d).sum::<T>() / T::from_usize(n - 1).unwrap();
    let scale = var * T::lit(2.0);
    let magnitude = ys.iter().fold(T::zero(), |acc, y| acc.max(y.abs()));
    if !(var.sqrt() > T::lit(1e3) * T::epsilon() * magnitude) {
        return Ok(LombSpectrum {
            freqs: freqs.to_vec(),
            power: vec![T::zero(); freqs.len()],
            peak: (freqs[0], T::zero()),
            n_samples: n,
            degenerate: true,
        });
    }

    let power: Vec<T> = freqs
        .iter()
        .map(|&w| {
            let two_w = w + w;
            let (mut s2, mut c2) = (T::zero(), T::zero());
            for (x, _) in samples {
                let (s, c) = (two_w * *x).sin_cos();
                s2 = s2 + s;
                c2 = c2 + c;
            }
            let offset = s2.atan2(c2) / two_w;
            let (mut yc, mut ys, mut cc, mut ss) = (T::zero(), T::zero(), T::zero(), T::zero());
            for ((x, _), d) in samples.iter().zip(&dev) {
                let (s, c) = (w * (*x - offset)).sin_cos();
                yc = yc + *d * c;
                ys = ys + *d * s;
                cc = cc + c * c;
                ss = ss + s * s;
            }
            let mut p = T::zero();
            if cc > T::zero() {
                p = p + yc * yc / cc;
            }
            if ss > T::zero() {
                p = p + ys * ys / ss;
            }
            p / scale
        })
        .collect();

    let (mut best, mut best_power) = (0, power[0]);
    for (i, p) in power.iter().enumerate() {
        if *p > best_power {
            best = i;
            best_power = *p;
        }
    }
    Ok(LombSpectrum {
        peak: (freqs[best], best_power),
        freqs: freqs.to_vec(),
        power,
        n_samples: n,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestOutcome {
    Pass,
    Fail,
    /// The spectrum was degenerate; neither pass nor fail.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPeriodicityTest<T> {
    pub outcome: TestOutcome,
    pub peak_omega: T,
    pub peak_power: T,
    pub p_value: T,
    pub fitted_omega: T,
    pub power_law: PowerLawFit<T>,
    pub spectrum: LombSpectrum<T>,
}

/// Fits a pure power law (free `tc` and `m`) and looks for a Lomb peak in
/// its residuals as a function of `ln(tc - t)`, with `tc` taken from the
/// log-periodic fit.
///
/// Passes when the peak's false-alarm probability (one independent frequency
/// per sample) is below [`SIGNIFICANCE_LEVEL`] and the peak lies within
/// [`OMEGA_TOLERANCE`] of the fitted `omega`.
pub fn logperiodicity_test<T: Real>(fit: &FitResult<T>, data: &[(T, T)], freqs: &FreqGrid<T>) -> Result<LogPeriodicityTest<T>> {
    if !fit.converged {
        return Err(Error::InvalidInput("log-periodicity test needs a converged fit".into()));
    }
    let mut search = Bounds::<T>::search();
    search.tc_offset.hi = search.tc_offset.hi.max(fit.tc() - fit.t_last);
    let power_law = fit_power_law(data, &search, 2000, T::lit(1e-12).max(T::lit(100.0) * T::epsilon()))?;
    let tc = fit.tc();
    let magnitude = data.iter().fold(T::zero(), |acc, d| acc.max(d.1.abs()));
    let exact = !(power_law.rmse > T::lit(1e3) * T::epsilon() * magnitude);
    let samples: Vec<(T, T)> = data
        .iter()
        .map(|(t, y)| {
            let r = if exact { T::zero() } else { *y - power_law.eval(*t) };
            ((tc - *t).ln(), r)
        })
        .collect();
    let spectrum = lomb_periodogram(&samples, &freqs.values()?)?;
    let fitted_omega = fit.params.omega();
    let (peak_omega, peak_power) = spectrum.peak;
    let p_value = spectrum.peak_false_alarm();
    let outcome = if spectrum.degenerate {
        TestOutcome::Undefined
    } else if p_value < T::lit(SIGNIFICANCE_LEVEL) && (peak_omega - fitted_omega).abs() <= T::lit(OMEGA_TOLERANCE) {
        TestOutcome::Pass
    } else {
        TestOutcome::Fail
    };
    Ok(LogPeriodicityTest {
        outcome,
        peak_omega,
        peak_power,
        p_value,
        fitted_omega,
        power_law,
        spectrum,
    })
}
