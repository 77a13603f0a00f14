//! Circular block bootstrap of fit residuals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibrate::{fit_samples, FitConfig, FitResult};
use crate::error::{Error, Result};
use crate::models::{residuals, ModelKind};
use crate::num::{quantile_sorted, Real};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    /// Observations per block; 21 is about one trading month.
    pub block_len: usize,
    pub n_replicas: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            block_len: 21,
            n_replicas: 200,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 || self.n_replicas == 0 {
            return Err(Error::InvalidConfig("block_len and n_replicas must be at least 1".into()));
        }
        Ok(())
    }
}

/// Generator for replica `index`: the seed picks the key and the replica
/// index picks the ChaCha stream, so draws do not depend on scheduling.
pub fn replica_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Concatenates blocks of `block_len` consecutive values (wrapping around the
/// end) taken from uniformly random offsets, truncated to the input length.
pub fn block_resample_with<T: Copy, R: Rng + ?Sized>(residuals: &[T], block_len: usize, rng: &mut R) -> Result<Vec<T>> {
    let n = residuals.len();
    if block_len == 0 || n < block_len {
        return Err(Error::InvalidInput(format!(
            "block length {block_len} needs at least that many residuals, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let start = rng.random_range(0..n);
        let take = block_len.min(n - out.len());
        out.extend((0..take).map(|k| residuals[(start + k) % n]));
    }
    Ok(out)
}

/// One surrogate drawn with `config.seed` (replica stream 0).
pub fn block_resample_residuals<T: Copy>(residuals: &[T], config: &BootstrapConfig) -> Result<Vec<T>> {
    block_resample_with(residuals, config.block_len, &mut replica_rng(config.seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaFit<T> {
    pub index: usize,
    /// `None` when the replica could not be fitted at all.
    pub tc: Option<T>,
    pub qualified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcQuantiles {
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary<T> {
    pub replicas: Vec<ReplicaFit<T>>,
    pub n_qualified: usize,
    /// Over qualified replicas, in the fit's time frame.
    pub quantiles: TcQuantiles,
}

impl<T: Real> BootstrapSummary<T> {
    pub fn qualified_tcs(&self) -> Vec<T> {
        self.replicas.iter().filter(|r| r.qualified).filter_map(|r| r.tc).collect()
    }
}

/// Refits `n_replicas` surrogates `model(fit) + block-resampled residuals`
/// and summarizes the critical times of the qualified refits.
pub fn bootstrap_tc_distribution<T: Real>(
    fit: &FitResult<T>,
    data: &[(T, T)],
    config: &BootstrapConfig,
    fit_config: &FitConfig<T>,
    workers: usize,
) -> Result<BootstrapSummary<T>> {
    config.validate()?;
    if !fit.converged {
        return Err(Error::InvalidInput("bootstrap needs a converged fit".into()));
    }
    let kind: ModelKind = fit.params.kind();
    let model: Vec<T> = data.iter().map(|(t, _)| fit.params.eval(*t)).collect::<Result<_>>()?;
    let resid = residuals(&fit.params, data)?;
    if resid.len() < config.block_len {
        return Err(Error::InvalidInput(format!(
            "{} residuals shorter than block length {}",
            resid.len(),
            config.block_len
        )));
    }

    let replicas = parallel::map_indexed(config.n_replicas, workers, |index| {
        let mut rng = replica_rng(config.seed, index as u64);
        let surrogate = block_resample_with(&resid, config.block_len, &mut rng).expect("length checked");
        let sample: Vec<(T, T)> = data
            .iter()
            .zip(model.iter().zip(surrogate))
            .map(|((t, _), (m, e))| (*t, *m + e))
            .collect();
        match fit_samples(&sample, fit_config, kind) {
            Ok(refit) => ReplicaFit { index, tc: Some(refit.tc()), qualified: refit.qualified },
            Err(_) => ReplicaFit { index, tc: None, qualified: false },
        }
    })?;

    let mut tcs: Vec<f64> = replicas
        .iter()
        .filter(|r| r.qualified)
        .filter_map(|r| r.tc.map(Real::as_f64))
        .collect();
    if tcs.is_empty() {
        return Err(Error::SignificanceUndefined(format!(
            "none of {} bootstrap replicas qualified",
            config.n_replicas
        )));
    }
    tcs.sort_by(f64::total_cmp);
    Ok(BootstrapSummary {
        n_qualified: tcs.len(),
        quantiles: TcQuantiles {
            q05: quantile_sorted(&tcs, 0.05),
            q50: quantile_sorted(&tcs, 0.5),
            q95: quantile_sorted(&tcs, 0.95),
        },
        replicas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn full_length_block_is_a_rotation() {
        let r: Vec<i32> = (0..30).collect();
        for seed in 0..10 {
            let out = block_resample_residuals(&r, &BootstrapConfig { block_len: 30, n_replicas: 1, seed }).unwrap();
            let shift = out[0] as usize;
            let rotated: Vec<i32> = (0..30).map(|k| r[(shift + k) % 30]).collect();
            assert_eq!(out, rotated);
        }
    }

    #[test]
    fn unit_blocks_draw_with_replacement() {
        let r: Vec<i32> = (0..50).collect();
        let out = block_resample_residuals(&r, &BootstrapConfig { block_len: 1, n_replicas: 1, seed: 4 }).unwrap();
        assert_eq!(out.len(), 50);
        let mut distinct = out.clone();
        distinct.sort();
        distinct.dedup();
        assert!(distinct.len() < 50, "50 iid draws from 50 values almost surely repeat");
    }

    #[test]
    fn too_short_input_is_an_error() {
        let cfg = BootstrapConfig { block_len: 21, ..Default::default() };
        assert!(block_resample_residuals(&[1.0; 20], &cfg).is_err());
    }

    #[test]
    fn surrogate_means_are_unbiased() {
        let mut rng = replica_rng(99, 0);
        let r: Vec<f64> = (0..500).map(|_| rng.random::<f64>() - 0.3).collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let sd = (r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
        let replicas = 1000;
        let mut means = Vec::with_capacity(replicas);
        for i in 0..replicas {
            let s = block_resample_with(&r, 21, &mut replica_rng(5, i as u64)).unwrap();
            means.push(s.iter().sum::<f64>() / s.len() as f64);
        }
        let grand = means.iter().sum::<f64>() / replicas as f64;
        let spread = (means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (replicas - 1) as f64).sqrt();
        let se = spread / (replicas as f64).sqrt();
        assert!(spread > 0.0 && spread < sd);
        assert!((grand - mean).abs() < 3.0 * se, "{grand} vs {mean} (se {se})");
    }

    #[test]
    fn same_seed_same_surrogate() {
        let r: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let cfg = BootstrapConfig { block_len: 7, n_replicas: 1, seed: 3 };
        assert_eq!(block_resample_residuals(&r, &cfg).unwrap(), block_resample_residuals(&r, &cfg).unwrap());
        let other = BootstrapConfig { seed: 4, ..cfg };
        assert_ne!(block_resample_residuals(&r, &cfg).unwrap(), block_resample_residuals(&r, &other).unwrap());
    }

    proptest! {
        #[test]
        fn blocks_are_contiguous_runs_of_the_input(n in 1usize..200, block in 1usize..40, seed in any::<u64>()) {
            prop_assume!(block <= n);
            let r: Vec<usize> = (0..n).collect();
            let out = block_resample_with(&r, block, &mut replica_rng(seed, 0)).unwrap();
            prop_assert_eq!(out.len(), n);
            for chunk in out.chunks(block) {
                for w in chunk.windows(2) {
                    prop_assert_eq!(w[1], (w[0] + 1) % n);
                }
            }
        }
    }
}
