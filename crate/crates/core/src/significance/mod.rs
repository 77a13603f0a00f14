//! Significance of a calibrated window: block bootstrap of residuals, Lomb
//! periodogram of the log-periodic component, and synthetic series for
//! oracle tests.

mod bootstrap;
mod lomb;
mod synth;

pub use bootstrap::{
    block_resample_residuals, block_resample_with, bootstrap_tc_distribution, replica_rng, BootstrapConfig,
    BootstrapSummary, ReplicaFit, TcQuantiles,
};
pub use lomb::{
    false_alarm_level, false_alarm_probability, logperiodicity_test, lomb_periodogram, FreqGrid, LogPeriodicityTest,
    LombSpectrum, TestOutcome, OMEGA_TOLERANCE, SIGNIFICANCE_LEVEL,
};
pub use synth::{synth_generate, synth_log_samples, NoiseKind, NoiseSpec};
