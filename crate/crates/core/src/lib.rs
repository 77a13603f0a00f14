//! Log-periodic power law (LPPL) diagnostics for bubble-like price regimes.
//!
//! The numerical core (models, slaved least squares, simplex refinement,
//! Lomb periodogram, bootstrap) is generic over [`num::Real`], implemented for
//! `f32` and `f64`. The aliases below fix the scalar for the common cases.

pub mod calibrate;
pub mod error;
pub mod models;
pub mod num;
mod parallel;
pub mod scanner;
pub mod significance;
pub mod supply_demand;
pub mod timeseries;

pub use error::{Error, ErrorClass, Result};
pub use models::ModelKind;
pub use num::Real;
pub use timeseries::{PricePoint, PriceSeries, TimeWindow};

pub type SimpleLpplParams = models::SimpleLpplParams<f64>;
pub type WeierstrassParams = models::WeierstrassParams<f64>;
pub type LandauParams = models::LandauParams<f64>;
pub type LpplParams = models::LpplParams<f64>;
pub type FitConfig = calibrate::FitConfig<f64>;
pub type FitResult = calibrate::FitResult<f64>;
pub type ScanConfig = scanner::ScanConfig<f64>;
pub type ScanResult = scanner::ScanResult<f64>;
pub type LombSpectrum = significance::LombSpectrum<f64>;

pub type LpplParams32 = models::LpplParams<f32>;
pub type FitConfig32 = calibrate::FitConfig<f32>;
pub type FitResult32 = calibrate::FitResult<f32>;
pub type LombSpectrum32 = significance::LombSpectrum<f32>;
