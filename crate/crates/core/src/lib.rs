//! Nonparametric deconvolution estimation of the log-volatility density in
//! ARCH-type models.

pub mod dependence;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod noise;
pub mod processes;
pub mod projection;
pub mod quadrature;
pub mod rates;
pub mod selection;
pub mod special;
pub mod spectral;

pub use error::{DeconvError, Result};
pub use estimator::{estimate_coefficients, estimate_density, log_square_transform, DeconvEstimate, Sample, SpectralEstimator};
pub use noise::{NoiseModel, SmoothnessParams};
pub use projection::{CoefficientVector, ModelIndex};
