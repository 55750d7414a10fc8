//! Random-matrix analysis of the lossy scheme: the Marchenko-Pastur law,
//! the asymptotic error predictor and its Monte Carlo check.

pub mod law;
pub mod monte_carlo;
pub mod predict;
pub mod quadrature;
pub mod spectrum;

pub use law::{Moment, MpLaw, Quantile};
pub use monte_carlo::{
    monte_carlo, monte_carlo_sweep, sample_demand, Ensemble, MonteCarloConfig, MonteCarloResult,
};
pub use predict::{
    predicted_error, predicted_error_normalized, tile_error_expectation, ErrorPrediction,
};
pub use quadrature::{adaptive_simpson, Quadrature};
pub use spectrum::{ks_distance, wishart_spectrum};
