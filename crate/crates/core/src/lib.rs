//! Hybrid wavelet forecasting toolkit.
//!
//! Decomposes a weekly price series with a Haar MODWT, predicts each
//! component with either a resilient-propagation neural network or an
//! epsilon-insensitive support vector regressor, aggregates the component
//! forecasts into 1-step-ahead price forecasts, scores them (RMSE,
//! directional accuracy, Wilcoxon signed-rank comparison) and evaluates
//! rule-based trading on the predictions.
//!
//! All numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the common double-precision instantiation.

pub mod error;
pub mod learners;
pub mod modwt;
pub mod scalar;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision price series.
pub type PriceSeries64 = series::PriceSeries<f64>;
/// Double-precision subseries.
pub type Subseries64 = series::Subseries<f64>;
/// Double-precision decomposition.
pub type WaveletDecomposition64 = modwt::WaveletDecomposition<f64>;
