//! Spectral analysis and maximum-likelihood estimation of the label coupling.

mod mle;
mod spectrum;

pub use mle::{fit_uncertainty, marginal_uncertainty, mle_fit, model, FitDiagnostics, MleFit, MleOptions};
pub use spectrum::{
    peak_ratio, power_spectrum, snr, snr_with_scale, spectrum, Spectrum, SpectrumScale, DEFAULT_ZERO_PAD,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("time grid is not uniform at index {index}")]
    NonUniformGrid { index: usize },
    #[error("need at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("traces or spectra do not share a grid")]
    GridMismatch,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("zero-pad factor must be at least 1")]
    InvalidZeroPad,
    #[error("standard error at point {index} is not positive")]
    NonPositiveStderr { index: usize },
    #[error("optimizer failed to converge from {starts} starts (best −log L = {best})")]
    NoConvergence { starts: usize, best: f64 },
    #[error("log-likelihood curvature along {param} is not negative ({curvature:e})")]
    Degenerate { param: &'static str, curvature: f64 },
}
