use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value at {query} lies outside the tabulated range [{lo}, {hi}]")]
    Extrapolation { query: f64, lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance {requested:e}: estimate {estimate:e} +/- {error:e}")]
    Quadrature {
        requested: f64,
        estimate: f64,
        error: f64,
    },

    #[error("asymptote extraction failed: {0}")]
    Asymptote(String),

    #[error("table build failed: {0}")]
    TableBuild(String),

    #[error("special function {function} missed accuracy target: achieved bound {bound:e}")]
    Accuracy { function: &'static str, bound: f64 },

    #[error("reflection amplitude did not settle before z = {z_max:e} (last change {change:e})")]
    Asymptotics { z_max: f64, change: f64 },

    #[error("integration quality: {0}")]
    Integration(String),

    #[error("badlands peak not covered by the grid: {0}")]
    Coverage(String),

    #[error("branch tracking failed: phase jump {jump:.3} rad between adjacent samples")]
    Sampling { jump: f64 },

    #[error("scattering-length extrapolation residual {residual:e} above threshold {threshold:e}")]
    WindowTooWide { residual: f64, threshold: f64 },

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
