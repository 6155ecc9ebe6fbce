use thiserror::Error;

use crate::smiles::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("smile fails the no-arbitrage checks: {0}")]
    Arbitrageable(ValidationReport),

    #[error("non-positive total variance {variance} at k = {k}")]
    NonPositiveVariance { k: f64, variance: f64 },

    #[error("non-positive total volatility {vol} at k = {k}")]
    NonPositiveVol { k: f64, vol: f64 },

    #[error("could not bracket f(p={p}, k) = {z} after {doublings} expansions")]
    BracketingFailed { p: f64, z: f64, doublings: usize },

    #[error("root finder did not converge within {max_iter} iterations (p={p}, z={z})")]
    MaxIterExceeded { p: f64, z: f64, max_iter: usize },

    #[error("interpolation weight p={p} outside the certified inversion domain: {reason}")]
    WeightNotCertified { p: f64, reason: String },

    #[error("d/dk f(p={p}, k) vanishes at k = {k}")]
    DerivativeSingular { p: f64, k: f64 },

    #[error("quadrature order {0} outside [1, 512]")]
    OrderOutOfRange(usize),

    #[error("integrand is not finite at node z = {z}")]
    NonFiniteIntegrand { z: f64 },

    #[error("Re(p) = {p} outside the convergence strip ({lower}, {upper})")]
    OutsideConvergenceStrip { p: f64, lower: f64, upper: f64 },

    #[error("implied cdf {value} at k = {k} lies outside [0, 1]; the smile admits arbitrage")]
    CdfOutOfRange { k: f64, value: f64 },

    #[error("implied density {value} at k = {k} is negative; the smile admits butterfly arbitrage")]
    NegativeDensity { k: f64, value: f64 },

    #[error("damping abscissa alpha = {0} sits on a pole of the inversion kernel")]
    AlphaOnPole(f64),

    #[error("damping abscissa alpha = {alpha} outside the admissible strip ({lower}, {upper})")]
    AlphaOutOfStrip { alpha: f64, lower: f64, upper: f64 },

    #[error("Fourier integrand magnitude {magnitude:e} at u = {u} exceeds the tail tolerance {tol:e}")]
    TruncationInsufficient { u: f64, magnitude: f64, tol: f64 },

    #[error("Fourier put price {0:e} is negative beyond tolerance")]
    NegativePrice(f64),

    #[error("at least 3 quotes with distinct strikes are required, got {0}")]
    InsufficientQuotes(usize),

    #[error("calibration hit the iteration cap {iterations} with rmse {rmse:e}")]
    CalibrationDiverged { iterations: usize, rmse: f64 },
}

/// Coarse classification used by front ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or arbitrageable input smile, or malformed parameters.
    InvalidInput,
    /// A requested order lies outside the convergence strip.
    OutsideStrip,
    /// Bracketing, convergence or truncation failure.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidParameter(_)
            | Arbitrageable(_)
            | NonPositiveVariance { .. }
            | NonPositiveVol { .. }
            | CdfOutOfRange { .. }
            | NegativeDensity { .. }
            | InsufficientQuotes(_)
            | OrderOutOfRange(_) => ErrorClass::InvalidInput,
            OutsideConvergenceStrip { .. } | AlphaOutOfStrip { .. } | AlphaOnPole(_) | WeightNotCertified { .. } => {
                ErrorClass::OutsideStrip
            }
            BracketingFailed { .. }
            | MaxIterExceeded { .. }
            | DerivativeSingular { .. }
            | NonFiniteIntegrand { .. }
            | TruncationInsufficient { .. }
            | NegativePrice(_)
            | CalibrationDiverged { .. } => ErrorClass::Numerical,
        }
    }
}
