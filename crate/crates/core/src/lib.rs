//! Risk-neutral moments, generalized characteristic functions and swap strikes
//! computed directly from an implied-volatility smile.
//!
//! The smile `k ↦ v(k)` is pushed through the normalizing transformations
//! `f₁, f₂` (and their convex interpolation `f(p,·)`), whose inverses turn
//! every expectation of a smooth payoff of `log(S_T/F)` into an integral
//! against the standard normal density. Those integrals are evaluated with
//! Gauss-Hermite quadrature.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod calibrate;
pub mod complex;
pub mod error;
pub mod fourier;
pub mod quadrature;
pub mod smiles;
pub mod special;
pub mod transforms;

pub use complex::ComplexValue;
pub use error::{Error, ErrorClass, Result};
pub use quadrature::{gauss_hermite_rule, GaussianRule};
pub use smiles::{SmileConfig, SmilePoint, SmileSlice, SsviParams};

mod serde_ext;
