//! Pricing formulas written as Gaussian integrals over the normalized coordinate.
//!
//! Every expectation of a function of `X = log(S_T/F)` is rewritten with the
//! inverse transforms `g₁`, `g₂` (or `g(p,·)`) so that the remaining integral
//! is against `φ(z) dz` and can be done by Gauss-Hermite quadrature.

mod density;
mod moments;
mod nodes;
mod payoff;

pub use density::{implied_cdf, implied_density, implied_survival};
pub use moments::{bergomi_moment, bergomi_moment_weighted, charfn_dual, charfn_matytsin, mgf, mgf_complex, moment};
pub use nodes::SmileNodes;
pub use payoff::{gammaswap_strike, log_payoff, price_psi, price_psi_share, varswap_strike, FnPayoff, PayoffFunction};

use serde::{Deserialize, Serialize};

use crate::complex::ComplexValue;
use crate::smiles::{wing_slopes, SmileSlice};

/// `p₊(β) = ½(1/β + β/4 + 1)`, infinite for `β = 0`.
pub fn p_plus(beta: f64) -> f64 {
    if beta == 0.0 {
        f64::INFINITY
    } else {
        0.5 * (1.0 / beta + 0.25 * beta + 1.0)
    }
}

/// `p₋(β) = ½(1/β + β/4 − 1)`, infinite for `β = 0`.
pub fn p_minus(beta: f64) -> f64 {
    if beta == 0.0 {
        f64::INFINITY
    } else {
        0.5 * (1.0 / beta + 0.25 * beta - 1.0)
    }
}

/// Lower bounds `p₊(β₊) ≤ p*` and `p₋(β₋) ≤ q*` on the critical exponents.
/// Moments of order `p ∈ (−p₋, p₊)` are finite and the integral
/// representations converge there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBounds {
    #[serde(serialize_with = "crate::serde_ext::extended")]
    pub p_plus: f64,
    #[serde(serialize_with = "crate::serde_ext::extended")]
    pub p_minus: f64,
}

impl MomentBounds {
    /// Whether `re` lies in the open interval `(−p₋, p₊)`.
    pub fn contains(&self, re: f64) -> bool {
        -self.p_minus < re && re < self.p_plus
    }

    pub fn lower(&self) -> f64 {
        -self.p_minus
    }

    pub fn upper(&self) -> f64 {
        self.p_plus
    }
}

pub fn moment_bounds(slice: &SmileSlice) -> MomentBounds {
    let b = wing_slopes(slice);
    MomentBounds { p_plus: p_plus(b.beta_plus), p_minus: p_minus(b.beta_minus) }
}

/// Which integral representation produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Representation {
    /// `∫[p e^{(p−1)g₁} + (1−p) e^{p g₂}] φ`.
    Base,
    /// `∫ e^{p g₂} (1 − p v₂′) φ`.
    Matytsin,
    /// `∫ e^{(p−1) g₁} (1 + (1−p) v₁′) φ`.
    Dual,
    /// Real-line form built on `g(Re p, ·)`.
    Bergomi,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Base => "BASE",
            Self::Matytsin => "MATYTSIN",
            Self::Dual => "DUAL",
            Self::Bergomi => "BERGOMI",
        };
        f.write_str(s)
    }
}

/// One evaluated generalized moment `E[(S_T/F)^p]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub p: ComplexValue,
    pub value: ComplexValue,
    pub representation: Representation,
    pub order: usize,
    /// False whenever `Re p` lies outside the convergence strip or the value
    /// is not finite.
    pub converged: bool,
}

impl MomentReport {
    pub const CSV_HEADER: [&'static str; 6] = ["p_re", "p_im", "value_re", "value_im", "order", "converged"];

    /// Fields in [`Self::CSV_HEADER`] order, reals in round-trip precision.
    pub fn csv_record(&self) -> [String; 6] {
        [
            format!("{:.16e}", self.p.re),
            format!("{:.16e}", self.p.im),
            format!("{:.16e}", self.value.re),
            format!("{:.16e}", self.value.im),
            self.order.to_string(),
            self.converged.to_string(),
        ]
    }
}
