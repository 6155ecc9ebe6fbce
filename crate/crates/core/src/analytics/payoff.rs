//! Prices of payoffs `ψ(X)` and the variance/gamma swap strikes.

use super::SmileNodes;
use crate::error::{Error, Result};
use crate::quadrature::GaussianRule;
use crate::smiles::SmileSlice;

/// An absolutely continuous payoff `ψ` of the log-return, with derivative
/// `ψ′`. `growth_order` is the caller's assertion that `ψ` and `ψ′` grow at
/// most like `e^{p k}`; it must sit inside the convergence strip.
pub struct PayoffFunction<F, G> {
    pub psi: F,
    pub psi_prime: G,
    pub growth_order: f64,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> PayoffFunction<F, G> {
    pub fn new(psi: F, psi_prime: G, growth_order: f64) -> Self {
        Self { psi, psi_prime, growth_order }
    }
}

pub type FnPayoff = PayoffFunction<fn(f64) -> f64, fn(f64) -> f64>;

/// The log contract `ψ(x) = x`.
pub fn log_payoff() -> FnPayoff {
    PayoffFunction::new(|x| x, |_| 1.0, 0.5)
}

impl SmileNodes {
    /// `E[ψ(X)] = ∫[ψ(g₂) − ψ′(g₂) + ψ′(g₁) e^{−g₁}] φ`.
    pub fn price_psi<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(&self, payoff: &PayoffFunction<F, G>) -> Result<f64> {
        self.check_strip(payoff.growth_order)?;
        self.sum_real(|i| {
            let (k1, k2) = (self.g1[i].k, self.g2[i].k);
            Ok((payoff.psi)(k2) - (payoff.psi_prime)(k2) + (payoff.psi_prime)(k1) * (-k1).exp())
        })
    }

    /// `E[(S_T/F) ψ(X)] = ∫[ψ(g₁) + ψ′(g₁) − ψ′(g₂) e^{g₂}] φ`.
    pub fn price_psi_share<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(&self, payoff: &PayoffFunction<F, G>) -> Result<f64> {
        self.check_strip(payoff.growth_order + 1.0)?;
        self.sum_real(|i| {
            let (k1, k2) = (self.g1[i].k, self.g2[i].k);
            Ok((payoff.psi)(k1) + (payoff.psi_prime)(k1) - (payoff.psi_prime)(k2) * k2.exp())
        })
    }

    /// Variance swap strike `E[−2X] = ∫ v₂² φ` in total-variance units.
    pub fn varswap_strike(&self) -> Result<f64> {
        self.sum_real(|i| Ok(self.g2[i].v * self.g2[i].v))
    }

    /// Gamma swap strike `2E[(S_T/F) X] = ∫ v₁² φ`.
    pub fn gammaswap_strike(&self) -> Result<f64> {
        self.sum_real(|i| Ok(self.g1[i].v * self.g1[i].v))
    }
}

fn nodes(slice: &SmileSlice, rule: &GaussianRule) -> Result<SmileNodes> {
    SmileNodes::new(slice, rule)
}

pub fn price_psi<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(
    slice: &SmileSlice,
    payoff: &PayoffFunction<F, G>,
    rule: &GaussianRule,
) -> Result<f64> {
    let b = super::moment_bounds(slice);
    if !b.contains(payoff.growth_order) {
        return Err(Error::OutsideConvergenceStrip { p: payoff.growth_order, lower: b.lower(), upper: b.upper() });
    }
    nodes(slice, rule)?.price_psi(payoff)
}

pub fn price_psi_share<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(
    slice: &SmileSlice,
    payoff: &PayoffFunction<F, G>,
    rule: &GaussianRule,
) -> Result<f64> {
    nodes(slice, rule)?.price_psi_share(payoff)
}

pub fn varswap_strike(slice: &SmileSlice, rule: &GaussianRule) -> Result<f64> {
    nodes(slice, rule)?.varswap_strike()
}

pub fn gammaswap_strike(slice: &SmileSlice, rule: &GaussianRule) -> Result<f64> {
    nodes(slice, rule)?.gammaswap_strike()
}
