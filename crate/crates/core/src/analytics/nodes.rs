//! Inverse transforms evaluated once at the quadrature nodes.

use super::{moment_bounds, MomentBounds};
use crate::complex::ComplexValue;
use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum, pairwise_sum_complex, GaussianRule};
use crate::smiles::SmileSlice;
use crate::transforms::{normalized_point, InterpolationWeight, InversionConfig, NormalizedPoint};

/// A smile paired with a quadrature rule, holding `g₁`, `g₂` and the smile
/// derivatives at every node so that many moments can share the inversions.
#[derive(Debug, Clone)]
pub struct SmileNodes {
    pub(crate) slice: SmileSlice,
    pub(crate) rule: GaussianRule,
    pub(crate) cfg: InversionConfig,
    pub(crate) g1: Vec<NormalizedPoint>,
    pub(crate) g2: Vec<NormalizedPoint>,
    pub(crate) bounds: MomentBounds,
}

impl SmileNodes {
    pub fn new(slice: &SmileSlice, rule: &GaussianRule) -> Result<Self> {
        Self::with_config(slice, rule, InversionConfig::default())
    }

    pub fn with_config(slice: &SmileSlice, rule: &GaussianRule, cfg: InversionConfig) -> Result<Self> {
        let w1 = InterpolationWeight::standard(1.0)?;
        let w0 = InterpolationWeight::standard(0.0)?;
        let g1 = invert_all(slice, rule, w1, &cfg)?;
        let g2 = invert_all(slice, rule, w0, &cfg)?;
        Ok(Self { slice: *slice, rule: rule.clone(), cfg, g1, g2, bounds: moment_bounds(slice) })
    }

    pub fn slice(&self) -> &SmileSlice {
        &self.slice
    }

    pub fn rule(&self) -> &GaussianRule {
        &self.rule
    }

    pub fn order(&self) -> usize {
        self.rule.order
    }

    pub fn bounds(&self) -> MomentBounds {
        self.bounds
    }

    pub(crate) fn check_strip(&self, re: f64) -> Result<()> {
        if self.bounds.contains(re) {
            Ok(())
        } else {
            Err(Error::OutsideConvergenceStrip { p: re, lower: self.bounds.lower(), upper: self.bounds.upper() })
        }
    }

    /// `Σ wᵢ term(i)` with a finiteness check on every term.
    pub(crate) fn sum_complex(&self, term: impl Fn(usize) -> Result<ComplexValue>) -> Result<ComplexValue> {
        weighted_sum_complex(&self.rule, term)
    }

    pub(crate) fn sum_real(&self, term: impl Fn(usize) -> Result<f64>) -> Result<f64> {
        let mut acc = Vec::with_capacity(self.rule.order);
        for (i, &w) in self.rule.weights.iter().enumerate() {
            let t = term(i)?;
            if !t.is_finite() {
                return Err(Error::NonFiniteIntegrand { z: self.rule.nodes[i] });
            }
            acc.push(w * t);
        }
        Ok(pairwise_sum(&acc))
    }
}

pub(crate) fn invert_all(
    slice: &SmileSlice,
    rule: &GaussianRule,
    weight: InterpolationWeight,
    cfg: &InversionConfig,
) -> Result<Vec<NormalizedPoint>> {
    rule.nodes.iter().map(|&z| normalized_point(slice, weight, z, cfg)).collect()
}

pub(crate) fn weighted_sum_complex(
    rule: &GaussianRule,
    term: impl Fn(usize) -> Result<ComplexValue>,
) -> Result<ComplexValue> {
    let mut acc = Vec::with_capacity(rule.order);
    for (i, &w) in rule.weights.iter().enumerate() {
        let t = term(i)?;
        if !t.is_finite() {
            return Err(Error::NonFiniteIntegrand { z: rule.nodes[i] });
        }
        acc.push(t * w);
    }
    Ok(pairwise_sum_complex(&acc))
}
