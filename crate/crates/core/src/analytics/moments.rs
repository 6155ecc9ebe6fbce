//! Generalized moments `E[(S_T/F)^p]` for real and complex `p`.

use super::nodes::{invert_all, weighted_sum_complex};
use super::{MomentReport, Representation, SmileNodes};
use crate::complex::ComplexValue;
use crate::error::{Error, Result};
use crate::quadrature::GaussianRule;
use crate::smiles::SmileSlice;
use crate::transforms::{InterpolationWeight, InversionConfig};

impl SmileNodes {
    /// `E[(S_T/F)^p]` through the chosen representation.
    ///
    /// `Re p` must lie in the convergence strip; the Bergomi form additionally
    /// needs `Re p ∈ [0, 1]`.
    pub fn mgf(&self, p: ComplexValue, repr: Representation) -> Result<MomentReport> {
        self.check_strip(p.re)?;
        self.mgf_unchecked(p, repr)
    }

    /// Same as [`Self::mgf`] without the strip check; `converged` then reports
    /// whether `Re p` was inside the strip. Meant for divergence diagnostics.
    pub fn mgf_unchecked(&self, p: ComplexValue, repr: Representation) -> Result<MomentReport> {
        let value = match repr {
            Representation::Base => self.base(p)?,
            Representation::Matytsin => self.matytsin(p)?,
            Representation::Dual => self.dual(p)?,
            Representation::Bergomi => {
                let w = InterpolationWeight::standard(p.re).map_err(|_| Error::OutsideConvergenceStrip {
                    p: p.re,
                    lower: 0.0,
                    upper: 1.0,
                })?;
                bergomi_with(&self.slice, w, p.im, &self.rule, &self.cfg)?
            }
        };
        Ok(MomentReport {
            p,
            value,
            representation: repr,
            order: self.order(),
            converged: self.bounds.contains(p.re) && value.is_finite(),
        })
    }

    fn base(&self, p: ComplexValue) -> Result<ComplexValue> {
        let pm1 = p - 1.0;
        let omp = 1.0 - p;
        self.sum_complex(|i| {
            let a = (pm1 * self.g1[i].k).exp() * p;
            let b = (p * self.g2[i].k).exp() * omp;
            Ok(a + b)
        })
    }

    fn matytsin(&self, p: ComplexValue) -> Result<ComplexValue> {
        self.sum_complex(|i| {
            let pt = &self.g2[i];
            let dv = pt.dv_dz(0.0)?;
            Ok((p * pt.k).exp() * (1.0 - p * dv))
        })
    }

    fn dual(&self, p: ComplexValue) -> Result<ComplexValue> {
        let pm1 = p - 1.0;
        let omp = 1.0 - p;
        self.sum_complex(|i| {
            let pt = &self.g1[i];
            let dv = pt.dv_dz(1.0)?;
            Ok((pm1 * pt.k).exp() * (omp * dv + 1.0))
        })
    }
}

/// Real-line Bergomi form at `p = a + i·b`, with `a` the interpolation weight:
/// `∫ e^{i b g(a,z)} e^{½a(a−1) vᵃ(z)²} (1 − i b (vᵃ)′(z)) φ(z) dz`.
fn bergomi_with(
    slice: &SmileSlice,
    weight: InterpolationWeight,
    b: f64,
    rule: &GaussianRule,
    cfg: &InversionConfig,
) -> Result<ComplexValue> {
    let a = weight.p();
    let pts = invert_all(slice, rule, weight, cfg)?;
    let c = 0.5 * a * (a - 1.0);
    weighted_sum_complex(rule, |i| {
        let pt = &pts[i];
        let damp = (c * pt.v * pt.v).exp();
        if b == 0.0 {
            return Ok(ComplexValue::real(damp));
        }
        let dv = pt.dv_dz(a)?;
        Ok(ComplexValue::imag(b * pt.k).exp() * ComplexValue::new(damp, -b * dv * damp))
    })
}

/// Real moment `E[(S_T/F)^p]` via the base representation.
pub fn moment(slice: &SmileSlice, p: f64, rule: &GaussianRule) -> Result<MomentReport> {
    mgf_complex(slice, ComplexValue::real(p), rule)
}

/// Complex moment via the base representation.
pub fn mgf_complex(slice: &SmileSlice, p: ComplexValue, rule: &GaussianRule) -> Result<MomentReport> {
    mgf(slice, p, rule, Representation::Base)
}

/// Complex moment through any representation.
pub fn mgf(slice: &SmileSlice, p: ComplexValue, rule: &GaussianRule, repr: Representation) -> Result<MomentReport> {
    let bounds = super::moment_bounds(slice);
    if !bounds.contains(p.re) {
        return Err(Error::OutsideConvergenceStrip { p: p.re, lower: bounds.lower(), upper: bounds.upper() });
    }
    SmileNodes::new(slice, rule)?.mgf(p, repr)
}

/// Characteristic function `E[e^{iηX}]` in the `v₂` representation.
pub fn charfn_matytsin(slice: &SmileSlice, eta: f64, rule: &GaussianRule) -> Result<ComplexValue> {
    Ok(mgf(slice, ComplexValue::imag(eta), rule, Representation::Matytsin)?.value)
}

/// Characteristic function `E[e^{iηX}]` in the `v₁` representation.
pub fn charfn_dual(slice: &SmileSlice, eta: f64, rule: &GaussianRule) -> Result<ComplexValue> {
    Ok(mgf(slice, ComplexValue::imag(eta), rule, Representation::Dual)?.value)
}

/// Bergomi real-line representation for `Re p ∈ [0, 1]`.
pub fn bergomi_moment(slice: &SmileSlice, p: ComplexValue, rule: &GaussianRule) -> Result<ComplexValue> {
    let w = InterpolationWeight::standard(p.re).map_err(|_| Error::OutsideConvergenceStrip {
        p: p.re,
        lower: 0.0,
        upper: 1.0,
    })?;
    bergomi_with(slice, w, p.im, rule, &InversionConfig::default())
}

/// Bergomi representation at `p = weight + i·im`, for weights certified
/// outside `[0, 1]` through a monotone-smile claim.
pub fn bergomi_moment_weighted(
    slice: &SmileSlice,
    weight: InterpolationWeight,
    im: f64,
    rule: &GaussianRule,
) -> Result<ComplexValue> {
    bergomi_with(slice, weight, im, rule, &InversionConfig::default())
}
