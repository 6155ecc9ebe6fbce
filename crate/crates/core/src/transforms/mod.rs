//! Normalizing transformations and their inverses.
//!
//! With `v = v(k)`:
//!
//! ```text
//! f₁(k) = k/v − v/2        f₂(k) = k/v + v/2
//! f(p, k) = p f₁(k) + (1 − p) f₂(k) = k/v + (½ − p) v
//! ```
//!
//! For `p ∈ [0, 1]` and an arbitrage-free smile `f(p,·)` is a strictly
//! increasing bijection of ℝ; its inverse is `g(p,·)` and the p-normalized
//! volatility is `vᵖ(z) = v(g(p, z))`.

mod duality;
mod inversion;
mod scan;

pub use duality::dual_slice;
pub use inversion::{g1, g2, g_p, invert, normalized_point, normalized_vol, normalized_vol_deriv, NormalizedPoint};
pub use scan::{
    monotonicity_scan, surjectivity_thresholds, KGrid, MonotonicityReport, SurjectivityThresholds, SurjectivityVerdict,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smiles::{SmilePoint, SmileSlice};

fn checked_point(slice: &SmileSlice, k: f64) -> Result<SmilePoint> {
    let pt = slice.point(k)?;
    if pt.v > 0.0 && pt.v.is_finite() {
        Ok(pt)
    } else {
        Err(Error::NonPositiveVol { k, vol: pt.v })
    }
}

/// `f₁(k) = k/v(k) − v(k)/2`, i.e. `−d₁`.
pub fn f1(slice: &SmileSlice, k: f64) -> Result<f64> {
    let v = checked_point(slice, k)?.v;
    Ok(k / v - 0.5 * v)
}

/// `f₂(k) = k/v(k) + v(k)/2`, i.e. `−d₂`.
pub fn f2(slice: &SmileSlice, k: f64) -> Result<f64> {
    let v = checked_point(slice, k)?.v;
    Ok(k / v + 0.5 * v)
}

/// `f(p, k) = p f₁(k) + (1 − p) f₂(k)`.
pub fn f_p(slice: &SmileSlice, p: f64, k: f64) -> Result<f64> {
    let v = checked_point(slice, k)?.v;
    Ok(f_p_at(p, k, v))
}

#[inline]
pub(crate) fn f_p_at(p: f64, k: f64, v: f64) -> f64 {
    k / v + (0.5 - p) * v
}

/// `∂ₖf(p, k) = (1 − v′f₂)/v + (1 − p) v′`.
pub fn df_p_dk(slice: &SmileSlice, p: f64, k: f64) -> Result<f64> {
    let pt = checked_point(slice, k)?;
    Ok(df_p_dk_at(p, k, &pt))
}

#[inline]
pub(crate) fn df_p_dk_at(p: f64, k: f64, pt: &SmilePoint) -> f64 {
    let f2 = k / pt.v + 0.5 * pt.v;
    (1.0 - pt.dv * f2) / pt.v + (1.0 - p) * pt.dv
}

/// Settings for the numerical inversion of `f(p,·)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionConfig {
    /// Growth factor of the bracket half-width per expansion.
    pub bracket_expand_factor: f64,
    /// Absolute tolerance on `|f(p, k) − z|`.
    pub tol_abs: f64,
    pub max_iter: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self { bracket_expand_factor: 2.0, tol_abs: 1e-12, max_iter: 200 }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bracket_expand_factor > 1.0 && self.bracket_expand_factor.is_finite()) {
            return Err(Error::InvalidParameter("bracket_expand_factor must exceed 1".into()));
        }
        if !(self.tol_abs > 0.0) {
            return Err(Error::InvalidParameter("tol_abs must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Which monotone-smile extension the caller relies on when `p ∉ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneClaim {
    /// `v′ ≤ 0`: inversion extends to every `p ≥ 0`.
    DecreasingSmile,
    /// `v′ ≥ 0`: inversion extends to every `p ≤ 1`.
    IncreasingSmile,
}

/// Interpolation weight `p` of `f(p,·)`, checked to be invertible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationWeight {
    p: f64,
}

impl InterpolationWeight {
    /// `p ∈ [0, 1]`, invertible for any arbitrage-free smile.
    pub fn standard(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self { p })
        } else {
            Err(Error::WeightNotCertified {
                p,
                reason: "p outside [0, 1] requires a monotone-smile certificate".into(),
            })
        }
    }

    /// Weight outside `[0, 1]` justified by a monotone smile.
    ///
    /// The claim is checked on `grid`: the sign of `v′` must match it and a
    /// [`monotonicity_scan`] must find `f(p,·)` increasing with opposite end
    /// signs. Passing is evidence on the grid only, not a proof.
    pub fn certified(slice: &SmileSlice, p: f64, claim: MonotoneClaim, grid: KGrid) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            return Ok(Self { p });
        }
        let allowed = match claim {
            MonotoneClaim::DecreasingSmile => p >= 0.0,
            MonotoneClaim::IncreasingSmile => p <= 1.0,
        };
        if !allowed {
            return Err(Error::WeightNotCertified { p, reason: format!("{claim:?} does not cover this p") });
        }
        for k in grid.points() {
            let dv = checked_point(slice, k)?.dv;
            let ok = match claim {
                MonotoneClaim::DecreasingSmile => dv <= 0.0,
                MonotoneClaim::IncreasingSmile => dv >= 0.0,
            };
            if !ok {
                return Err(Error::WeightNotCertified { p, reason: format!("v'({k}) = {dv} contradicts {claim:?}") });
            }
        }
        let report = monotonicity_scan(slice, p, grid.k_lo, grid.k_hi, grid.n)?;
        if !report.monotone_increasing || report.surjective_verdict == SurjectivityVerdict::NotSurjective {
            return Err(Error::WeightNotCertified { p, reason: "monotonicity scan failed".into() });
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}
