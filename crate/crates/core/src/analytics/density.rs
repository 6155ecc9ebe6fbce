//! Distribution of `X = log(S_T/F)` read off the smile.

use crate::error::{Error, Result};
use crate::smiles::SmileSlice;
use crate::special::{norm_cdf, norm_pdf};

/// Slack for rounding before a cdf or density value counts as out of range.
const RANGE_TOL: f64 = 1e-12;

fn f2_terms(slice: &SmileSlice, k: f64) -> Result<(f64, f64, f64, f64)> {
    let pt = slice.point(k)?;
    if !(pt.v > 0.0) {
        return Err(Error::NonPositiveVol { k, vol: pt.v });
    }
    let f2 = k / pt.v + 0.5 * pt.v;
    Ok((f2, pt.v, pt.dv, pt.d2v))
}

/// `P(X ≤ k) = N(f₂(k)) + φ(f₂(k)) v′(k)`.
pub fn implied_cdf(slice: &SmileSlice, k: f64) -> Result<f64> {
    let (f2, _, dv, _) = f2_terms(slice, k)?;
    let value = norm_cdf(f2) + norm_pdf(f2) * dv;
    if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&value) {
        return Err(Error::CdfOutOfRange { k, value });
    }
    Ok(value)
}

/// `P(X > k) = N(−f₂(k)) − φ(f₂(k)) v′(k)`, accurate deep in the right tail.
pub fn implied_survival(slice: &SmileSlice, k: f64) -> Result<f64> {
    let (f2, _, dv, _) = f2_terms(slice, k)?;
    let value = norm_cdf(-f2) - norm_pdf(f2) * dv;
    if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&value) {
        return Err(Error::CdfOutOfRange { k, value: 1.0 - value });
    }
    Ok(value)
}

/// Density of `X` at `k` (per unit log-strike, so integrate against `dk`):
/// `φ(f₂)[f₂′(1 − f₂ v′) + v″]`.
pub fn implied_density(slice: &SmileSlice, k: f64) -> Result<f64> {
    let (f2, v, dv, d2v) = f2_terms(slice, k)?;
    let df2 = (1.0 - dv * f2) / v + dv;
    let value = norm_pdf(f2) * (df2 * (1.0 - f2 * dv) + d2v);
    if value < -RANGE_TOL {
        return Err(Error::NegativeDensity { k, value });
    }
    Ok(value)
}
