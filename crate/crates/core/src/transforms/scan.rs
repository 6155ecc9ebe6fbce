//! Grid scan of `k ↦ f(p, k)` for monotonicity and surjectivity.
//!
//! Sign changes are detected as strict flips of `∂ₖf` between adjacent grid
//! nodes, so anything narrower than the grid spacing goes unseen.

use serde::{Deserialize, Serialize};

use super::{checked_point, df_p_dk_at, f_p_at};
use crate::error::{Error, Result};
use crate::smiles::{wing_slopes, SmileSlice};

/// Uniform grid of `n` points on `[k_lo, k_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub k_lo: f64,
    pub k_hi: f64,
    pub n: usize,
}

impl KGrid {
    pub fn new(k_lo: f64, k_hi: f64, n: usize) -> Result<Self> {
        if !(k_lo < k_hi) || !k_lo.is_finite() || !k_hi.is_finite() {
            return Err(Error::InvalidParameter(format!("grid needs k_lo < k_hi, got [{k_lo}, {k_hi}]")));
        }
        if n < 3 {
            return Err(Error::InvalidParameter(format!("grid needs at least 3 points, got {n}")));
        }
        Ok(Self { k_lo, k_hi, n })
    }

    pub fn step(&self) -> f64 {
        (self.k_hi - self.k_lo) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.k_hi
        } else {
            self.k_lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SurjectivityVerdict {
    SurjectiveLikely,
    NotSurjective,
    Inconclusive,
}

/// Outcome of [`monotonicity_scan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub p: f64,
    pub k_grid: KGrid,
    /// `∂ₖf > 0` at every grid node.
    pub monotone_increasing: bool,
    /// Linearly interpolated locations where `∂ₖf` flips sign.
    pub sign_changes: Vec<f64>,
    /// Sign of `f(p, k_lo)`.
    pub limit_left: i8,
    /// Sign of `f(p, k_hi)`.
    pub limit_right: i8,
    /// `∂ₖf` at `k_lo` and `k_hi`.
    pub slope_left: f64,
    pub slope_right: f64,
    pub surjective_verdict: SurjectivityVerdict,
}

/// Thresholds `p̃₊ = 1/β₊ + ½`, `p̃₋ = 1/β₋ − ½` beyond which surjectivity of
/// `f(p,·)` is no longer guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurjectivityThresholds {
    #[serde(serialize_with = "crate::serde_ext::extended")]
    pub p_tilde_plus: f64,
    #[serde(serialize_with = "crate::serde_ext::extended")]
    pub p_tilde_minus: f64,
}

impl SurjectivityThresholds {
    /// Open interval `(−p̃₋, p̃₊)`.
    pub fn contains(&self, p: f64) -> bool {
        -self.p_tilde_minus < p && p < self.p_tilde_plus
    }
}

pub fn surjectivity_thresholds(slice: &SmileSlice) -> SurjectivityThresholds {
    let b = wing_slopes(slice);
    SurjectivityThresholds {
        p_tilde_plus: if b.beta_plus > 0.0 { 1.0 / b.beta_plus + 0.5 } else { f64::INFINITY },
        p_tilde_minus: if b.beta_minus > 0.0 { 1.0 / b.beta_minus - 0.5 } else { f64::INFINITY },
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Evaluates `∂ₖf(p,·)` on an `n`-point grid over `[k_lo, k_hi]`.
///
/// Verdict: `NOT_SURJECTIVE` when `f` has the same sign at both grid ends,
/// `SURJECTIVE_LIKELY` when `p` lies strictly inside `(−p̃₋, p̃₊)`, otherwise
/// `INCONCLUSIVE` (this includes `p = p̃±` exactly).
pub fn monotonicity_scan(slice: &SmileSlice, p: f64, k_lo: f64, k_hi: f64, n: usize) -> Result<MonotonicityReport> {
    let grid = KGrid::new(k_lo, k_hi, n)?;
    let mut derivs = Vec::with_capacity(n);
    for k in grid.points() {
        let pt = checked_point(slice, k)?;
        derivs.push((k, df_p_dk_at(p, k, &pt)));
    }
    let monotone_increasing = derivs.iter().all(|&(_, d)| d > 0.0);
    let mut sign_changes = Vec::new();
    for w in derivs.windows(2) {
        let ((k0, d0), (k1, d1)) = (w[0], w[1]);
        if (d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0) {
            sign_changes.push(k0 + (k1 - k0) * d0 / (d0 - d1));
        }
    }
    let f_lo = f_p_at(p, k_lo, checked_point(slice, k_lo)?.v);
    let f_hi = f_p_at(p, k_hi, checked_point(slice, k_hi)?.v);
    let (limit_left, limit_right) = (sign(f_lo), sign(f_hi));
    let surjective_verdict = if limit_left == limit_right {
        SurjectivityVerdict::NotSurjective
    } else if surjectivity_thresholds(slice).contains(p) {
        SurjectivityVerdict::SurjectiveLikely
    } else {
        SurjectivityVerdict::Inconclusive
    };
    Ok(MonotonicityReport {
        p,
        k_grid: grid,
        monotone_increasing,
        sign_changes,
        limit_left,
        limit_right,
        slope_left: derivs[0].1,
        slope_right: derivs[n - 1].1,
        surjective_verdict,
    })
}
