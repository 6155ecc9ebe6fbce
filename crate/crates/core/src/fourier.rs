//! Put prices by damped Fourier inversion of the smile-implied moment function.
//!
//! With `F = 1` and zero rates the put of strike `K` is
//!
//! ```text
//! P(K) = R_α + (1/2π) ∫ K^{1−α−iu} / ((α+iu)(α−1+iu)) · M(α+iu) du
//! ```
//!
//! where `M(p) = E[(S_T/F)^p]` and the residue `R_α` depends on which pole
//! strip holds the damping abscissa `α`. The `u`-integral is a uniform
//! trapezoid on `[−u_max, u_max]`, evaluated on `u ≥ 0` by conjugate symmetry.
//!
//! The Gauss-Hermite value of `M(α+iu)` stops tracking the true (decaying)
//! transform once `u` is large enough for the rule to alias the oscillation.
//! The integral is therefore cut at the first grid point where `|M|` starts to
//! grow again, and that cut is accepted only if the integrand has already
//! decayed below `tail_tol` there.

use serde::{Deserialize, Serialize};

use crate::analytics::{moment_bounds, MomentBounds, Representation, SmileNodes};
use crate::complex::ComplexValue;
use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum, GaussianRule};
use crate::smiles::SmileSlice;
use crate::special::{norm_cdf, sine_integral_tail, TWO_PI};

/// Prices below `−NEGATIVE_PRICE_TOL` are reported as errors.
pub const NEGATIVE_PRICE_TOL: f64 = 1e-8;

/// Damping and discretization of the inversion integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionSpec {
    pub alpha: f64,
    pub u_max: f64,
    pub n_u: usize,
    /// Largest integrand magnitude tolerated where the `u`-integral is cut.
    pub tail_tol: f64,
}

impl Default for InversionSpec {
    fn default() -> Self {
        Self { alpha: 0.5, u_max: 200.0, n_u: 4001, tail_tol: 1e-5 }
    }
}

impl InversionSpec {
    fn validate(&self, bounds: &MomentBounds) -> Result<()> {
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("u_max must be positive, got {}", self.u_max)));
        }
        if self.n_u < 3 {
            return Err(Error::InvalidParameter(format!("n_u must be at least 3, got {}", self.n_u)));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::InvalidParameter("tail_tol must be positive".into()));
        }
        check_alpha(self.alpha, bounds.p_plus, bounds.p_minus)
    }
}

fn check_alpha(alpha: f64, p_star_bound: f64, q_star_bound: f64) -> Result<()> {
    if alpha == 0.0 || alpha == 1.0 {
        return Err(Error::AlphaOnPole(alpha));
    }
    if !(-q_star_bound < alpha && alpha < p_star_bound) {
        return Err(Error::AlphaOutOfStrip { alpha, lower: -q_star_bound, upper: p_star_bound });
    }
    Ok(())
}

/// `R_α`: `K − 1` for `1 < α < p*`, `K` for `0 < α < 1`, `0` for `−q* < α < 0`.
pub fn residue_term(alpha: f64, k_strike: f64, p_star_bound: f64, q_star_bound: f64) -> Result<f64> {
    check_alpha(alpha, p_star_bound, q_star_bound)?;
    Ok(if alpha > 1.0 {
        k_strike - 1.0
    } else if alpha > 0.0 {
        k_strike
    } else {
        0.0
    })
}

/// Moment function sampled once on the `u ≥ 0` half of the trapezoid grid;
/// strikes are then priced without touching the smile again.
#[derive(Debug, Clone)]
pub struct FourierPricer {
    spec: InversionSpec,
    bounds: MomentBounds,
    /// `(u, trapezoid weight including the conjugate half, M(α+iu))`.
    samples: Vec<(f64, f64, ComplexValue)>,
}

impl FourierPricer {
    pub fn new(slice: &SmileSlice, spec: InversionSpec, rule: &GaussianRule) -> Result<Self> {
        let nodes = SmileNodes::new(slice, rule)?;
        Self::from_nodes(&nodes, spec)
    }

    pub fn from_nodes(nodes: &SmileNodes, spec: InversionSpec) -> Result<Self> {
        let bounds = nodes.bounds();
        spec.validate(&bounds)?;
        let du = 2.0 * spec.u_max / (spec.n_u - 1) as f64;
        let mut samples = Vec::with_capacity(spec.n_u / 2 + 1);
        let mut prev_abs = f64::INFINITY;
        for j in 0..spec.n_u {
            let u = if j + 1 == spec.n_u { spec.u_max } else { -spec.u_max + j as f64 * du };
            if u < -0.25 * du {
                continue;
            }
            let u = if u.abs() < 0.25 * du { 0.0 } else { u };
            let m = nodes.mgf(ComplexValue::new(spec.alpha, u), Representation::Base)?.value;
            let a = m.abs();
            if a > prev_abs {
                break;
            }
            prev_abs = a;
            let end = j == 0 || j + 1 == spec.n_u;
            let w = du * if end { 0.5 } else { 1.0 } * if u == 0.0 { 1.0 } else { 2.0 };
            samples.push((u, w, m));
        }
        Ok(Self { spec, bounds, samples })
    }

    /// Where the `u`-integral was cut.
    pub fn u_cut(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.0)
    }

    fn kernel(&self, k_strike: f64, u: f64, m: ComplexValue) -> ComplexValue {
        let a = self.spec.alpha;
        let num = ComplexValue::new(1.0 - a, -u).scale(k_strike.ln()).exp();
        num * m / (ComplexValue::new(a, u) * ComplexValue::new(a - 1.0, u))
    }

    pub fn put(&self, k_strike: f64) -> Result<f64> {
        if !(k_strike > 0.0 && k_strike.is_finite()) {
            return Err(Error::InvalidParameter(format!("strike must be positive, got {k_strike}")));
        }
        let residue = residue_term(self.spec.alpha, k_strike, self.bounds.p_plus, self.bounds.p_minus)?;
        let (u_cut, _, m_cut) = *self.samples.last().expect("grid contains u = 0 or its neighbour");
        let tail = self.kernel(k_strike, u_cut, m_cut).abs();
        if tail > self.spec.tail_tol {
            return Err(Error::TruncationInsufficient { u: u_cut, magnitude: tail, tol: self.spec.tail_tol });
        }
        let terms: Vec<f64> = self.samples.iter().map(|&(u, w, m)| w * self.kernel(k_strike, u, m).re).collect();
        let price = residue + pairwise_sum(&terms) / TWO_PI;
        if price < -NEGATIVE_PRICE_TOL {
            return Err(Error::NegativePrice(price));
        }
        Ok(price)
    }
}

/// Put of strike `K` (forward 1) by Fourier inversion.
pub fn put_price_fourier(slice: &SmileSlice, k_strike: f64, spec: &InversionSpec, rule: &GaussianRule) -> Result<f64> {
    let bounds = moment_bounds(slice);
    spec.validate(&bounds)?;
    FourierPricer::new(slice, *spec, rule)?.put(k_strike)
}

/// Black-Scholes put at the smile's own volatility: `K N(f₂(k)) − N(f₁(k))`.
pub fn bs_put_reference(slice: &SmileSlice, k_strike: f64) -> Result<f64> {
    if !(k_strike > 0.0) {
        return Err(Error::InvalidParameter(format!("strike must be positive, got {k_strike}")));
    }
    let k = k_strike.ln();
    let v = slice.vol(k)?;
    let f1 = k / v - 0.5 * v;
    let f2 = k / v + 0.5 * v;
    Ok(k_strike * norm_cdf(f2) - norm_cdf(f1))
}

/// Trapezoid value of `∫_{d−iR}^{d+iR} e^{−cω}/ω dω` with `n` points, plus the
/// leading `|t| > R` tail `−2i e^{−cd} sgn(c) ∫_{|c|R}^∞ sin(s)/s ds`.
///
/// Approximates the `R → ∞` limit: `2πi` when `c < 0 < d`, `−2πi` when
/// `d < 0 < c`, and `0` when `c` and `d` share a sign.
pub fn eval_contour_integral(c: f64, d: f64, r: f64, n: usize) -> Result<ComplexValue> {
    let raw = eval_contour_integral_truncated(c, d, r, n)?;
    let tail = ComplexValue::imag(-2.0 * (-c * d).exp() * c.signum() * sine_integral_tail(c.abs() * r));
    Ok(raw + tail)
}

/// Plain trapezoid over `t ∈ [−R, R]` of `i e^{−c(d+it)}/(d+it)`.
pub fn eval_contour_integral_truncated(c: f64, d: f64, r: f64, n: usize) -> Result<ComplexValue> {
    if c == 0.0 || d == 0.0 {
        return Err(Error::InvalidParameter("contour integral needs c != 0 and d != 0".into()));
    }
    if !(r > 0.0) || n < 2 {
        return Err(Error::InvalidParameter("contour integral needs R > 0 and n >= 2".into()));
    }
    let h = 2.0 * r / (n - 1) as f64;
    let f = |t: f64| {
        let w = ComplexValue::new(d, t);
        ComplexValue::I * (w * -c).exp() / w
    };
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for j in 0..n {
        let t = if j + 1 == n { r } else { -r + j as f64 * h };
        let wt = if j == 0 || j + 1 == n { 0.5 * h } else { h };
        let y = f(t) * wt;
        re.push(y.re);
        im.push(y.im);
    }
    Ok(ComplexValue::new(pairwise_sum(&re), pairwise_sum(&im)))
}
