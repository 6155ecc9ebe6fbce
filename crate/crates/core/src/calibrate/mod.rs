//! Least-squares fit of one SSVI slice to quoted total implied volatilities.
//!
//! The objective is `Σ (w(kᵢ) − vᵢ²)²` in the unconstrained coordinates
//! `(ln θ, atanh ρ, ln φ)`. The no-arbitrage conditions enter as a quadratic
//! penalty and are enforced exactly at return by shrinking `φ` if needed.

mod nelder_mead;

pub use nelder_mead::{minimize, NelderMeadOptions, NelderMeadResult};

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smiles::{ssvi_total_variance, validate_ssvi, SsviParams};

/// One quoted point of the smile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketQuote {
    /// Forward log-strike.
    pub k: f64,
    /// Total implied volatility.
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub params: SsviParams,
    /// Root-mean-square residual in total-variance units.
    pub rmse: f64,
    pub iterations: usize,
    /// Set when the arbitrage constraints bind, or when `φ` collapsed to zero
    /// so that `ρ` is unidentified and was left at its initial value.
    pub constraint_active: bool,
    /// Best penalized objective after each simplex iteration.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

/// Reads quotes from CSV with header `k,v`.
pub fn read_quotes_csv(reader: impl Read) -> Result<Vec<MarketQuote>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::InvalidParameter(format!("quote csv: {e}")))?.clone();
    if headers.len() != 2 || &headers[0] != "k" || &headers[1] != "v" {
        return Err(Error::InvalidParameter(format!(
            "quote csv header must be `k,v`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize().map(|r| r.map_err(|e| Error::InvalidParameter(format!("quote csv: {e}")))).collect()
}

fn check_quotes(quotes: &[MarketQuote]) -> Result<()> {
    for q in quotes {
        if !(q.k.is_finite() && q.v.is_finite() && q.v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quote (k={}, v={}) must have finite k and positive v",
                q.k, q.v
            )));
        }
    }
    let mut ks: Vec<f64> = quotes.iter().map(|q| q.k).collect();
    ks.sort_by(f64::total_cmp);
    let before = ks.len();
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::InsufficientQuotes(ks.len()));
    }
    if ks.len() != before {
        return Err(Error::InvalidParameter("quotes must have distinct log-strikes".into()));
    }
    Ok(())
}

/// Quoted total variance at `k = 0`, linearly interpolated (flat beyond the ends).
fn atm_variance(quotes: &[MarketQuote]) -> f64 {
    let mut pts: Vec<(f64, f64)> = quotes.iter().map(|q| (q.k, q.v * q.v)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts[0].0 >= 0.0 {
        return pts[0].1;
    }
    if pts[pts.len() - 1].0 <= 0.0 {
        return pts[pts.len() - 1].1;
    }
    let i = pts.iter().position(|p| p.0 >= 0.0).expect("bracketed");
    let ((k0, w0), (k1, w1)) = (pts[i - 1], pts[i]);
    w0 + (w1 - w0) * (0.0 - k0) / (k1 - k0)
}

const RHO_MAX: f64 = 1.0 - 1e-12;
/// Margin kept below the strict bound on `θφ(1+|ρ|)`.
const STRICT_MARGIN: f64 = 1e-9;
const MAX_RESTARTS: usize = 25;
/// Below this `φ` the slice is numerically flat and `ρ` carries no information.
const PHI_COLLAPSE: f64 = 1e-6;

fn decode(x: &[f64]) -> SsviParams {
    SsviParams { theta: x[0].exp(), rho: x[1].tanh().clamp(-RHO_MAX, RHO_MAX), phi: x[2].exp() }
}

fn encode(p: &SsviParams) -> [f64; 3] {
    [p.theta.ln(), p.rho.clamp(-RHO_MAX, RHO_MAX).atanh(), p.phi.max(1e-300).ln()]
}

fn sse(quotes: &[MarketQuote], p: &SsviParams) -> f64 {
    quotes.iter().map(|q| (ssvi_total_variance(p, q.k) - q.v * q.v).powi(2)).sum()
}

fn constraint_excess(p: &SsviParams) -> (f64, f64) {
    let a = 1.0 + p.rho.abs();
    let c1 = p.theta * p.phi * a - (4.0 - STRICT_MARGIN);
    let c2 = p.theta * p.phi * p.phi * a - 4.0;
    (c1.max(0.0), c2.max(0.0))
}

/// Shrinks `φ` onto the admissible region; returns whether anything changed.
fn project(p: &mut SsviParams) -> bool {
    let a = 1.0 + p.rho.abs();
    let cap = ((4.0 - STRICT_MARGIN) / (p.theta * a)).min((4.0 / (p.theta * a)).sqrt());
    if p.phi > cap {
        p.phi = cap;
        true
    } else {
        false
    }
}

/// Fits `(θ, ρ, φ)` to the quotes. Deterministic for fixed inputs.
pub fn fit_ssvi(quotes: &[MarketQuote], init: Option<SsviParams>) -> Result<CalibrationResult> {
    check_quotes(quotes)?;
    let init = match init {
        Some(p) => SsviParams::new(p.theta, p.rho, p.phi)?,
        None => SsviParams { theta: atm_variance(quotes), rho: 0.0, phi: 1.0 },
    };
    let mean_var = quotes.iter().map(|q| q.v * q.v).sum::<f64>() / quotes.len() as f64;
    let weight = 1e4 / mean_var.max(1e-12);
    let objective = |x: &[f64]| {
        let p = decode(x);
        let (c1, c2) = constraint_excess(&p);
        sse(quotes, &p) + weight * (c1 * c1 + c2 * c2)
    };

    let step = [0.1, 0.2, 0.5];
    // Residuals of 1e-14 relative to the variance level count as exact.
    let f_floor = quotes.len() as f64 * (1e-14 * mean_var).powi(2);
    let opts = NelderMeadOptions { f_tol_abs: f_floor, x_tol: 1e-10, ..Default::default() };
    let mut x = encode(&init).to_vec();
    let mut best = objective(&x);
    let mut iterations = 0;
    let mut trace = vec![best];
    let mut converged = false;
    for _ in 0..MAX_RESTARTS {
        let budget = opts.max_iter.saturating_sub(iterations);
        if budget == 0 {
            break;
        }
        let r = minimize(objective, &x, &step, NelderMeadOptions { max_iter: budget, ..opts });
        iterations += r.iterations;
        trace.extend(r.trace.iter().map(|&t| t.min(best)));
        converged = r.converged;
        let improved = r.fx < best * (1.0 - 1e-12) && best - r.fx > 1e-40;
        if r.fx <= best {
            best = r.fx;
            x = r.x;
        }
        if !improved {
            break;
        }
    }

    let mut params = decode(&x);
    let mut constraint_active = {
        let (c1, c2) = constraint_excess(&params);
        c1 > 0.0 || c2 > 0.0
    };
    constraint_active |= project(&mut params);

    // Flat-smile candidate: φ = 0 makes ρ irrelevant, θ is the mean variance.
    let flat = SsviParams { theta: mean_var, rho: init.rho, phi: 0.0 };
    if params.phi < PHI_COLLAPSE || sse(quotes, &flat) <= sse(quotes, &params) {
        let pinned = SsviParams { rho: init.rho, ..params };
        params = if sse(quotes, &flat) <= sse(quotes, &pinned) { flat } else { pinned };
        constraint_active = true;
    }

    debug_assert!(validate_ssvi(&params).ok);
    let rmse = (sse(quotes, &params) / quotes.len() as f64).sqrt();
    if !converged && iterations >= opts.max_iter && rmse > 1e-3 * mean_var {
        return Err(Error::CalibrationDiverged { iterations, rmse });
    }
    Ok(CalibrationResult { params, rmse, iterations, constraint_active, objective_trace: trace })
}
