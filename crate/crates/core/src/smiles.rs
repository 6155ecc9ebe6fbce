//! Implied-volatility smile models for a single maturity.
//!
//! A smile is described by its total implied volatility `v(k)` as a function of
//! the forward log-strike `k = log(K/F)`. Two models are built in: the SSVI
//! slice
//!
//! ```text
//! w(k) = v(k)² = (θ/2) · [1 + ρφk + √((φk + ρ)² + 1 − ρ²)]
//! ```
//!
//! and the flat Black-Scholes smile `v(k) ≡ v`. Everything downstream consumes
//! the `(v, v′, v″)` triple returned by [`smile_vol`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::norm_cdf;

/// Parameters of one SSVI slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsviParams {
    pub theta: f64,
    pub rho: f64,
    pub phi: f64,
}

impl SsviParams {
    /// Checks the parameter domains only (`θ > 0`, `|ρ| < 1`, `φ ≥ 0`).
    /// Use [`validate_ssvi`] for the no-arbitrage conditions.
    pub fn new(theta: f64, rho: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
        }
        if !(rho.is_finite() && rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (-1, 1), got {rho}")));
        }
        if !(phi.is_finite() && phi >= 0.0) {
            return Err(Error::InvalidParameter(format!("phi must be non-negative, got {phi}")));
        }
        Ok(Self { theta, rho, phi })
    }

    /// The parameter set used throughout the examples: θ = 0.25², ρ = −0.8, φ = 1.4.
    pub const REFERENCE: SsviParams = SsviParams { theta: 0.0625, rho: -0.8, phi: 1.40 };

    /// Stationary point of `w`, `−2ρ/φ` (undefined for `φ = 0`).
    pub fn k_min(&self) -> Option<f64> {
        (self.phi > 0.0).then(|| -2.0 * self.rho / self.phi)
    }

    /// Global minimum of the total variance, `θ(1 − ρ²)`, attained at [`Self::k_min`].
    pub fn min_total_variance(&self) -> f64 {
        if self.phi > 0.0 {
            self.theta * (1.0 - self.rho * self.rho)
        } else {
            self.theta
        }
    }
}

/// `v(k)`, `v′(k)`, `v″(k)` at one log-strike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmilePoint {
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

/// A single-maturity implied-volatility smile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmileSlice {
    Ssvi(SsviParams),
    /// Flat smile with constant total volatility.
    ConstantVol(f64),
}

impl SmileSlice {
    /// SSVI slice that passed [`validate_ssvi`].
    pub fn ssvi(params: SsviParams) -> Result<Self> {
        let report = validate_ssvi(&params);
        if report.ok {
            Ok(Self::Ssvi(params))
        } else {
            Err(Error::Arbitrageable(report))
        }
    }

    pub fn constant(vol: f64) -> Result<Self> {
        if vol.is_finite() && vol > 0.0 {
            Ok(Self::ConstantVol(vol))
        } else {
            Err(Error::InvalidParameter(format!("total volatility must be positive, got {vol}")))
        }
    }

    pub fn reference_ssvi() -> Self {
        Self::Ssvi(SsviParams::REFERENCE)
    }

    /// Shorthand for [`smile_vol`].
    #[inline]
    pub fn point(&self, k: f64) -> Result<SmilePoint> {
        smile_vol(self, k)
    }

    #[inline]
    pub fn vol(&self, k: f64) -> Result<f64> {
        smile_vol(self, k).map(|p| p.v)
    }

    /// True when `v′ ≤ 0` everywhere (checked analytically for the built-in models).
    pub fn is_decreasing(&self) -> bool {
        match self {
            Self::ConstantVol(_) => true,
            Self::Ssvi(p) => p.phi == 0.0,
        }
    }

    /// True when `v′ ≥ 0` everywhere.
    pub fn is_increasing(&self) -> bool {
        self.is_decreasing()
    }
}

impl fmt::Display for SmileSlice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ssvi(p) => write!(f, "SSVI(theta={}, rho={}, phi={})", p.theta, p.rho, p.phi),
            Self::ConstantVol(v) => write!(f, "ConstantVol({v})"),
        }
    }
}

/// Smile configuration document.
///
/// `{"model":"ssvi","theta":0.0625,"rho":-0.8,"phi":1.4}` or
/// `{"model":"bs","total_vol":0.2}`. Unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum SmileConfig {
    Ssvi { theta: f64, rho: f64, phi: f64 },
    Bs { total_vol: f64 },
}

impl SmileConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("smile config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("smile config serializes")
    }

    /// Builds the slice, running the domain and no-arbitrage checks.
    pub fn into_slice(self) -> Result<SmileSlice> {
        match self {
            Self::Ssvi { theta, rho, phi } => SmileSlice::ssvi(SsviParams::new(theta, rho, phi)?),
            Self::Bs { total_vol } => SmileSlice::constant(total_vol),
        }
    }
}

impl From<&SmileSlice> for SmileConfig {
    fn from(slice: &SmileSlice) -> Self {
        match *slice {
            SmileSlice::Ssvi(p) => Self::Ssvi { theta: p.theta, rho: p.rho, phi: p.phi },
            SmileSlice::ConstantVol(v) => Self::Bs { total_vol: v },
        }
    }
}

#[inline]
fn ssvi_radical(p: &SsviParams, k: f64) -> (f64, f64) {
    let a = p.phi * k + p.rho;
    let r2 = a * a + 1.0 - p.rho * p.rho;
    (a, r2.sqrt())
}

/// SSVI total implied variance `w(k)`.
pub fn ssvi_total_variance(params: &SsviParams, k: f64) -> f64 {
    let (_, r) = ssvi_radical(params, k);
    0.5 * params.theta * (1.0 + params.rho * params.phi * k + r)
}

/// `(w′(k), w″(k))` for an SSVI slice.
pub fn ssvi_derivatives(params: &SsviParams, k: f64) -> (f64, f64) {
    let (a, r) = ssvi_radical(params, k);
    let tp = params.theta * params.phi;
    let w1 = 0.5 * tp * (params.rho + a / r);
    let w2 = 0.5 * tp * params.phi * (1.0 - params.rho * params.rho) / (r * r * r);
    (w1, w2)
}

/// Evaluates `(v, v′, v″)` at log-strike `k`.
pub fn smile_vol(slice: &SmileSlice, k: f64) -> Result<SmilePoint> {
    match slice {
        SmileSlice::ConstantVol(v) => {
            if *v > 0.0 {
                Ok(SmilePoint { v: *v, dv: 0.0, d2v: 0.0 })
            } else {
                Err(Error::NonPositiveVariance { k, variance: v * v })
            }
        }
        SmileSlice::Ssvi(p) => {
            let w = ssvi_total_variance(p, k);
            if !(w > 0.0) {
                return Err(Error::NonPositiveVariance { k, variance: w });
            }
            let (w1, w2) = ssvi_derivatives(p, k);
            let v = w.sqrt();
            let dv = w1 / (2.0 * v);
            let d2v = w2 / (2.0 * v) - w1 * w1 / (4.0 * v * w);
            Ok(SmilePoint { v, dv, d2v })
        }
    }
}

/// One failed check inside a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
    pub lhs: f64,
    pub bound: f64,
}

/// Outcome of a validation pass; `ok` holds exactly when `violations` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self { ok: violations.is_empty(), violations }
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {} (lhs={}, bound={})", v.code, v.message, v.lhs, v.bound))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub const CONDITION_1: &str = "CONDITION_1";
pub const LIMITING_CASE: &str = "LIMITING_CASE";
pub const CONDITION_2: &str = "CONDITION_2";
pub const NON_POSITIVE_VOL: &str = "NON_POSITIVE_VOL";
pub const ATOM_AT_ZERO: &str = "ATOM_AT_ZERO";

/// Relative width of the band around `θφ(1+|ρ|) = 4` treated as the limiting case.
const LIMITING_REL_TOL: f64 = 1e-12;

/// Sufficient no-arbitrage conditions for one SSVI slice:
/// `θφ(1+|ρ|) < 4` and `θφ²(1+|ρ|) ≤ 4`.
///
/// The equality `θφ(1+|ρ|) = 4` is rejected for both signs of ρ: with ρ ≥ 0 it
/// admits arbitrage, with ρ < 0 it puts mass at zero. Condition (2) is only
/// sufficient, so some arbitrage-free slices are rejected.
pub fn validate_ssvi(params: &SsviParams) -> ValidationReport {
    let a = 1.0 + params.rho.abs();
    let lhs1 = params.theta * params.phi * a;
    let lhs2 = params.theta * params.phi * params.phi * a;
    let mut violations = Vec::new();
    if (lhs1 - 4.0).abs() <= LIMITING_REL_TOL * 4.0 {
        let why = if params.rho >= 0.0 {
            "slice admits arbitrage in the right wing"
        } else {
            "slice carries mass at zero (d2 stays bounded as k -> -inf)"
        };
        violations.push(Violation {
            code: LIMITING_CASE.into(),
            message: format!("theta*phi*(1+|rho|) = 4: {why}"),
            lhs: lhs1,
            bound: 4.0,
        });
    } else if lhs1 > 4.0 {
        violations.push(Violation {
            code: CONDITION_1.into(),
            message: "theta*phi*(1+|rho|) must be < 4".into(),
            lhs: lhs1,
            bound: 4.0,
        });
    }
    if lhs2 > 4.0 {
        violations.push(Violation {
            code: CONDITION_2.into(),
            message: "theta*phi^2*(1+|rho|) must be <= 4".into(),
            lhs: lhs2,
            bound: 4.0,
        });
    }
    ValidationReport::from_violations(violations)
}

/// Asymptotic wing slopes `β± = limsup v(k)²/|k|` as `k → ±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WingSlopes {
    pub beta_plus: f64,
    pub beta_minus: f64,
}

/// Closed-form wing slopes: `θφ(1±ρ)/2` for SSVI, zero for a flat smile.
pub fn wing_slopes(slice: &SmileSlice) -> WingSlopes {
    match slice {
        SmileSlice::ConstantVol(_) => WingSlopes { beta_plus: 0.0, beta_minus: 0.0 },
        SmileSlice::Ssvi(p) => {
            let tp = p.theta * p.phi;
            WingSlopes { beta_plus: 0.5 * tp * (1.0 + p.rho), beta_minus: 0.5 * tp * (1.0 - p.rho) }
        }
    }
}

/// Single-probe estimate `v(±k)²/k` of the wing slopes.
///
/// Only meaningful when `v²/|k|` converges monotonically, as it does for SSVI.
pub fn wing_slopes_numerical(slice: &SmileSlice, k_probe: f64) -> Result<WingSlopes> {
    let vp = slice.vol(k_probe)?;
    let vm = slice.vol(-k_probe)?;
    Ok(WingSlopes { beta_plus: vp * vp / k_probe, beta_minus: vm * vm / k_probe })
}

/// Default probe for [`verify_assumptions`].
pub const DEFAULT_K_PROBE: f64 = 1e4;

/// Largest tolerated `N(−d₂(−k_probe))`, the finite-probe proxy for `P(S_T = 0)`.
pub const ATOM_PROXY_TOL: f64 = 1e-6;

/// Heuristic check of the standing assumptions at a finite probe:
/// `v(±k_probe) > 0` and `d₂(−k_probe) = k/v − v/2` large enough that the
/// implied mass at zero, `N(−d₂)`, is below [`ATOM_PROXY_TOL`].
pub fn verify_assumptions(slice: &SmileSlice, k_probe: f64) -> ValidationReport {
    let mut violations = Vec::new();
    for k in [k_probe, -k_probe] {
        match slice.vol(k) {
            Ok(v) if v > 0.0 && v.is_finite() => {}
            Ok(v) => violations.push(Violation {
                code: NON_POSITIVE_VOL.into(),
                message: format!("v({k}) is not positive"),
                lhs: v,
                bound: 0.0,
            }),
            Err(_) => violations.push(Violation {
                code: NON_POSITIVE_VOL.into(),
                message: format!("v({k}) could not be evaluated"),
                lhs: f64::NAN,
                bound: 0.0,
            }),
        }
    }
    if violations.is_empty() {
        let k = -k_probe;
        let v = slice.vol(k).expect("checked above");
        let d2 = -k / v - 0.5 * v;
        let atom = norm_cdf(-d2);
        if !(atom <= ATOM_PROXY_TOL) {
            violations.push(Violation {
                code: ATOM_AT_ZERO.into(),
                message: format!("d2({k}) = {d2} does not diverge; implied mass at zero ~ N(-d2)"),
                lhs: atom,
                bound: ATOM_PROXY_TOL,
            });
        }
    }
    ValidationReport::from_violations(violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: SsviParams = SsviParams::REFERENCE;

    fn fd1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn fd2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }

    #[test]
    fn total_variance_at_the_money_is_theta() {
        assert_eq!(ssvi_total_variance(&P, 0.0), 0.0625);
    }

    #[test]
    fn total_variance_minimum_at_k_min() {
        let k_min = P.k_min().unwrap();
        assert!((k_min - 1.142_857_142_857_143).abs() < 1e-14);
        // At k_min the radical equals 1, so w = θ/2 (2 − 2ρ²) = θ(1 − ρ²).
        let w = ssvi_total_variance(&P, k_min);
        assert!((w - 0.0225).abs() < 1e-15, "w(k_min) = {w}");
        assert!((P.min_total_variance() - 0.0225).abs() < 1e-15);
        // brute-force scan for the minimum
        let scan_min =
            (-20_000..=20_000).map(|i| ssvi_total_variance(&P, i as f64 * 1e-3)).fold(f64::INFINITY, f64::min);
        assert!(scan_min >= w - 1e-15);
        assert!(scan_min - w < 1e-7);
    }

    #[test]
    fn zero_phi_is_flat() {
        let p = SsviParams::new(0.0625, -0.8, 0.0).unwrap();
        for k in [-7.0, 0.0, 3.3, 150.0] {
            assert!((ssvi_total_variance(&p, k) - 0.0625).abs() < 1e-16);
        }
    }

    #[test]
    fn derivatives_reference_values() {
        let (w1, w2) = ssvi_derivatives(&P, 0.0);
        assert!((w1 + 0.07).abs() < 1e-15);
        assert!((w2 - 0.02205).abs() < 1e-15);
        let (w1, _) = ssvi_derivatives(&P, P.k_min().unwrap());
        assert!(w1.abs() < 1e-15);
        let w = |k| ssvi_total_variance(&P, k);
        assert!((fd1(w, 0.0, 1e-5) + 0.07).abs() < 1e-10);
        assert!((fd2(w, 0.0, 1e-4) - 0.02205).abs() < 1e-7);
    }

    #[test]
    fn smile_vol_chain_rule() {
        let s = SmileSlice::reference_ssvi();
        let pt = smile_vol(&s, 0.0).unwrap();
        assert!((pt.v - 0.25).abs() < 1e-16);
        assert!((pt.dv + 0.14).abs() < 1e-15);
        let c = SmileSlice::constant(0.2).unwrap();
        assert_eq!(smile_vol(&c, 3.7).unwrap(), SmilePoint { v: 0.2, dv: 0.0, d2v: 0.0 });
    }

    #[test]
    fn smile_vol_finite_difference_consistency() {
        let s = SmileSlice::reference_ssvi();
        let v = |k| s.vol(k).unwrap();
        for k in [-5.0, -1.0, -0.2, 0.0, 0.4, 1.142_857, 3.0, 12.0] {
            let pt = s.point(k).unwrap();
            let d1 = fd1(v, k, 1e-5);
            let d2 = fd2(v, k, 1e-4);
            assert!((d1 - pt.dv).abs() <= 1e-6 * pt.dv.abs().max(1e-3), "v' at {k}");
            assert!((d2 - pt.d2v).abs() <= 1e-5 * pt.d2v.abs().max(1e-2), "v'' at {k}");
        }
    }

    #[test]
    fn validation_reference_slice_passes() {
        let r = validate_ssvi(&P);
        assert!(r.ok);
        assert!(r.violations.is_empty());
        let lhs1 = P.theta * P.phi * (1.0 + P.rho.abs());
        let lhs2 = P.theta * P.phi * P.phi * (1.0 + P.rho.abs());
        assert!((lhs1 - 0.1575).abs() < 1e-15);
        assert!((lhs2 - 0.2205).abs() < 1e-15);
    }

    #[test]
    fn validation_limiting_case_rejected() {
        let r = validate_ssvi(&SsviParams::new(2.0, 0.0, 2.0).unwrap());
        assert!(!r.ok);
        assert!(r.has(LIMITING_CASE));
        let neg = SsviParams::new(1.0, -0.5, 4.0 / 1.5).unwrap();
        assert!(validate_ssvi(&neg).has(LIMITING_CASE));
    }

    #[test]
    fn validation_condition_two() {
        let r = validate_ssvi(&SsviParams::new(1.0, 0.0, 3.0).unwrap());
        assert!(!r.ok);
        let v = r.violations.iter().find(|v| v.code == CONDITION_2).unwrap();
        assert_eq!(v.lhs, 9.0);
        assert!(!r.has(CONDITION_1));
    }

    #[test]
    fn domain_errors() {
        assert!(SsviParams::new(0.0, 0.0, 1.0).is_err());
        assert!(SsviParams::new(0.1, 1.0, 1.0).is_err());
        assert!(SsviParams::new(0.1, 0.0, -1e-9).is_err());
        assert!(SmileSlice::constant(0.0).is_err());
    }

    #[test]
    fn wing_slopes_closed_form_and_probe() {
        let s = SmileSlice::reference_ssvi();
        let b = wing_slopes(&s);
        assert!((b.beta_plus - 0.00875).abs() < 1e-16);
        assert!((b.beta_minus - 0.07875).abs() < 1e-16);
        let n = wing_slopes_numerical(&s, 1e6).unwrap();
        assert!((n.beta_plus / b.beta_plus - 1.0).abs() < 1e-3);
        assert!((n.beta_minus / b.beta_minus - 1.0).abs() < 1e-3);

        let c = SmileSlice::constant(0.2).unwrap();
        assert_eq!(wing_slopes(&c), WingSlopes { beta_plus: 0.0, beta_minus: 0.0 });

        let sym = SmileSlice::Ssvi(SsviParams::new(0.04, 0.0, 2.0).unwrap());
        let b = wing_slopes(&sym);
        assert_eq!(b.beta_plus, b.beta_minus);
        assert!((b.beta_plus - 0.04).abs() < 1e-16);
    }

    #[test]
    fn assumptions_hold_for_valid_slices() {
        assert!(verify_assumptions(&SmileSlice::reference_ssvi(), DEFAULT_K_PROBE).ok);
        assert!(verify_assumptions(&SmileSlice::constant(0.2).unwrap(), DEFAULT_K_PROBE).ok);
    }

    #[test]
    fn assumptions_fail_in_limiting_case_with_negative_rho() {
        let p = SsviParams::new(1.0, -0.5, 4.0 / 1.5).unwrap();
        let r = verify_assumptions(&SmileSlice::Ssvi(p), DEFAULT_K_PROBE);
        assert!(!r.ok);
        assert!(r.has(ATOM_AT_ZERO));
    }

    #[test]
    fn config_round_trip_and_unknown_keys() {
        let c = SmileConfig::from_json(r#"{"model":"ssvi","theta":0.0625,"rho":-0.8,"phi":1.40}"#).unwrap();
        assert_eq!(c.into_slice().unwrap(), SmileSlice::reference_ssvi());
        let b = SmileConfig::from_json(r#"{"model":"bs","total_vol":0.2}"#).unwrap();
        assert_eq!(b.into_slice().unwrap(), SmileSlice::ConstantVol(0.2));
        assert!(SmileConfig::from_json(r#"{"model":"bs","total_vol":0.2,"extra":1}"#).is_err());
        assert!(SmileConfig::from_json(r#"{"model":"svi","a":1}"#).is_err());
        let again = SmileConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn arbitrageable_config_is_rejected() {
        let c = SmileConfig::from_json(r#"{"model":"ssvi","theta":1,"rho":0,"phi":3}"#).unwrap();
        assert!(matches!(c.into_slice(), Err(Error::Arbitrageable(_))));
    }
}
