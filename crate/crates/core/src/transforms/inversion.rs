//! Inverse maps `g(p,·)` by bracket expansion followed by Brent's method.

use super::{checked_point, df_p_dk_at, f_p_at, InterpolationWeight, InversionConfig};
use crate::error::{Error, Result};
use crate::smiles::SmileSlice;

/// Expansions allowed before giving up on enclosing the target.
const MAX_DOUBLINGS: usize = 64;

/// Solves `f(p, k) = z` for `k`.
pub fn invert(slice: &SmileSlice, weight: InterpolationWeight, z: f64, cfg: &InversionConfig) -> Result<f64> {
    cfg.validate()?;
    let p = weight.p();
    if !z.is_finite() {
        return Err(Error::InvalidParameter(format!("target z = {z} is not finite")));
    }
    let h = |k: f64| -> Result<f64> {
        let v = checked_point(slice, k)?.v;
        Ok(f_p_at(p, k, v) - z)
    };

    let mut lo = z - 1.0;
    let mut hi = z + 1.0;
    let mut flo = h(lo)?;
    let mut fhi = h(hi)?;
    let mut width = 1.0;
    let mut doublings = 0;
    while flo > 0.0 || fhi < 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BracketingFailed { p, z, doublings });
        }
        width *= cfg.bracket_expand_factor;
        doublings += 1;
        if flo > 0.0 {
            hi = lo;
            fhi = flo;
            lo = z - width;
            flo = h(lo)?;
        } else {
            lo = hi;
            flo = fhi;
            hi = z + width;
            fhi = h(hi)?;
        }
    }
    if flo.abs() <= cfg.tol_abs {
        return Ok(lo);
    }
    if fhi.abs() <= cfg.tol_abs {
        return Ok(hi);
    }
    brent(h, lo, hi, flo, fhi, cfg).map_err(|e| match e {
        Error::MaxIterExceeded { max_iter, .. } => Error::MaxIterExceeded { p, z, max_iter },
        other => other,
    })
}

/// Brent's method on a sign-changing bracket; stops once `|h| ≤ tol_abs` or the
/// bracket has collapsed to adjacent floating-point numbers.
fn brent(h: impl Fn(f64) -> Result<f64>, a0: f64, b0: f64, fa0: f64, fb0: f64, cfg: &InversionConfig) -> Result<f64> {
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..cfg.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * f64::MIN_POSITIVE;
        let xm = 0.5 * (c - b);
        if fb.abs() <= cfg.tol_abs || xm.abs() <= tol1 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = h(b)?;
    }
    Err(Error::MaxIterExceeded { p: f64::NAN, z: f64::NAN, max_iter: cfg.max_iter })
}

/// `g(p, z)` for `p ∈ [0, 1]`.
pub fn g_p(slice: &SmileSlice, p: f64, z: f64, cfg: &InversionConfig) -> Result<f64> {
    invert(slice, InterpolationWeight::standard(p)?, z, cfg)
}

/// Inverse of `f₁`.
pub fn g1(slice: &SmileSlice, z: f64, cfg: &InversionConfig) -> Result<f64> {
    g_p(slice, 1.0, z, cfg)
}

/// Inverse of `f₂`.
pub fn g2(slice: &SmileSlice, z: f64, cfg: &InversionConfig) -> Result<f64> {
    g_p(slice, 0.0, z, cfg)
}

/// Everything the analytics need at one normalized coordinate `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPoint {
    /// `g(p, z)`.
    pub k: f64,
    /// `vᵖ(z) = v(k)`.
    pub v: f64,
    /// `v′(k)`.
    pub dv_dk: f64,
    /// `v″(k)`.
    pub d2v_dk2: f64,
    /// `∂ₖf(p, k)`.
    pub df_dk: f64,
}

impl NormalizedPoint {
    /// `d vᵖ/dz = v′(k) / ∂ₖf(p, k)`.
    pub fn dv_dz(&self, p: f64) -> Result<f64> {
        if self.df_dk == 0.0 || !self.df_dk.is_finite() {
            return Err(Error::DerivativeSingular { p, k: self.k });
        }
        Ok(self.dv_dk / self.df_dk)
    }
}

/// Inverts once and collects `k`, `v`, `v′`, `v″` and `∂ₖf` at the root.
pub fn normalized_point(
    slice: &SmileSlice,
    weight: InterpolationWeight,
    z: f64,
    cfg: &InversionConfig,
) -> Result<NormalizedPoint> {
    let k = invert(slice, weight, z, cfg)?;
    let pt = checked_point(slice, k)?;
    Ok(NormalizedPoint { k, v: pt.v, dv_dk: pt.dv, d2v_dk2: pt.d2v, df_dk: df_p_dk_at(weight.p(), k, &pt) })
}

/// `vᵖ(z) = v(g(p, z))`.
pub fn normalized_vol(slice: &SmileSlice, p: f64, z: f64, cfg: &InversionConfig) -> Result<f64> {
    Ok(normalized_point(slice, InterpolationWeight::standard(p)?, z, cfg)?.v)
}

/// `d vᵖ(z)/dz`, computed as `v′(g)/∂ₖf(p, g)`.
pub fn normalized_vol_deriv(slice: &SmileSlice, p: f64, z: f64, cfg: &InversionConfig) -> Result<f64> {
    normalized_point(slice, InterpolationWeight::standard(p)?, z, cfg)?.dv_dz(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::SsviParams;
    use crate::transforms::{f2, f_p};

    fn cfg() -> InversionConfig {
        InversionConfig::default()
    }

    fn models() -> [SmileSlice; 2] {
        [SmileSlice::reference_ssvi(), SmileSlice::constant(0.2).unwrap()]
    }

    /// Plain bisection on a wide bracket, independent of the Brent path.
    fn bisect(slice: &SmileSlice, p: f64, z: f64) -> f64 {
        let (mut lo, mut hi) = (-1e4, 1e4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f_p(slice, p, mid).unwrap() < z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn constant_vol_closed_forms() {
        let v = 0.2;
        let s = SmileSlice::constant(v).unwrap();
        for z in [-6.0, -1.0, 0.0, 0.5, 7.0] {
            assert!((g2(&s, z, &cfg()).unwrap() - (v * z - 0.5 * v * v)).abs() < 1e-12);
            assert!((g1(&s, z, &cfg()).unwrap() - (v * z + 0.5 * v * v)).abs() < 1e-12);
        }
        assert!((g1(&s, 0.0, &cfg()).unwrap() - 0.02).abs() < 1e-13);
    }

    #[test]
    fn round_trip_both_directions() {
        for s in models() {
            for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                for k in [-1.0, 0.0, 1.0] {
                    let z = f_p(&s, p, k).unwrap();
                    assert!((g_p(&s, p, z, &cfg()).unwrap() - k).abs() < 1e-10);
                }
                for i in -32..=32 {
                    let z = i as f64 * 0.25;
                    let k = g_p(&s, p, z, &cfg()).unwrap();
                    assert!((f_p(&s, p, k).unwrap() - z).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn agrees_with_bisection() {
        let s = SmileSlice::reference_ssvi();
        for p in [0.0, 0.4, 1.0] {
            for z in [-20.0, -3.0, 0.1, 4.0, 25.0] {
                let a = g_p(&s, p, z, &cfg()).unwrap();
                let b = bisect(&s, p, z);
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "p={p} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn normalized_vol_values() {
        let c = SmileSlice::constant(0.2).unwrap();
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(normalized_vol(&c, p, 1.7, &cfg()).unwrap(), 0.2);
            assert_eq!(normalized_vol_deriv(&c, p, -2.0, &cfg()).unwrap(), 0.0);
        }
        let s = SmileSlice::reference_ssvi();
        assert!((normalized_vol(&s, 0.0, 0.125, &cfg()).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn g_identity_in_terms_of_normalized_vol() {
        let s = SmileSlice::reference_ssvi();
        for p in [0.0, 0.5, 1.0] {
            for i in -20..=20 {
                let z = i as f64 * 0.25;
                let k = g_p(&s, p, z, &cfg()).unwrap();
                let vp = normalized_vol(&s, p, z, &cfg()).unwrap();
                assert!((k - (z * vp - (0.5 - p) * vp * vp)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn normalized_vol_derivative_matches_finite_difference() {
        let s = SmileSlice::reference_ssvi();
        let h = 1e-5;
        for p in [0.0, 0.5, 1.0] {
            for i in -3..=3 {
                let z = i as f64;
                let an = normalized_vol_deriv(&s, p, z, &cfg()).unwrap();
                let fd = (normalized_vol(&s, p, z + h, &cfg()).unwrap()
                    - normalized_vol(&s, p, z - h, &cfg()).unwrap())
                    / (2.0 * h);
                assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-3), "p={p} z={z}: {an} vs {fd}");
            }
        }
        // p = 0, z = f₂(0): v′(0)/f₂′(0)
        let z = f2(&s, 0.0).unwrap();
        let pt = s.point(0.0).unwrap();
        let f2p = (1.0 - pt.dv * z) / pt.v + pt.dv;
        assert!((normalized_vol_deriv(&s, 0.0, z, &cfg()).unwrap() - pt.dv / f2p).abs() < 1e-10);
    }

    #[test]
    fn inversion_reaches_far_nodes() {
        let s = SmileSlice::reference_ssvi();
        for z in [-45.0, 45.0, 200.0] {
            for p in [0.0, 1.0] {
                let k = g_p(&s, p, z, &cfg()).unwrap();
                assert!((f_p(&s, p, k).unwrap() - z).abs() <= 1e-12 * z.abs().max(1.0) + 1e-12);
            }
        }
    }

    #[test]
    fn non_surjective_weight_fails_to_bracket() {
        // For p far above the right threshold f(p, k) → −∞ on both sides,
        // so large positive targets are never reached.
        let s = SmileSlice::reference_ssvi();
        let w = InterpolationWeight { p: 300.0 };
        let err = invert(&s, w, 1e3, &cfg()).unwrap_err();
        assert!(matches!(err, Error::BracketingFailed { .. } | Error::MaxIterExceeded { .. }), "{err:?}");
    }

    #[test]
    fn degenerate_phi_zero_behaves_like_constant() {
        let s = SmileSlice::Ssvi(SsviParams::new(0.04, -0.5, 0.0).unwrap());
        assert!((g2(&s, 1.0, &cfg()).unwrap() - 0.18).abs() < 1e-12);
    }
}
