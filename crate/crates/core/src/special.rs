//! Gaussian helpers and the sine integral.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use crate::complex::ComplexValue;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density φ(x).
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal cdf N(x), accurate in both tails.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Sine integral Si(x) = ∫₀ˣ sin(t)/t dt.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x <= 2.0 {
        sine_integral_series(x)
    } else {
        FRAC_PI_2 - sine_integral_tail(x)
    }
}

/// ∫ₓ^∞ sin(t)/t dt for x > 0, i.e. π/2 − Si(x), without cancellation for large x.
pub fn sine_integral_tail(x: f64) -> f64 {
    assert!(x > 0.0, "sine_integral_tail needs x > 0");
    if x <= 2.0 {
        return FRAC_PI_2 - sine_integral_series(x);
    }
    // Lentz evaluation of the continued fraction for E1(ix).
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let mut b = ComplexValue::new(1.0, x);
    let mut c = ComplexValue::real(1.0 / TINY);
    let mut d = b.recip();
    let mut h = d;
    for i in 2..100_000usize {
        let a = -(((i - 1) * (i - 1)) as f64);
        b = b + 2.0;
        d = (d * a + b).recip();
        c = b + ComplexValue::real(a) / c;
        let del = c * d;
        h = h * del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    let (s, co) = x.sin_cos();
    let h = h * ComplexValue::new(co, -s);
    -h.im
}

fn sine_integral_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0usize;
    loop {
        k += 1;
        let n = (2 * k) as f64;
        term *= -x2 / (n * (n + 1.0));
        let add = term / (n + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// 2π, spelled once.
pub const TWO_PI: f64 = 2.0 * PI;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_points() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(0.1) - 0.539_827_837_277_029).abs() < 1e-15);
        assert!((norm_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-15);
        // deep left tail keeps relative accuracy
        let t = norm_cdf(-30.0);
        assert!(((t / 4.906_713_927_148_187e-198) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sine_integral_values() {
        // Abramowitz & Stegun table 5.1
        assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-14);
        assert!((sine_integral(2.0) - 1.605_412_976_802_695).abs() < 1e-14);
        assert!((sine_integral(5.0) - 1.549_931_244_944_674).abs() < 1e-14);
        assert!((sine_integral(10.0) - 1.658_347_594_218_874).abs() < 1e-14);
        assert!((sine_integral(-3.0) + 1.848_652_527_999_468).abs() < 1e-14);
    }

    #[test]
    fn sine_integral_tail_large_argument() {
        // asymptotic series: tail ≈ cos(x)/x (1 − 2/x²) + sin(x)/x² (1 − 6/x²)
        let x = 400.0f64;
        let approx = x.cos() / x * (1.0 - 2.0 / (x * x)) + x.sin() / (x * x) * (1.0 - 6.0 / (x * x));
        assert!((sine_integral_tail(x) - approx).abs() < 1e-11);
        assert!((sine_integral_tail(x) + 1.318_542_478_915_132_6e-3).abs() < 1e-17);
    }
}
